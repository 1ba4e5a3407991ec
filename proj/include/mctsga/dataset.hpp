#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mctsga/common.hpp"
#include "mctsga/rng.hpp"

namespace mctsga {

inline constexpr int kCsvFeatureCount = 8;

// Rows straight from the CSV: unscaled features plus a {0,1} label per row.
struct RawDataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
    std::array<long, 2> class_counts() const {
        std::array<long, 2> c{0, 0};
        for (const int y : labels) c[static_cast<std::size_t>(y)]++;
        return c;
    }
};

struct ScalerParams {
    std::vector<double> min;
    std::vector<double> max;

    double transform_value(std::size_t col, double x) const {
        const double range = max[col] - min[col];
        if (range == 0.0) return 0.0;  // constant column convention
        return (x - min[col]) / range;
    }
    double inverse_value(std::size_t col, double x) const {
        return min[col] + x * (max[col] - min[col]);
    }
};

struct LabeledDataset {
    Matrix features;  // every entry in [0, 1]
    std::vector<int> labels;
    ScalerParams scaler;

    std::size_t size() const { return labels.size(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view token, double& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

}  // namespace detail

// Reads a 9-column CSV (8 features + trailing {0,1} label). A header row is
// detected by a non-numeric first field. LF and CRLF both accepted.
inline RawDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open dataset file: " + path.string());

    RawDataset ds;
    std::vector<double> flat;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;

    const auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": " << what;
        throw InputError(msg.str());
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view content = detail::trim(line);
        if (content.empty()) continue;
        const auto fields = detail::split_fields(content);

        if (first_content_line) {
            first_content_line = false;
            double probe;
            if (!detail::parse_double(fields[0], probe)) {
                // header row
                if (fields.size() != kCsvFeatureCount + 1)
                    fail("expected " + std::to_string(kCsvFeatureCount + 1) + " columns, got " +
                         std::to_string(fields.size()));
                for (int j = 0; j < kCsvFeatureCount; ++j)
                    ds.feature_names.emplace_back(detail::trim(fields[static_cast<std::size_t>(j)]));
                continue;
            }
        }

        if (fields.size() != kCsvFeatureCount + 1)
            fail("expected " + std::to_string(kCsvFeatureCount + 1) + " columns, got " +
                 std::to_string(fields.size()));

        for (int j = 0; j < kCsvFeatureCount; ++j) {
            double v;
            if (!detail::parse_double(fields[static_cast<std::size_t>(j)], v) || !std::isfinite(v))
                fail("non-numeric value '" + std::string(detail::trim(fields[static_cast<std::size_t>(j)])) +
                     "' in column " + std::to_string(j + 1));
            flat.push_back(v);
        }
        double label;
        if (!detail::parse_double(fields.back(), label) || (label != 0.0 && label != 1.0))
            fail("label must be 0 or 1, got '" + std::string(detail::trim(fields.back())) + "'");
        ds.labels.push_back(static_cast<int>(label));
    }

    if (ds.labels.empty()) throw InputError(path.string() + ": no data rows");
    if (ds.feature_names.empty()) {
        for (int j = 0; j < kCsvFeatureCount; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    }

    ds.features = Matrix(ds.labels.size(), kCsvFeatureCount);
    ds.features.data() = std::move(flat);
    return ds;
}

// Undersamples the majority class to the minority count, then shuffles.
// Deterministic for a given (input, seed).
inline RawDataset balance_undersample(const RawDataset& ds, std::uint64_t seed) {
    const auto counts = ds.class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw InputError("balance_undersample: both classes must be present");

    const int majority = counts[1] > counts[0] ? 1 : 0;
    const auto keep = static_cast<std::size_t>(std::min(counts[0], counts[1]));

    std::vector<std::size_t> minority_rows, majority_rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
        (ds.labels[i] == majority ? majority_rows : minority_rows).push_back(i);

    SplitMix64 rng(seed);
    std::vector<std::size_t> kept = rng.sample_indices(majority_rows.size(), keep);
    std::vector<std::size_t> rows = minority_rows;
    rows.reserve(2 * keep);
    for (const std::size_t k : kept) rows.push_back(majority_rows[k]);
    rng.shuffle(rows);

    RawDataset out;
    out.feature_names = ds.feature_names;
    out.features = Matrix(rows.size(), ds.features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = ds.features.row(rows[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels.push_back(ds.labels[rows[i]]);
    }
    return out;
}

// Min-max scales each feature column into [0, 1] and keeps the fitted params.
// Constant columns map to 0.0.
inline LabeledDataset minmax_fit_transform(const RawDataset& ds) {
    if (ds.size() == 0) throw InputError("minmax_fit_transform: empty dataset");
    const std::size_t cols = ds.features.cols();

    LabeledDataset out;
    out.scaler.min.assign(cols, 0.0);
    out.scaler.max.assign(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double lo = ds.features.at(0, j), hi = ds.features.at(0, j);
        for (std::size_t i = 1; i < ds.size(); ++i) {
            lo = std::min(lo, ds.features.at(i, j));
            hi = std::max(hi, ds.features.at(i, j));
        }
        out.scaler.min[j] = lo;
        out.scaler.max[j] = hi;
    }

    out.features = Matrix(ds.size(), cols);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out.features.at(i, j) = out.scaler.transform_value(j, ds.features.at(i, j));
    out.labels = ds.labels;
    return out;
}

// Stratified train/test split. Test gets round(n * fraction) rows with each
// class's share matching the whole within one row; both outputs keep the input
// row order (the split is a subsequence partition).
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                       double test_fraction,
                                                       std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InputError("split: test_fraction must be in (0, 1)");
    const auto n = static_cast<double>(ds.size());
    if (n * test_fraction < 1.0 || n * (1.0 - test_fraction) < 1.0)
        throw InputError("split: both partitions must receive at least one row");

    const long test_total = std::lround(n * test_fraction);

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

    std::array<long, 2> target{};
    std::array<double, 2> exact{};
    for (int c = 0; c < 2; ++c) {
        exact[static_cast<std::size_t>(c)] =
            static_cast<double>(by_class[static_cast<std::size_t>(c)].size()) * test_fraction;
        target[static_cast<std::size_t>(c)] = std::lround(exact[static_cast<std::size_t>(c)]);
        target[static_cast<std::size_t>(c)] = std::clamp<long>(
            target[static_cast<std::size_t>(c)], 0,
            static_cast<long>(by_class[static_cast<std::size_t>(c)].size()));
    }
    // Fix the rounding drift against the overall target, moving the class whose
    // per-class error stays within one row.
    while (target[0] + target[1] > test_total) {
        const int c = (target[0] - exact[0] >= target[1] - exact[1]) ? 0 : 1;
        target[static_cast<std::size_t>(c)]--;
    }
    while (target[0] + target[1] < test_total) {
        const int c = (exact[0] - target[0] >= exact[1] - target[1]) ? 0 : 1;
        target[static_cast<std::size_t>(c)]++;
    }

    SplitMix64 rng(seed);
    std::vector<bool> in_test(ds.size(), false);
    for (int c = 0; c < 2; ++c) {
        auto& rows = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(rows);
        for (long i = 0; i < target[static_cast<std::size_t>(c)]; ++i)
            in_test[rows[static_cast<std::size_t>(i)]] = true;
    }

    const auto take = [&](bool want_test) {
        LabeledDataset part;
        part.scaler = ds.scaler;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (in_test[i] == want_test) rows.push_back(i);
        part.features = Matrix(rows.size(), ds.features.cols());
        part.labels.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = ds.features.row(rows[i]);
            std::copy(src.begin(), src.end(), part.features.row(i).begin());
            part.labels.push_back(ds.labels[rows[i]]);
        }
        return part;
    };

    return {take(false), take(true)};
}

}  // namespace mctsga
