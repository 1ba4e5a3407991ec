#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mctsga/common.hpp"
#include "mctsga/network.hpp"
#include "mctsga/rng.hpp"

namespace mctsga {

// One labelled per-layer slice of a flattened model: row-major weights
// followed by that layer's biases.
struct GenomeSegment {
    std::string label;
    std::vector<double> values;

    bool operator==(const GenomeSegment&) const = default;
};

// The GA/MCTS individual. fitness is training accuracy once evaluated;
// neg_mean_bce is the tournament tie-break key computed alongside it.
struct Genome {
    std::vector<GenomeSegment> segments;
    std::optional<double> fitness;
    std::optional<double> neg_mean_bce;

    std::size_t total_values() const {
        std::size_t n = 0;
        for (const auto& s : segments) n += s.values.size();
        return n;
    }

    bool same_structure(const Genome& other) const {
        if (segments.size() != other.segments.size()) return false;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].label != other.segments[i].label ||
                segments[i].values.size() != other.segments[i].values.size())
                return false;
        }
        return true;
    }

    void clear_evaluation() {
        fitness.reset();
        neg_mean_bce.reset();
    }
};

struct Population {
    std::vector<Genome> members;
    int generation = 0;

    std::size_t size() const { return members.size(); }
};

inline Genome encode(const MlpModel& model) {
    Genome g;
    g.segments.reserve(static_cast<std::size_t>(model.spec.layer_count()));
    for (int l = 0; l < model.spec.layer_count(); ++l) {
        GenomeSegment seg;
        seg.label = "L" + std::to_string(l);
        const auto& w = model.weights[static_cast<std::size_t>(l)].data();
        const auto& b = model.biases[static_cast<std::size_t>(l)];
        seg.values.reserve(w.size() + b.size());
        seg.values.insert(seg.values.end(), w.begin(), w.end());
        seg.values.insert(seg.values.end(), b.begin(), b.end());
        g.segments.push_back(std::move(seg));
    }
    return g;
}

inline MlpModel decode(const Genome& g, const MlpSpec& spec) {
    spec.validate();
    if (g.segments.size() != static_cast<std::size_t>(spec.layer_count()))
        throw InputError("decode: genome has " + std::to_string(g.segments.size()) +
                         " segments, spec wants " + std::to_string(spec.layer_count()));
    MlpModel model;
    model.spec = spec;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const auto& seg = g.segments[static_cast<std::size_t>(l)];
        if (seg.values.size() != spec.layer_param_count(l))
            throw InputError("decode: segment " + seg.label + " has " +
                             std::to_string(seg.values.size()) + " values, spec wants " +
                             std::to_string(spec.layer_param_count(l)));
        const auto in = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l) + 1]);
        Matrix w(out, in);
        std::copy(seg.values.begin(), seg.values.begin() + static_cast<std::ptrdiff_t>(out * in),
                  w.data().begin());
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(seg.values.begin() + static_cast<std::ptrdiff_t>(out * in),
                                  seg.values.end());
    }
    return model;
}

// Population of perturbed copies of a seed genome: independent uniform noise
// in [-perturb_range, +perturb_range] on every value. Draw order is fixed
// (member, then segment, then value).
inline Population init_population(const Genome& seed_genome, int size, double perturb_range,
                                  std::uint64_t seed) {
    if (size < 2) throw InputError("init_population: size must be >= 2");
    if (!(perturb_range > 0.0)) throw InputError("init_population: perturb_range must be > 0");

    SplitMix64 rng(seed);
    Population pop;
    pop.generation = 0;
    pop.members.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        Genome g;
        g.segments.reserve(seed_genome.segments.size());
        for (const auto& seg : seed_genome.segments) {
            GenomeSegment out{seg.label, seg.values};
            for (double& v : out.values) v += rng.uniform(-perturb_range, perturb_range);
            g.segments.push_back(std::move(out));
        }
        pop.members.push_back(std::move(g));
    }
    return pop;
}

// Genome files share the model layout: per-segment flat arrays at full
// precision, plus the segment labels and the cached fitness when present.
inline void save_genome(const Genome& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open genome file for writing: " + path.string());
    out << "mctsga-genome 1\n";
    out << "segments " << g.segments.size() << '\n';
    for (const auto& seg : g.segments) {
        out << "segment " << seg.label << ' ' << seg.values.size() << '\n';
        bool first = true;
        for (const double v : seg.values) {
            out << (first ? "" : " ") << detail::format_double(v);
            first = false;
        }
        out << '\n';
    }
    if (g.fitness) out << "fitness " << detail::format_double(*g.fitness) << '\n';
    if (!out) throw InputError("failed writing genome file: " + path.string());
}

inline Genome load_genome(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open genome file: " + path.string());
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "mctsga-genome" || version != 1)
        throw InputError(path.string() + ": not a genome file");
    std::size_t count = 0;
    in >> word >> count;
    if (!in || word != "segments") throw InputError(path.string() + ": missing segments line");

    Genome g;
    for (std::size_t s = 0; s < count; ++s) {
        std::string label;
        std::size_t len = 0;
        in >> word >> label >> len;
        if (!in || word != "segment")
            throw InputError(path.string() + ": malformed segment " + std::to_string(s));
        GenomeSegment seg;
        seg.label = label;
        seg.values.resize(len);
        for (double& v : seg.values)
            if (!(in >> v)) throw InputError(path.string() + ": truncated segment " + label);
        g.segments.push_back(std::move(seg));
    }
    if (in >> word && word == "fitness") {
        double f;
        if (in >> f) g.fitness = f;
    }
    return g;
}

}  // namespace mctsga
