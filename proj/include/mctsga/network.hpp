#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mctsga/common.hpp"
#include "mctsga/dataset.hpp"
#include "mctsga/rng.hpp"

namespace mctsga {

// Output probabilities are kept this far inside (0, 1); also the BCE clamp.
inline constexpr double kProbEpsilon = 1e-12;

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Fully connected feedforward net, sigmoid on every layer, 1 output unit.
struct MlpSpec {
    std::vector<int> layer_sizes;  // e.g. {8, 16, 8, 4, 1}

    int input_size() const { return layer_sizes.front(); }
    int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }

    std::size_t layer_param_count(int l) const {
        const auto in = static_cast<std::size_t>(layer_sizes[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(layer_sizes[static_cast<std::size_t>(l) + 1]);
        return out * in + out;
    }

    std::size_t param_count() const {
        std::size_t total = 0;
        for (int l = 0; l < layer_count(); ++l) total += layer_param_count(l);
        return total;
    }

    void validate() const {
        if (layer_sizes.size() < 2) throw InputError("MlpSpec: need at least input and output sizes");
        for (const int s : layer_sizes)
            if (s < 1) throw InputError("MlpSpec: layer sizes must be positive");
        if (layer_sizes.back() != 1) throw InputError("MlpSpec: output layer must have size 1");
    }

    bool operator==(const MlpSpec&) const = default;
};

struct MlpModel {
    MlpSpec spec;
    std::vector<Matrix> weights;              // [l]: out x in
    std::vector<std::vector<double>> biases;  // [l]: out

    bool operator==(const MlpModel&) const = default;
};

// Glorot-uniform weights, zero biases. Fill order is fixed (layer by layer,
// weight rows first, row-major) so a seed pins the exact model.
inline MlpModel init_model(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    MlpModel model;
    model.spec = spec;
    SplitMix64 rng(seed);
    for (int l = 0; l < spec.layer_count(); ++l) {
        const auto in = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l) + 1]);
        const double r = std::sqrt(6.0 / static_cast<double>(in + out));
        Matrix w(out, in);
        for (double& v : w.data()) v = rng.uniform(-r, r);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(out, 0.0);
    }
    return model;
}

// Reusable per-layer activation buffers for batched forward passes.
class ForwardScratch {
public:
    explicit ForwardScratch(const MlpSpec& spec) {
        acts_.resize(spec.layer_sizes.size());
        for (std::size_t i = 0; i < spec.layer_sizes.size(); ++i)
            acts_[i].resize(static_cast<std::size_t>(spec.layer_sizes[i]));
    }
    std::vector<std::vector<double>>& activations() { return acts_; }

private:
    std::vector<std::vector<double>> acts_;
};

namespace detail {
// Runs the net, leaving every layer's activation in scratch. Returns the
// output probability clamped to the open interval.
inline double forward_into(const MlpModel& model, std::span<const double> x,
                           ForwardScratch& scratch) {
    auto& a = scratch.activations();
    std::copy(x.begin(), x.end(), a[0].begin());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        const auto& bias = model.biases[l];
        for (std::size_t i = 0; i < w.rows(); ++i) {
            const auto wrow = w.row(i);
            double z = bias[i];
            for (std::size_t j = 0; j < w.cols(); ++j) z += wrow[j] * a[l][j];
            a[l + 1][i] = sigmoid(z);
        }
    }
    const double p = a.back()[0];
    return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}
}  // namespace detail

inline double forward(const MlpModel& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.spec.input_size()))
        throw InputError("forward: input has " + std::to_string(x.size()) + " values, spec wants " +
                         std::to_string(model.spec.input_size()));
    ForwardScratch scratch(model.spec);
    return detail::forward_into(model, x, scratch);
}

inline std::vector<double> scores(const MlpModel& model, const Matrix& features) {
    if (features.cols() != static_cast<std::size_t>(model.spec.input_size()))
        throw InputError("scores: feature width does not match the model input size");
    ForwardScratch scratch(model.spec);
    std::vector<double> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
        out[i] = detail::forward_into(model, features.row(i), scratch);
    return out;
}

inline double bce_loss(double p, int y) {
    p = std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

inline Gradients zero_gradients(const MlpSpec& spec) {
    Gradients g;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const auto in = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l) + 1]);
        g.weights.emplace_back(out, in);
        g.biases.emplace_back(out, 0.0);
    }
    return g;
}

// Exact backpropagation of mean BCE over the given rows. Sigmoid + BCE gives
// the output delta p - y; hidden deltas use a * (1 - a).
inline Gradients gradients(const MlpModel& model, const Matrix& features,
                           std::span<const int> labels, std::span<const std::size_t> rows) {
    if (rows.empty()) throw InputError("gradients: empty batch");
    const int layers = model.spec.layer_count();
    Gradients grad = zero_gradients(model.spec);
    ForwardScratch scratch(model.spec);
    std::vector<std::vector<double>> delta(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l)
        delta[static_cast<std::size_t>(l)].resize(
            static_cast<std::size_t>(model.spec.layer_sizes[static_cast<std::size_t>(l) + 1]));

    for (const std::size_t r : rows) {
        detail::forward_into(model, features.row(r), scratch);
        const auto& a = scratch.activations();

        delta.back()[0] = a.back()[0] - static_cast<double>(labels[r]);
        for (int l = layers - 2; l >= 0; --l) {
            const Matrix& w_next = model.weights[static_cast<std::size_t>(l) + 1];
            auto& d = delta[static_cast<std::size_t>(l)];
            const auto& d_next = delta[static_cast<std::size_t>(l) + 1];
            const auto& act = a[static_cast<std::size_t>(l) + 1];
            for (std::size_t j = 0; j < d.size(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < d_next.size(); ++i) s += w_next.at(i, j) * d_next[i];
                d[j] = s * act[j] * (1.0 - act[j]);
            }
        }
        for (int l = 0; l < layers; ++l) {
            Matrix& gw = grad.weights[static_cast<std::size_t>(l)];
            auto& gb = grad.biases[static_cast<std::size_t>(l)];
            const auto& d = delta[static_cast<std::size_t>(l)];
            const auto& a_prev = a[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < gw.rows(); ++i) {
                const double di = d[i];
                auto grow = gw.row(i);
                for (std::size_t j = 0; j < gw.cols(); ++j) grow[j] += di * a_prev[j];
                gb[i] += di;
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(rows.size());
    for (auto& w : grad.weights)
        for (double& v : w.data()) v *= inv;
    for (auto& b : grad.biases)
        for (double& v : b) v *= inv;
    return grad;
}

struct TrainConfig {
    enum class Optimizer { sgd, adam };

    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 0.01;
    int epochs = 200;
    int batch_size = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate(std::size_t n) const {
        if (!(learning_rate >= 0.0)) throw InputError("TrainConfig: learning_rate must be >= 0");
        if (epochs < 1) throw InputError("TrainConfig: epochs must be >= 1");
        if (batch_size < 1 || static_cast<std::size_t>(batch_size) > n)
            throw InputError("TrainConfig: batch_size must be in [1, n]");
    }
};

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_history;  // mean BCE per epoch, one entry per epoch
};

// Mini-batch training with per-epoch shuffling under the config seed.
// The epoch loss is the mean BCE over the epoch's pre-update forward passes.
inline TrainResult train(MlpModel model, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate(data.size());
    if (data.features.cols() != static_cast<std::size_t>(model.spec.input_size()))
        throw InputError("train: dataset width does not match the model input size");

    SplitMix64 rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    Gradients m = zero_gradients(model.spec);  // Adam first moment
    Gradients v = zero_gradients(model.spec);  // Adam second moment
    long t = 0;

    ForwardScratch scratch(model.spec);
    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::span<const std::size_t> batch(order.data() + start, end - start);

            for (const std::size_t r : batch)
                loss_sum += bce_loss(detail::forward_into(model, data.features.row(r), scratch),
                                     data.labels[r]);

            const Gradients g = gradients(model, data.features, data.labels, batch);
            if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
                for (std::size_t l = 0; l < model.weights.size(); ++l) {
                    auto& wd = model.weights[l].data();
                    const auto& gd = g.weights[l].data();
                    for (std::size_t i = 0; i < wd.size(); ++i) wd[i] -= cfg.learning_rate * gd[i];
                    for (std::size_t i = 0; i < model.biases[l].size(); ++i)
                        model.biases[l][i] -= cfg.learning_rate * g.biases[l][i];
                }
            } else {
                ++t;
                const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
                const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
                const auto adam_step = [&](double& w, double& mi, double& vi, double gi) {
                    mi = cfg.adam_beta1 * mi + (1.0 - cfg.adam_beta1) * gi;
                    vi = cfg.adam_beta2 * vi + (1.0 - cfg.adam_beta2) * gi * gi;
                    w -= cfg.learning_rate * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.adam_epsilon);
                };
                for (std::size_t l = 0; l < model.weights.size(); ++l) {
                    auto& wd = model.weights[l].data();
                    auto& md = m.weights[l].data();
                    auto& vd = v.weights[l].data();
                    const auto& gd = g.weights[l].data();
                    for (std::size_t i = 0; i < wd.size(); ++i) adam_step(wd[i], md[i], vd[i], gd[i]);
                    for (std::size_t i = 0; i < model.biases[l].size(); ++i)
                        adam_step(model.biases[l][i], m.biases[l][i], v.biases[l][i], g.biases[l][i]);
                }
            }
        }

        const double epoch_loss = loss_sum / static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss))
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
        result.loss_history.push_back(epoch_loss);
    }

    result.model = std::move(model);
    return result;
}

namespace detail {
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

// Text model format: a magic line, the layer sizes, then one flat array per
// layer (weights row-major, then biases) at full decimal precision.
inline void save_model(const MlpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open model file for writing: " + path.string());
    out << "mctsga-model 1\n";
    out << "layers";
    for (const int s : model.spec.layer_sizes) out << ' ' << s;
    out << '\n';
    for (int l = 0; l < model.spec.layer_count(); ++l) {
        out << "layer " << l << ' ' << model.spec.layer_param_count(l) << '\n';
        bool first = true;
        for (const double v : model.weights[static_cast<std::size_t>(l)].data()) {
            out << (first ? "" : " ") << detail::format_double(v);
            first = false;
        }
        for (const double v : model.biases[static_cast<std::size_t>(l)])
            out << ' ' << detail::format_double(v);
        out << '\n';
    }
    if (!out) throw InputError("failed writing model file: " + path.string());
}

inline MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file: " + path.string());
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "mctsga-model" || version != 1)
        throw InputError(path.string() + ": not a model file");
    in >> word;
    if (word != "layers") throw InputError(path.string() + ": missing layers line");

    MlpSpec spec;
    {
        std::string rest;
        std::getline(in, rest);
        std::istringstream ls(rest);
        int s;
        while (ls >> s) spec.layer_sizes.push_back(s);
    }
    spec.validate();

    MlpModel model;
    model.spec = spec;
    for (int l = 0; l < spec.layer_count(); ++l) {
        int idx = 0;
        std::size_t count = 0;
        in >> word >> idx >> count;
        if (!in || word != "layer" || idx != l || count != spec.layer_param_count(l))
            throw InputError(path.string() + ": malformed layer " + std::to_string(l));
        const auto in_size = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l)]);
        const auto out_size = static_cast<std::size_t>(spec.layer_sizes[static_cast<std::size_t>(l) + 1]);
        Matrix w(out_size, in_size);
        for (double& v : w.data())
            if (!(in >> v)) throw InputError(path.string() + ": truncated layer " + std::to_string(l));
        std::vector<double> b(out_size);
        for (double& v : b)
            if (!(in >> v)) throw InputError(path.string() + ": truncated layer " + std::to_string(l));
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    return model;
}

}  // namespace mctsga
