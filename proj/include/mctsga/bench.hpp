#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mctsga/common.hpp"
#include "mctsga/config.hpp"
#include "mctsga/dataset.hpp"
#include "mctsga/genetic.hpp"
#include "mctsga/genome.hpp"
#include "mctsga/mcts.hpp"
#include "mctsga/metrics.hpp"
#include "mctsga/network.hpp"

// Wiring for the benchmark runs: dataset preparation, the four approaches,
// and the JSON/CSV artifacts. The CLI and the acceptance suite both sit on
// top of this so they cannot drift apart.

namespace mctsga::bench {

inline const std::vector<std::string> kApproaches = {"nn-sgd", "nn-adam", "ga", "mcts-ga"};

struct PreparedData {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::string> feature_names;
};

// load -> balance (undersample) -> min-max scale -> stratified split, with
// per-stage seeds derived from the global seed.
inline PreparedData prepare(const RunConfig& cfg) {
    const RawDataset raw = load_csv(cfg.dataset_path);
    const RawDataset balanced = balance_undersample(raw, derive_seed(cfg.seed, "balance"));
    const LabeledDataset scaled = minmax_fit_transform(balanced);
    auto [train, test] = split(scaled, cfg.test_fraction, derive_seed(cfg.seed, "split"));
    return {std::move(train), std::move(test), balanced.feature_names};
}

// What the NN baselines train from: a freshly initialized model under the
// derived seed.
inline MlpModel initial_model(const RunConfig& cfg) {
    MlpSpec spec = cfg.spec();
    spec.validate();
    return init_model(spec, derive_seed(cfg.seed, "init-model"));
}

inline TrainConfig train_config_for(const RunConfig& cfg, const std::string& approach) {
    TrainConfig tc = cfg.train;
    tc.optimizer =
        approach == "nn-sgd" ? TrainConfig::Optimizer::sgd : TrainConfig::Optimizer::adam;
    tc.seed = derive_seed(cfg.seed, approach);
    return tc;
}

// The model whose weights seed the GA/MCTS populations. Default is the
// Adam-trained network (identical to what the nn-adam baseline produces,
// same derived seed); genome.seed_source=untrained starts from the fresh
// initialization instead, and genome.seed_model loads a model file.
inline MlpModel search_seed_model(const RunConfig& cfg, const PreparedData& data) {
    if (!cfg.seed_model_path.empty()) {
        MlpModel m = load_model(cfg.seed_model_path);
        if (m.spec != cfg.spec())
            throw InputError("seed model " + cfg.seed_model_path + " does not match network.layers");
        return m;
    }
    MlpModel m = initial_model(cfg);
    if (cfg.seed_source == "trained")
        m = train(std::move(m), data.train, train_config_for(cfg, "nn-adam")).model;
    return m;
}

struct ApproachResult {
    std::string name;
    metrics::Evaluation eval;
    double wall_seconds = 0.0;
    double train_fitness = 0.0;                // ga / mcts-ga best training fitness
    std::vector<double> loss_history;          // nn-*
    std::vector<GenerationStats> ga_history;   // ga
    MctsStats mcts_stats;                      // mcts-ga
    std::optional<MlpModel> model;             // nn-*
    std::optional<Genome> genome;              // ga / mcts-ga
};

inline ApproachResult run_approach(const std::string& name, const RunConfig& cfg,
                                   const PreparedData& data) {
    const int workers = resolve_workers(cfg.workers);
    const MlpSpec spec = cfg.spec();

    ApproachResult result;
    result.name = name;
    const auto t0 = std::chrono::steady_clock::now();

    if (name == "nn-sgd" || name == "nn-adam") {
        TrainResult tr = train(initial_model(cfg), data.train, train_config_for(cfg, name));
        result.eval = metrics::evaluate_scores(scores(tr.model, data.test.features), data.test.labels);
        result.loss_history = std::move(tr.loss_history);
        result.model = std::move(tr.model);
    } else if (name == "ga") {
        GaParams gp = cfg.ga;
        gp.seed = derive_seed(cfg.seed, "ga");
        GaResult r = run_ga(encode(search_seed_model(cfg, data)), spec, data.train, data.test, gp,
                            cfg.perturb_range, workers);
        result.eval = std::move(r.test_eval);
        result.train_fitness = r.best_fitness;
        result.ga_history = std::move(r.history);
        result.genome = std::move(r.best);
    } else if (name == "mcts-ga") {
        GaParams gp = cfg.ga;
        MctsParams mp = cfg.mcts;
        gp.seed = mp.seed = derive_seed(cfg.seed, "mcts-ga");
        MctsResult r = run_mcts_ga(encode(search_seed_model(cfg, data)), spec, data.train,
                                   data.test, gp, mp, cfg.perturb_range, workers);
        result.eval = std::move(r.test_eval);
        result.train_fitness = r.best_fitness;
        result.mcts_stats = std::move(r.stats);
        result.genome = std::move(r.best);
    } else {
        throw InputError("unknown approach: " + name +
                         " (expected nn-sgd, nn-adam, ga, mcts-ga or compare)");
    }

    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline std::vector<std::string> approaches_for(const std::string& selector) {
    if (selector == "compare") return kApproaches;
    return {selector};
}

inline nlohmann::json build_report(const RunConfig& cfg, const PreparedData& data,
                                   const std::vector<ApproachResult>& results) {
    nlohmann::json report;
    report["schema"] = "mctsga-report-1";
    report["config"] = cfg.resolved();

    nlohmann::json seeds;
    for (const std::string label : {"balance", "split", "init-model"})
        seeds[label] = derive_seed(cfg.seed, label);
    for (const auto& name : kApproaches) seeds[name] = derive_seed(cfg.seed, name);
    report["derived_seeds"] = seeds;

    const auto positives = [](const LabeledDataset& ds) {
        long p = 0;
        for (const int y : ds.labels) p += y;
        return p;
    };
    report["dataset"] = {{"train_rows", data.train.size()},
                         {"test_rows", data.test.size()},
                         {"train_positives", positives(data.train)},
                         {"test_positives", positives(data.test)}};

    nlohmann::json order = nlohmann::json::array();
    for (const auto& r : results) order.push_back(r.name);
    report["approaches_run"] = order;

    nlohmann::json entries;
    for (const auto& r : results) {
        nlohmann::json e;
        e["accuracy"] = r.eval.accuracy;
        e["recall"] = r.eval.recall;
        e["auc"] = r.eval.auc;
        e["confusion"] = {{"tp", r.eval.cm.tp}, {"fp", r.eval.cm.fp},
                          {"fn", r.eval.cm.fn}, {"tn", r.eval.cm.tn}};
        e["wall_seconds"] = r.wall_seconds;
        if (r.name == "nn-sgd" || r.name == "nn-adam") {
            e["final_train_loss"] = r.loss_history.back();
        } else {
            e["train_fitness"] = r.train_fitness;
        }
        if (r.name == "mcts-ga") {
            e["mcts"] = {{"iterations", r.mcts_stats.iterations},
                         {"nodes_created", r.mcts_stats.nodes_created},
                         {"max_depth_reached", r.mcts_stats.max_depth_reached},
                         {"depth_cap_hit", r.mcts_stats.depth_cap_hit},
                         {"wall_seconds", r.mcts_stats.wall_seconds},
                         {"incumbent_trace", r.mcts_stats.incumbent_trace}};
        }
        entries[r.name] = std::move(e);
    }
    report["approaches"] = std::move(entries);
    return report;
}

// ---- artifact writers ----

namespace detail_io {
inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // LF endings everywhere
    if (!out) throw InputError("cannot open output file: " + path.string());
    return out;
}
}  // namespace detail_io

inline void write_roc_csv(const std::filesystem::path& path,
                          std::span<const metrics::RocPoint> points) {
    auto out = detail_io::open_out(path);
    out << "fpr,tpr\n";
    for (const auto& p : points)
        out << detail::format_double(p.fpr) << ',' << detail::format_double(p.tpr) << '\n';
}

inline void write_nn_history_csv(const std::filesystem::path& path,
                                 std::span<const double> losses) {
    auto out = detail_io::open_out(path);
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        out << i << ',' << detail::format_double(losses[i]) << '\n';
}

inline void write_ga_history_csv(const std::filesystem::path& path,
                                 std::span<const GenerationStats> history) {
    auto out = detail_io::open_out(path);
    out << "generation,best_fitness,mean_fitness\n";
    for (const auto& g : history)
        out << g.generation << ',' << detail::format_double(g.best_fitness) << ','
            << detail::format_double(g.mean_fitness) << '\n';
}

inline void write_mcts_history_csv(const std::filesystem::path& path,
                                   std::span<const double> incumbent_trace) {
    auto out = detail_io::open_out(path);
    out << "iteration,incumbent_fitness\n";
    for (std::size_t i = 0; i < incumbent_trace.size(); ++i)
        out << i + 1 << ',' << detail::format_double(incumbent_trace[i]) << '\n';
}

inline void write_labeled_csv(const std::filesystem::path& path, const LabeledDataset& ds,
                              std::span<const std::string> feature_names) {
    auto out = detail_io::open_out(path);
    for (std::size_t j = 0; j < feature_names.size(); ++j) out << feature_names[j] << ',';
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto row = ds.features.row(i);
        for (const double v : row) out << detail::format_double(v) << ',';
        out << ds.labels[i] << '\n';
    }
}

inline void write_scaler_csv(const std::filesystem::path& path, const ScalerParams& scaler,
                             std::span<const std::string> feature_names) {
    auto out = detail_io::open_out(path);
    out << "feature,min,max\n";
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        out << feature_names[j] << ',' << detail::format_double(scaler.min[j]) << ','
            << detail::format_double(scaler.max[j]) << '\n';
}

}  // namespace mctsga::bench
