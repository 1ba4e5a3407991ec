// Benchmark CLI: dataset prep, the four approaches (nn-sgd, nn-adam, ga,
// mcts-ga), and report rendering. Exit codes: 0 ok, 2 input error, 3 numeric
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mctsga/bench.hpp"
#include "mctsga/common.hpp"
#include "mctsga/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
    std::string config_path;
    std::string csv_path;
    std::string report_path;
    std::string out_dir;
    std::string approach;
    double test_fraction = -1.0;
    std::int64_t seed = -1;
    int workers = -1;
    bool has_seed = false;
};

mctsga::RunConfig load_run_config(const CliOptions& opt) {
    mctsga::KeyValueConfig kv;
    if (!opt.config_path.empty()) kv = mctsga::KeyValueConfig::from_file(opt.config_path);
    mctsga::RunConfig cfg = mctsga::RunConfig::load(kv);
    if (opt.has_seed) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (!opt.approach.empty()) cfg.approach = opt.approach;
    if (opt.workers >= 0) cfg.workers = opt.workers;
    if (!opt.csv_path.empty()) cfg.dataset_path = opt.csv_path;
    if (opt.test_fraction > 0.0) cfg.test_fraction = opt.test_fraction;
    return cfg;
}

// Removes everything this run managed to write before it failed.
class ArtifactTracker {
public:
    fs::path track(fs::path p) {
        written_.push_back(p);
        return p;
    }
    void discard_all() {
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }
    void commit() { written_.clear(); }
    ~ArtifactTracker() { discard_all(); }

private:
    std::vector<fs::path> written_;
};

int cmd_prep(const CliOptions& opt) {
    const mctsga::RunConfig cfg = load_run_config(opt);
    const auto data = mctsga::bench::prepare(cfg);

    fs::create_directories(cfg.out_dir);
    ArtifactTracker tracker;
    mctsga::bench::write_labeled_csv(tracker.track(fs::path(cfg.out_dir) / "train.csv"), data.train,
                                     data.feature_names);
    mctsga::bench::write_labeled_csv(tracker.track(fs::path(cfg.out_dir) / "test.csv"), data.test,
                                     data.feature_names);
    mctsga::bench::write_scaler_csv(tracker.track(fs::path(cfg.out_dir) / "scaler.csv"),
                                    data.train.scaler, data.feature_names);
    tracker.commit();

    std::cout << "prepared " << data.train.size() << " train rows and " << data.test.size()
              << " test rows in " << cfg.out_dir << "\n";
    return 0;
}

void print_summary(const json& report, std::ostream& os) {
    os << "approach    accuracy   recall     auc        tp   fp   fn   tn   wall_s\n";
    for (const auto& name : report.at("approaches_run")) {
        const auto& e = report.at("approaches").at(name.get<std::string>());
        const auto& cm = e.at("confusion");
        char line[160];
        std::snprintf(line, sizeof(line), "%-11s %-10.4f %-10.4f %-10.4f %-4ld %-4ld %-4ld %-4ld %.2f",
                      name.get<std::string>().c_str(), e.at("accuracy").get<double>(),
                      e.at("recall").get<double>(), e.at("auc").get<double>(),
                      cm.at("tp").get<long>(), cm.at("fp").get<long>(), cm.at("fn").get<long>(),
                      cm.at("tn").get<long>(), e.at("wall_seconds").get<double>());
        os << line << "\n";
    }
}

int cmd_run(const CliOptions& opt) {
    const mctsga::RunConfig cfg = load_run_config(opt);
    const auto names = mctsga::bench::approaches_for(cfg.approach);
    const auto data = mctsga::bench::prepare(cfg);

    fs::create_directories(cfg.out_dir);
    ArtifactTracker tracker;
    const fs::path out(cfg.out_dir);

    std::vector<mctsga::bench::ApproachResult> results;
    for (const auto& name : names) {
        std::cout << "running " << name << " ...\n";
        auto r = mctsga::bench::run_approach(name, cfg, data);

        mctsga::bench::write_roc_csv(tracker.track(out / ("roc_" + name + ".csv")), r.eval.roc);
        if (name == "nn-sgd" || name == "nn-adam") {
            mctsga::bench::write_nn_history_csv(tracker.track(out / ("history_" + name + ".csv")),
                                                r.loss_history);
            mctsga::save_model(*r.model, tracker.track(out / ("model_" + name + ".txt")));
        } else if (name == "ga") {
            mctsga::bench::write_ga_history_csv(tracker.track(out / ("history_" + name + ".csv")),
                                                r.ga_history);
            mctsga::save_genome(*r.genome, tracker.track(out / ("genome_" + name + ".txt")));
        } else {
            mctsga::bench::write_mcts_history_csv(tracker.track(out / ("history_" + name + ".csv")),
                                                  r.mcts_stats.incumbent_trace);
            mctsga::save_genome(*r.genome, tracker.track(out / ("genome_" + name + ".txt")));
        }
        results.push_back(std::move(r));
    }

    const json report = mctsga::bench::build_report(cfg, data, results);
    {
        std::ofstream rf(tracker.track(out / "report.json"), std::ios::binary);
        if (!rf) throw mctsga::InputError("cannot write report.json in " + cfg.out_dir);
        rf << report.dump(2) << "\n";
    }
    tracker.commit();

    print_summary(report, std::cout);
    std::cout << "report written to " << (out / "report.json").string() << "\n";
    return 0;
}

int cmd_report(const CliOptions& opt) {
    std::ifstream in(opt.report_path, std::ios::binary);
    if (!in) throw mctsga::InputError("cannot open report file: " + opt.report_path);
    json report;
    try {
        in >> report;
        print_summary(report, std::cout);
    } catch (const json::exception& e) {
        throw mctsga::InputError("malformed report " + opt.report_path + ": " + e.what());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MCTS-guided genetic optimization of neural network weights"};
    app.require_subcommand(1);

    CliOptions opt;

    auto* prep = app.add_subcommand("prep", "balance, scale and split a dataset CSV");
    prep->add_option("--csv", opt.csv_path, "input CSV (8 features + trailing 0/1 label)")->required();
    prep->add_option("--config", opt.config_path, "config file with dotted keys");
    prep->add_option("--seed", opt.seed, "global seed")->each([&](const std::string&) { opt.has_seed = true; });
    prep->add_option("--out", opt.out_dir, "output directory");
    prep->add_option("--test-fraction", opt.test_fraction, "held-out fraction in (0,1)");

    auto* run = app.add_subcommand("run", "run one approach or the full comparison");
    run->add_option("--config", opt.config_path, "config file with dotted keys");
    run->add_option("--seed", opt.seed, "global seed")->each([&](const std::string&) { opt.has_seed = true; });
    run->add_option("--out", opt.out_dir, "output directory");
    run->add_option("--approach", opt.approach, "nn-sgd | nn-adam | ga | mcts-ga | compare");
    run->add_option("--workers", opt.workers, "fitness-evaluation workers (0 = all cores, 1 = serial)");

    auto* rep = app.add_subcommand("report", "render a saved report.json as a summary table");
    rep->add_option("report", opt.report_path, "path to report.json")->required();

    try {
        app.parse(argc, argv);
        if (prep->parsed()) return cmd_prep(opt);
        if (run->parsed()) return cmd_run(opt);
        return cmd_report(opt);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const mctsga::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mctsga::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
