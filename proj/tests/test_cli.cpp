#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

CmdResult run_cli(const std::string& args) {
    const auto out_path = testutil::temp_file("cli_stdout.txt");
    const auto err_path = testutil::temp_file("cli_stderr.txt");
    const std::string cmd = std::string(MCTSGA_CLI_PATH) + " " + args + " > " + out_path.string() +
                            " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string slurp_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// a configuration small enough for fast CLI round trips
fs::path tiny_config(const std::string& name, const std::string& extra = "") {
    const std::string text = "dataset.path = " + (testutil::data_dir() / "diabetes.csv").string() +
                             "\n"
                             "train.epochs = 3\n"
                             "ga.population_size = 6\n"
                             "ga.tournament_k = 2\n"
                             "ga.generations = 3\n"
                             "mcts.iteration_budget = 3\n"
                             "mcts.branching_factor = 2\n"
                             "mcts.rollout_generations = 2\n"
                             "mcts.es_mu = 2\n"
                             "mcts.es_lambda = 3\n"
                             "run.seed = 11\n" +
                             extra;
    return testutil::write_temp(name, text);
}

json strip_volatile(json j) {
    // wall-clock fields plus the worker count and output directory, which are
    // part of the test setup rather than the run's substance
    for (auto& [name, entry] : j.at("approaches").items()) {
        (void)name;
        entry.erase("wall_seconds");
        if (entry.contains("mcts")) entry.at("mcts").erase("wall_seconds");
    }
    j.at("config").erase("run.workers");
    j.at("config").erase("run.out_dir");
    return j;
}

}  // namespace

TEST_CASE("prep writes balanced, reproducible splits", "[cli]") {
    const auto out1 = testutil::temp_file("prep1");
    const auto out2 = testutil::temp_file("prep2");
    const std::string csv = (testutil::data_dir() / "diabetes.csv").string();

    const auto r1 = run_cli("prep --csv " + csv + " --seed 5 --out " + out1.string());
    INFO(r1.err);
    REQUIRE(r1.exit_code == 0);
    REQUIRE(fs::exists(out1 / "train.csv"));
    REQUIRE(fs::exists(out1 / "test.csv"));
    REQUIRE(fs::exists(out1 / "scaler.csv"));

    // class balance carried through both splits
    long pos = 0, neg = 0;
    for (const char* f : {"train.csv", "test.csv"}) {
        std::ifstream in(out1 / f);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            (line.back() == '1' ? pos : neg)++;
        }
    }
    REQUIRE(pos == 268);
    REQUIRE(neg == 268);

    const auto r2 = run_cli("prep --csv " + csv + " --seed 5 --out " + out2.string());
    REQUIRE(r2.exit_code == 0);
    for (const char* f : {"train.csv", "test.csv", "scaler.csv"})
        REQUIRE(slurp_file(out1 / f) == slurp_file(out2 / f));
}

TEST_CASE("prep surfaces input errors on stderr with exit code 2", "[cli]") {
    const auto r = run_cli("prep --csv /definitely/not/there.csv --out " +
                           testutil::temp_file("prep_missing").string());
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err.find("cannot open dataset file") != std::string::npos);
}

TEST_CASE("run with a single approach writes exactly one entry", "[cli]") {
    const auto cfg = tiny_config("single.cfg");
    const auto out = testutil::temp_file("run_single");
    const auto r = run_cli("run --config " + cfg.string() + " --approach nn-adam --out " +
                           out.string());
    INFO(r.err);
    REQUIRE(r.exit_code == 0);

    const json report = json::parse(slurp_file(out / "report.json"));
    REQUIRE(report.at("approaches").size() == 1);
    REQUIRE(report.at("approaches").contains("nn-adam"));
    REQUIRE(report.at("approaches_run") == json::array({"nn-adam"}));
    REQUIRE(report.at("config").at("run.approach") == "nn-adam");
    REQUIRE(fs::exists(out / "roc_nn-adam.csv"));
    REQUIRE(fs::exists(out / "history_nn-adam.csv"));
    REQUIRE(fs::exists(out / "model_nn-adam.txt"));
    REQUIRE_FALSE(fs::exists(out / "genome_nn-adam.txt"));

    const double acc = report.at("approaches").at("nn-adam").at("accuracy").get<double>();
    REQUIRE(acc >= 0.0);
    REQUIRE(acc <= 1.0);
}

TEST_CASE("compare runs are identical modulo timing across reruns and workers", "[cli]") {
    const auto cfg = tiny_config("compare.cfg");
    const auto out1 = testutil::temp_file("cmp1");
    const auto out2 = testutil::temp_file("cmp2");
    const auto out3 = testutil::temp_file("cmp3");

    REQUIRE(run_cli("run --config " + cfg.string() + " --out " + out1.string() + " --workers 1")
                .exit_code == 0);
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " + out2.string() + " --workers 1")
                .exit_code == 0);
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " + out3.string() + " --workers 4")
                .exit_code == 0);

    const json a = json::parse(slurp_file(out1 / "report.json"));
    const json b = json::parse(slurp_file(out2 / "report.json"));
    const json c = json::parse(slurp_file(out3 / "report.json"));
    REQUIRE(a.at("approaches").size() == 4);
    REQUIRE(strip_volatile(a) == strip_volatile(b));
    REQUIRE(strip_volatile(a) == strip_volatile(c));

    // non-volatile artifacts are byte-identical
    for (const char* f : {"roc_ga.csv", "history_ga.csv", "genome_ga.txt", "genome_mcts-ga.txt",
                          "history_mcts-ga.csv", "model_nn-sgd.txt"})
        REQUIRE(slurp_file(out1 / f) == slurp_file(out2 / f));
}

TEST_CASE("report renders a summary table", "[cli]") {
    const auto cfg = tiny_config("report.cfg");
    const auto out = testutil::temp_file("run_for_report");
    REQUIRE(run_cli("run --config " + cfg.string() + " --approach ga --out " + out.string())
                .exit_code == 0);
    const auto r = run_cli("report " + (out / "report.json").string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("accuracy") != std::string::npos);
    REQUIRE(r.out.find("ga") != std::string::npos);

    REQUIRE(run_cli("report /nonexistent/report.json").exit_code == 2);
}

TEST_CASE("bad configs and approaches exit with code 2", "[cli]") {
    const auto bad_key = testutil::write_temp("bad_key.cfg", "mcts.bogus = 1\n");
    REQUIRE(run_cli("run --config " + bad_key.string()).exit_code == 2);

    const auto cfg = tiny_config("bad_approach.cfg");
    const auto r = run_cli("run --config " + cfg.string() + " --approach simulated-annealing --out " +
                           testutil::temp_file("bad_approach").string());
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err.find("unknown approach") != std::string::npos);

    REQUIRE(run_cli("bogus-subcommand").exit_code == 2);
}

TEST_CASE("failed runs leave no partial artifacts", "[cli]") {
    // dataset path valid at config load, deleted before the run reads it:
    // simplest failure injection is a nonexistent dataset
    const auto cfg = testutil::write_temp("missing_data.cfg",
                                          "dataset.path = /nope/missing.csv\nrun.seed = 1\n");
    const auto out = testutil::temp_file("failed_run");
    const auto r = run_cli("run --config " + cfg.string() + " --out " + out.string());
    REQUIRE(r.exit_code == 2);
    REQUIRE_FALSE(fs::exists(out / "report.json"));
}
