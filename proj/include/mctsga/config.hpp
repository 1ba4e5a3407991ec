#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mctsga/common.hpp"
#include "mctsga/genetic.hpp"
#include "mctsga/mcts.hpp"
#include "mctsga/network.hpp"

namespace mctsga {

// Flat key = value text config with dotted keys and '#' comments.
class KeyValueConfig {
public:
    static KeyValueConfig from_string(std::string_view text, const std::string& origin = "<string>") {
        KeyValueConfig cfg;
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t nl = text.find('\n', start);
            std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
            start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;

            line = detail::trim(line);
            if (line.empty() || line.front() == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw InputError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key(detail::trim(line.substr(0, eq)));
            const std::string value(detail::trim(line.substr(eq + 1)));
            if (key.empty())
                throw InputError(origin + ":" + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot open config file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path.string());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        double v;
        if (!detail::parse_double(it->second, v))
            throw InputError("config key " + key + ": expected a number, got '" + it->second + "'");
        return v;
    }

    long get_int(const std::string& key, long fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string_view s = detail::trim(it->second);
        long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw InputError("config key " + key + ": expected an integer, got '" + it->second + "'");
        return v;
    }

    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string_view s = detail::trim(it->second);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw InputError("config key " + key + ": expected an unsigned integer, got '" + it->second + "'");
        return v;
    }

private:
    std::map<std::string, std::string> values_;
};

// Everything one benchmark run needs, with every hyperparameter surfaced as
// a config key so fidelity experiments never require code changes.
struct RunConfig {
    std::string dataset_path = "data/diabetes.csv";
    double test_fraction = 0.25;
    std::vector<int> network_layers = {8, 16, 8, 4, 1};
    TrainConfig train;  // optimizer is pinned per approach at run time
    GaParams ga;
    MctsParams mcts;
    double perturb_range = kDefaultPerturbRange;
    std::string seed_source = "trained";  // trained | untrained: where GA/MCTS start
    std::string seed_model_path;          // optional model file; overrides seed_source
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    std::string approach = "compare";
    int workers = 0;  // 0 = machine parallelism

    MlpSpec spec() const { return MlpSpec{network_layers}; }

    static const std::vector<std::string>& known_keys() {
        static const std::vector<std::string> keys = {
            "dataset.path",         "dataset.test_fraction",
            "network.layers",       "train.learning_rate",
            "train.epochs",         "train.batch_size",
            "train.adam_beta1",     "train.adam_beta2",
            "train.adam_epsilon",   "genome.perturb_range",
            "genome.seed_source",   "genome.seed_model",
            "ga.population_size",
            "ga.tournament_k",      "ga.crossover_rate",
            "ga.mutation_rate",     "ga.generations",
            "ga.mutation_mode",     "mcts.tree_depth_max",
            "mcts.branching_factor", "mcts.rollout_generations",
            "mcts.exploration_c",   "mcts.uct_mode",
            "mcts.es_mu",           "mcts.es_lambda",
            "mcts.es_sigma",        "mcts.iteration_budget",
            "run.seed",             "run.out_dir",
            "run.approach",         "run.workers",
        };
        return keys;
    }

    static RunConfig load(const KeyValueConfig& kv) {
        for (const auto& [key, value] : kv.values()) {
            const auto& known = known_keys();
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw InputError("unknown config key: " + key);
        }

        RunConfig c;
        c.dataset_path = kv.get_string("dataset.path", c.dataset_path);
        c.test_fraction = kv.get_double("dataset.test_fraction", c.test_fraction);

        if (kv.has("network.layers")) {
            c.network_layers.clear();
            std::istringstream ls(kv.get_string("network.layers", ""));
            std::string tok;
            while (ls >> tok) {
                if (!tok.empty() && tok.back() == ',') tok.pop_back();
                try {
                    c.network_layers.push_back(std::stoi(tok));
                } catch (const std::exception&) {
                    throw InputError("config key network.layers: bad size '" + tok + "'");
                }
            }
            if (c.network_layers.empty()) throw InputError("config key network.layers: empty");
        }

        c.train.learning_rate = kv.get_double("train.learning_rate", c.train.learning_rate);
        c.train.epochs = static_cast<int>(kv.get_int("train.epochs", c.train.epochs));
        c.train.batch_size = static_cast<int>(kv.get_int("train.batch_size", c.train.batch_size));
        c.train.adam_beta1 = kv.get_double("train.adam_beta1", c.train.adam_beta1);
        c.train.adam_beta2 = kv.get_double("train.adam_beta2", c.train.adam_beta2);
        c.train.adam_epsilon = kv.get_double("train.adam_epsilon", c.train.adam_epsilon);

        c.perturb_range = kv.get_double("genome.perturb_range", c.perturb_range);
        c.seed_source = kv.get_string("genome.seed_source", c.seed_source);
        if (c.seed_source != "trained" && c.seed_source != "untrained")
            throw InputError("config key genome.seed_source: expected trained or untrained, got '" +
                             c.seed_source + "'");
        c.seed_model_path = kv.get_string("genome.seed_model", c.seed_model_path);

        c.ga.population_size = static_cast<int>(kv.get_int("ga.population_size", c.ga.population_size));
        c.ga.tournament_k = static_cast<int>(kv.get_int("ga.tournament_k", c.ga.tournament_k));
        c.ga.crossover_rate = kv.get_double("ga.crossover_rate", c.ga.crossover_rate);
        c.ga.mutation_rate = kv.get_double("ga.mutation_rate", c.ga.mutation_rate);
        c.ga.generations = static_cast<int>(kv.get_int("ga.generations", c.ga.generations));
        {
            const std::string mode = kv.get_string("ga.mutation_mode", "swap_between_individuals");
            if (mode == "swap_between_individuals")
                c.ga.mutation_mode = MutationMode::swap_between_individuals;
            else if (mode == "swap_within_individual")
                c.ga.mutation_mode = MutationMode::swap_within_individual;
            else
                throw InputError("config key ga.mutation_mode: unknown mode '" + mode + "'");
        }

        c.mcts.tree_depth_max = static_cast<int>(kv.get_int("mcts.tree_depth_max", c.mcts.tree_depth_max));
        c.mcts.branching_factor =
            static_cast<int>(kv.get_int("mcts.branching_factor", c.mcts.branching_factor));
        c.mcts.rollout_generations =
            static_cast<int>(kv.get_int("mcts.rollout_generations", c.mcts.rollout_generations));
        c.mcts.exploration_c = kv.get_double("mcts.exploration_c", c.mcts.exploration_c);
        {
            const std::string mode = kv.get_string("mcts.uct_mode", "mean_exploit");
            if (mode == "mean_exploit")
                c.mcts.uct_mode = UctMode::mean_exploit;
            else if (mode == "literal_cumulative")
                c.mcts.uct_mode = UctMode::literal_cumulative;
            else
                throw InputError("config key mcts.uct_mode: unknown mode '" + mode + "'");
        }
        c.mcts.es_mu = static_cast<int>(kv.get_int("mcts.es_mu", c.mcts.es_mu));
        c.mcts.es_lambda = static_cast<int>(kv.get_int("mcts.es_lambda", c.mcts.es_lambda));
        c.mcts.es_sigma = kv.get_double("mcts.es_sigma", c.mcts.es_sigma);
        c.mcts.iteration_budget =
            static_cast<int>(kv.get_int("mcts.iteration_budget", c.mcts.iteration_budget));

        c.seed = kv.get_uint64("run.seed", c.seed);
        c.out_dir = kv.get_string("run.out_dir", c.out_dir);
        c.approach = kv.get_string("run.approach", c.approach);
        c.workers = static_cast<int>(kv.get_int("run.workers", c.workers));
        return c;
    }

    // Every key with its final value, defaults included, for report provenance.
    std::map<std::string, std::string> resolved() const {
        std::map<std::string, std::string> out;
        out["dataset.path"] = dataset_path;
        out["dataset.test_fraction"] = detail::format_double(test_fraction);
        {
            std::string layers;
            for (const int s : network_layers) layers += (layers.empty() ? "" : " ") + std::to_string(s);
            out["network.layers"] = layers;
        }
        out["train.learning_rate"] = detail::format_double(train.learning_rate);
        out["train.epochs"] = std::to_string(train.epochs);
        out["train.batch_size"] = std::to_string(train.batch_size);
        out["train.adam_beta1"] = detail::format_double(train.adam_beta1);
        out["train.adam_beta2"] = detail::format_double(train.adam_beta2);
        out["train.adam_epsilon"] = detail::format_double(train.adam_epsilon);
        out["genome.perturb_range"] = detail::format_double(perturb_range);
        out["genome.seed_source"] = seed_source;
        out["genome.seed_model"] = seed_model_path;
        out["ga.population_size"] = std::to_string(ga.population_size);
        out["ga.tournament_k"] = std::to_string(ga.tournament_k);
        out["ga.crossover_rate"] = detail::format_double(ga.crossover_rate);
        out["ga.mutation_rate"] = detail::format_double(ga.mutation_rate);
        out["ga.generations"] = std::to_string(ga.generations);
        out["ga.mutation_mode"] = ga.mutation_mode == MutationMode::swap_between_individuals
                                      ? "swap_between_individuals"
                                      : "swap_within_individual";
        out["mcts.tree_depth_max"] = std::to_string(mcts.tree_depth_max);
        out["mcts.branching_factor"] = std::to_string(mcts.branching_factor);
        out["mcts.rollout_generations"] = std::to_string(mcts.rollout_generations);
        out["mcts.exploration_c"] = detail::format_double(mcts.exploration_c);
        out["mcts.uct_mode"] =
            mcts.uct_mode == UctMode::mean_exploit ? "mean_exploit" : "literal_cumulative";
        out["mcts.es_mu"] = std::to_string(mcts.es_mu);
        out["mcts.es_lambda"] = std::to_string(mcts.es_lambda);
        out["mcts.es_sigma"] = detail::format_double(mcts.es_sigma);
        out["mcts.iteration_budget"] = std::to_string(mcts.iteration_budget);
        out["run.seed"] = std::to_string(seed);
        out["run.out_dir"] = out_dir;
        out["run.approach"] = approach;
        out["run.workers"] = std::to_string(workers);
        return out;
    }
};

}  // namespace mctsga
