#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "mctsga/common.hpp"
#include "mctsga/genetic.hpp"
#include "mctsga/genome.hpp"
#include "mctsga/metrics.hpp"
#include "mctsga/rng.hpp"

namespace mctsga {

enum class UctMode {
    mean_exploit,       // child.q / child.n exploitation (standard UCB1 shape)
    literal_cumulative  // cumulative child.q exploitation
};

struct MctsParams {
    int tree_depth_max = 20;
    int branching_factor = 5;
    int rollout_generations = 10;
    double exploration_c = 2.0;
    UctMode uct_mode = UctMode::mean_exploit;
    int es_mu = 5;
    int es_lambda = 10;
    double es_sigma = 0.1;
    int iteration_budget = 200;
    std::uint64_t seed = 0;

    void validate() const {
        if (tree_depth_max < 1) throw InputError("MctsParams: tree_depth_max must be >= 1");
        if (branching_factor < 1) throw InputError("MctsParams: branching_factor must be >= 1");
        if (rollout_generations < 1) throw InputError("MctsParams: rollout_generations must be >= 1");
        if (!(exploration_c > 0.0)) throw InputError("MctsParams: exploration_c must be > 0");
        if (es_mu < 1) throw InputError("MctsParams: es_mu must be >= 1");
        if (es_lambda < 1) throw InputError("MctsParams: es_lambda must be >= 1");
        if (es_sigma < 0.0) throw InputError("MctsParams: es_sigma must be >= 0");
        if (iteration_budget < 1) throw InputError("MctsParams: iteration_budget must be >= 1");
    }
};

// Tree node: a GA population as the state, cumulative reward q and visit
// count n for UCT. rollouts_here counts simulations run from this node
// itself, which makes visit conservation checkable from the outside.
struct SearchNode {
    Population population;
    double q = 0.0;
    int n = 0;
    int depth = 0;
    SearchNode* parent = nullptr;
    std::vector<std::unique_ptr<SearchNode>> children;
    int id = 0;
    int rollouts_here = 0;

    std::size_t best_member_index() const { return detail::best_member_index(population); }
    double best_fitness() const { return *population.members[best_member_index()].fitness; }
};

// Nodes of a complete tree with branching factor b and height h:
// (b^h - 1) / (b - 1), evaluated in exact integer arithmetic via the Horner
// recurrence so overflow detection lands exactly on the result width.
inline std::uint64_t tree_size(std::uint64_t b, std::uint64_t h) {
    if (b < 2) throw InputError("tree_size: branching factor must be >= 2");
    if (h < 1) throw InputError("tree_size: height must be >= 1");
    std::uint64_t nodes = 0;
    for (std::uint64_t level = 0; level < h; ++level) {
        if (__builtin_mul_overflow(nodes, b, &nodes) || __builtin_add_overflow(nodes, 1ull, &nodes))
            throw NumericError("tree_size: result exceeds 64-bit integer range");
    }
    return nodes;
}

// UCT = exploitation + sqrt(c * ln(parent.n) / (child.n + 1)).
// Unvisited children score +infinity so every child is simulated once.
inline double uct_score(const SearchNode& child, const SearchNode& parent,
                        const MctsParams& params) {
    if (child.n == 0) return std::numeric_limits<double>::infinity();
    if (parent.n < 1) throw InputError("uct_score: parent has no visits");
    const double explore = std::sqrt(params.exploration_c * std::log(static_cast<double>(parent.n)) /
                                     (static_cast<double>(child.n) + 1.0));
    const double exploit = params.uct_mode == UctMode::mean_exploit
                               ? child.q / static_cast<double>(child.n)
                               : child.q;
    return exploit + explore;
}

// Root-first descent by argmax uct_score (ties to the lowest child index)
// until a childless node or the depth cap.
inline std::vector<SearchNode*> select_path(SearchNode& root, const MctsParams& params) {
    std::vector<SearchNode*> path{&root};
    SearchNode* cur = &root;
    while (!cur->children.empty() && cur->depth < params.tree_depth_max) {
        SearchNode* best = cur->children[0].get();
        double best_score = uct_score(*best, *cur, params);
        for (std::size_t i = 1; i < cur->children.size(); ++i) {
            const double s = uct_score(*cur->children[i], *cur, params);
            if (s > best_score) {
                best_score = s;
                best = cur->children[i].get();
            }
        }
        cur = best;
        path.push_back(cur);
    }
    return path;
}

// Expands a leaf with branching_factor children, each the result of one
// independent genetic-action generation (selection, crossover, mutation)
// on the leaf's population. Returns the created nodes; empty at the cap.
inline std::vector<SearchNode*> expand(SearchNode& leaf, const MlpSpec& spec,
                                       const LabeledDataset& train, const GaParams& ga,
                                       const MctsParams& params, int& next_node_id,
                                       int workers = 1) {
    if (leaf.depth >= params.tree_depth_max) return {};
    std::vector<SearchNode*> created;
    created.reserve(static_cast<std::size_t>(params.branching_factor));
    for (int i = 0; i < params.branching_factor; ++i) {
        SplitMix64 rng(derive_seed(params.seed, "expand", static_cast<std::uint64_t>(leaf.id),
                                   static_cast<std::uint64_t>(i)));
        auto child = std::make_unique<SearchNode>();
        child->population = breed(leaf.population, ga, rng, ga.population_size);
        child->depth = leaf.depth + 1;
        child->parent = &leaf;
        child->id = next_node_id++;
        evaluate_population(child->population, spec, train, workers);
        created.push_back(child.get());
        leaf.children.push_back(std::move(child));
    }
    return created;
}

// Evolutionary rollout ("ageing"): the node's best individual seeds a
// (mu+lambda)-ES run with Gaussian perturbation; the reward is the best
// fitness seen. Plus-selection keeps the seed alive, so the reward never
// drops below the node's pre-rollout best. If the ES finds a strictly
// better individual, it replaces the node's best member.
inline double rollout(SearchNode& node, const MlpSpec& spec, const LabeledDataset& train,
                      const MctsParams& params, SplitMix64& rng, int workers = 1) {
    const std::size_t seed_index = node.best_member_index();
    const Genome seed_individual = node.population.members[seed_index];
    const double pre_best = *seed_individual.fitness;

    std::vector<Genome> parents(static_cast<std::size_t>(params.es_mu), seed_individual);
    Genome best_genome = seed_individual;
    double best_fit = pre_best;

    for (int gen = 0; gen < params.rollout_generations; ++gen) {
        std::vector<Genome> offspring;
        offspring.reserve(static_cast<std::size_t>(params.es_lambda));
        for (int i = 0; i < params.es_lambda; ++i) {
            const auto pi = static_cast<std::size_t>(rng.uniform_int(0, params.es_mu - 1));
            Genome child = parents[pi];
            child.clear_evaluation();
            for (auto& seg : child.segments)
                for (double& v : seg.values) v += rng.normal(0.0, params.es_sigma);
            offspring.push_back(std::move(child));
        }
        parallel_for(offspring.size(), workers,
                     [&](std::size_t i) { evaluate_fitness(offspring[i], spec, train); });

        for (const auto& o : offspring) {
            if (*o.fitness > best_fit) {
                best_fit = *o.fitness;
                best_genome = o;
            }
        }

        // survivors: best mu of parents + offspring; parents listed first so
        // ties keep the elders (stable, deterministic)
        std::vector<Genome> pool = std::move(parents);
        pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (*pool[a].fitness != *pool[b].fitness) return *pool[a].fitness > *pool[b].fitness;
            return pool[a].neg_mean_bce.value_or(0.0) > pool[b].neg_mean_bce.value_or(0.0);
        });
        parents.clear();
        parents.reserve(static_cast<std::size_t>(params.es_mu));
        for (int i = 0; i < params.es_mu; ++i) parents.push_back(std::move(pool[order[static_cast<std::size_t>(i)]]));
    }

    if (best_fit > pre_best) node.population.members[seed_index] = best_genome;
    node.rollouts_here += 1;
    return best_fit;
}

// Adds one visit and the reward to every node on a root-first path.
inline void backpropagate(std::span<SearchNode* const> path, double reward) {
    for (SearchNode* node : path) {
        node->n += 1;
        node->q += reward;
    }
}

struct MctsStats {
    int iterations = 0;
    int nodes_created = 0;
    int max_depth_reached = 0;
    bool depth_cap_hit = false;
    std::vector<double> incumbent_trace;  // incumbent fitness after each iteration
    double wall_seconds = 0.0;
};

struct MctsResult {
    Genome best;
    double best_fitness = 0.0;
    MctsStats stats;
    std::unique_ptr<SearchNode> root;  // kept for inspection and accounting checks
    metrics::Evaluation test_eval;
};

// The MCTS-GA search loop. Per iteration: UCT selection to a leaf; if the
// leaf is visited (the evaluated root counts) and below the cap, expand it
// via the genetic action and hand a uniformly random new child to the
// rollout; otherwise roll out the leaf itself; backpropagate the reward.
// Runs until the iteration budget is exhausted; the depth cap bounds the
// tree rather than ending the run. The answer is the incumbent: the best
// genome evaluated anywhere during the search.
inline MctsResult run_mcts_ga(const Genome& seed_genome, const MlpSpec& spec,
                              const LabeledDataset& train, const LabeledDataset& test,
                              const GaParams& ga, const MctsParams& params,
                              double init_perturb_range = kDefaultPerturbRange, int workers = 1) {
    params.validate();
    ga.validate();
    const auto t0 = std::chrono::steady_clock::now();

    MctsResult result;
    result.root = std::make_unique<SearchNode>();
    SearchNode* root = result.root.get();
    root->population = init_population(seed_genome, ga.population_size, init_perturb_range,
                                       derive_seed(params.seed, "mcts-init"));
    evaluate_population(root->population, spec, train, workers);

    int next_node_id = 1;
    result.stats.nodes_created = 1;

    const auto consider = [&](const Population& pop) {
        const std::size_t bi = detail::best_member_index(pop);
        if (!result.best.fitness || *pop.members[bi].fitness > result.best_fitness) {
            result.best = pop.members[bi];
            result.best_fitness = *pop.members[bi].fitness;
        }
    };
    consider(root->population);

    SplitMix64 pick_rng(derive_seed(params.seed, "mcts-pick"));

    for (int iter = 1; iter <= params.iteration_budget; ++iter) {
        auto path = select_path(*root, params);
        SearchNode* leaf = path.back();
        SearchNode* sim = leaf;

        // The root's population is evaluated at construction, so it counts
        // as visited for the expansion rule.
        if (leaf->depth < params.tree_depth_max && (leaf->n > 0 || leaf == root)) {
            const auto children = expand(*leaf, spec, train, ga, params, next_node_id, workers);
            result.stats.nodes_created += static_cast<int>(children.size());
            for (SearchNode* c : children) {
                result.stats.max_depth_reached = std::max(result.stats.max_depth_reached, c->depth);
                if (c->depth >= params.tree_depth_max) result.stats.depth_cap_hit = true;
                consider(c->population);
            }
            if (!children.empty()) {
                const auto pick = static_cast<std::size_t>(
                    pick_rng.uniform_int(0, static_cast<std::int64_t>(children.size()) - 1));
                sim = children[pick];
                path.push_back(sim);
            }
        }

        SplitMix64 roll_rng(derive_seed(params.seed, "rollout", static_cast<std::uint64_t>(sim->id),
                                        static_cast<std::uint64_t>(sim->rollouts_here)));
        const double reward = rollout(*sim, spec, train, params, roll_rng, workers);
        consider(sim->population);
        backpropagate(path, reward);

        result.stats.incumbent_trace.push_back(result.best_fitness);
        result.stats.iterations = iter;
    }

    result.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.test_eval = evaluate_genome_on(result.best, spec, test);
    return result;
}

}  // namespace mctsga
