#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mctsga/common.hpp"
#include "mctsga/dataset.hpp"
#include "mctsga/genome.hpp"
#include "mctsga/metrics.hpp"
#include "mctsga/network.hpp"
#include "mctsga/rng.hpp"

namespace mctsga {

enum class MutationMode { swap_between_individuals, swap_within_individual };

struct GaParams {
    int population_size = 30;
    int tournament_k = 3;
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    int generations = 200;
    MutationMode mutation_mode = MutationMode::swap_between_individuals;
    std::uint64_t seed = 0;

    void validate() const {
        if (population_size < 2) throw InputError("GaParams: population_size must be >= 2");
        if (tournament_k < 2 || tournament_k > population_size)
            throw InputError("GaParams: tournament_k must be in [2, population_size]");
        if (crossover_rate < 0.0 || crossover_rate > 1.0)
            throw InputError("GaParams: crossover_rate must be in [0, 1]");
        if (mutation_rate < 0.0 || mutation_rate > 1.0)
            throw InputError("GaParams: mutation_rate must be in [0, 1]");
        if (generations < 1) throw InputError("GaParams: generations must be >= 1");
    }
};

// Fitness = classification accuracy on the training split (threshold 0.5,
// ties to class 1). Caches accuracy and the negative mean BCE tie-break on
// the genome; cached genomes are returned as-is.
inline double evaluate_fitness(Genome& g, const MlpSpec& spec, const LabeledDataset& train) {
    if (g.fitness) return *g.fitness;
    const MlpModel model = decode(g, spec);
    ForwardScratch scratch(spec);
    long correct = 0;
    double bce_sum = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const double p = detail::forward_into(model, train.features.row(i), scratch);
        const int pred = p >= 0.5 ? 1 : 0;
        if (pred == train.labels[i]) ++correct;
        bce_sum += bce_loss(p, train.labels[i]);
    }
    g.fitness = static_cast<double>(correct) / static_cast<double>(train.size());
    g.neg_mean_bce = -bce_sum / static_cast<double>(train.size());
    return *g.fitness;
}

// Evaluates all unevaluated members. Each evaluation is a pure function of
// (genome, data), so the worker count never changes the result.
inline void evaluate_population(Population& pop, const MlpSpec& spec, const LabeledDataset& train,
                                int workers = 1) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (!pop.members[i].fitness) todo.push_back(i);
    parallel_for(todo.size(), workers,
                 [&](std::size_t i) { evaluate_fitness(pop.members[todo[i]], spec, train); });
}

namespace detail {
// fitness, then neg_mean_bce, then lower index.
inline bool member_better(const Population& pop, std::size_t a, std::size_t b) {
    const auto& ga = pop.members[a];
    const auto& gb = pop.members[b];
    if (*ga.fitness != *gb.fitness) return *ga.fitness > *gb.fitness;
    const double ta = ga.neg_mean_bce.value_or(0.0);
    const double tb = gb.neg_mean_bce.value_or(0.0);
    if (ta != tb) return ta > tb;
    return a < b;
}

inline std::size_t best_member_index(const Population& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (member_better(pop, i, best)) best = i;
    return best;
}
}  // namespace detail

// k-way tournament: k distinct members sampled uniformly, best fitness wins,
// ties to the lowest member index.
inline const Genome& tournament_select(const Population& pop, int k, SplitMix64& rng) {
    if (k < 1 || static_cast<std::size_t>(k) > pop.size())
        throw InputError("tournament_select: k must be in [1, population size]");
    const auto sampled = rng.sample_indices(pop.size(), static_cast<std::size_t>(k));
    for (const std::size_t i : sampled)
        if (!pop.members[i].fitness)
            throw InputError("tournament_select: unevaluated member encountered");
    std::size_t best = sampled[0];
    for (std::size_t j = 1; j < sampled.size(); ++j)
        if (detail::member_better(pop, sampled[j], best)) best = sampled[j];
    return pop.members[best];
}

// 1-point crossover restricted to each layer segment: per segment an
// independent cut in [1, len-1]; length-1 segments are copied unchanged.
inline std::pair<Genome, Genome> crossover_layerwise(const Genome& a, const Genome& b,
                                                     SplitMix64& rng) {
    if (!a.same_structure(b)) throw InputError("crossover_layerwise: genome structure mismatch");
    Genome c1, c2;
    c1.segments.reserve(a.segments.size());
    c2.segments.reserve(a.segments.size());
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
        const auto& sa = a.segments[s];
        const auto& sb = b.segments[s];
        GenomeSegment o1{sa.label, sa.values};
        GenomeSegment o2{sb.label, sb.values};
        const std::size_t len = sa.values.size();
        if (len >= 2) {
            const auto cut = static_cast<std::size_t>(
                rng.uniform_int(1, static_cast<std::int64_t>(len) - 1));
            for (std::size_t i = cut; i < len; ++i) {
                o1.values[i] = sb.values[i];
                o2.values[i] = sa.values[i];
            }
        }
        c1.segments.push_back(std::move(o1));
        c2.segments.push_back(std::move(o2));
    }
    return {std::move(c1), std::move(c2)};
}

// Swap mutation. Per layer segment, with probability rate, one swap event:
//  - between individuals: two distinct members exchange the value at one
//    position of that segment;
//  - within individual: one member swaps two distinct positions.
// Swaps only permute values, so the population value multiset is invariant.
inline Population mutate(const Population& pop, double rate, MutationMode mode, SplitMix64& rng) {
    const std::size_t n = pop.size();
    if (n == 0) throw InputError("mutate: empty population");
    if (mode == MutationMode::swap_between_individuals && n < 2)
        throw InputError("mutate: between-individuals mode needs at least 2 members");

    Population out = pop;
    const std::size_t n_segments = pop.members[0].segments.size();
    for (std::size_t s = 0; s < n_segments; ++s) {
        if (rng.uniform() >= rate) continue;
        const std::size_t len = pop.members[0].segments[s].values.size();
        if (mode == MutationMode::swap_between_individuals) {
            const auto m1 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
            const auto m2 = (m1 + 1 + static_cast<std::size_t>(
                                          rng.uniform_int(0, static_cast<std::int64_t>(n) - 2))) % n;
            const auto pos = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(len) - 1));
            std::swap(out.members[m1].segments[s].values[pos],
                      out.members[m2].segments[s].values[pos]);
            out.members[m1].clear_evaluation();
            out.members[m2].clear_evaluation();
        } else {
            const auto m = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
            if (len < 2) continue;
            const auto p1 = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(len) - 1));
            const auto p2 = (p1 + 1 + static_cast<std::size_t>(
                                          rng.uniform_int(0, static_cast<std::int64_t>(len) - 2))) % len;
            std::swap(out.members[m].segments[s].values[p1], out.members[m].segments[s].values[p2]);
            out.members[m].clear_evaluation();
        }
    }
    return out;
}

// One generation of the genetic action: fill n_offspring slots by repeated
// (tournament x2, crossover with crossover_rate else copy), then apply the
// population-level mutate. Parent copies keep their cached fitness.
inline Population breed(const Population& pop, const GaParams& params, SplitMix64& rng,
                        int n_offspring) {
    Population next;
    next.generation = pop.generation + 1;
    next.members.reserve(static_cast<std::size_t>(n_offspring));
    while (next.members.size() < static_cast<std::size_t>(n_offspring)) {
        const Genome& a = tournament_select(pop, params.tournament_k, rng);
        const Genome& b = tournament_select(pop, params.tournament_k, rng);
        if (rng.uniform() < params.crossover_rate) {
            auto [c1, c2] = crossover_layerwise(a, b, rng);
            next.members.push_back(std::move(c1));
            if (next.members.size() < static_cast<std::size_t>(n_offspring))
                next.members.push_back(std::move(c2));
        } else {
            next.members.push_back(a);
            if (next.members.size() < static_cast<std::size_t>(n_offspring))
                next.members.push_back(b);
        }
    }
    if (next.members.size() >= 2 || params.mutation_mode == MutationMode::swap_within_individual)
        next = mutate(next, params.mutation_rate, params.mutation_mode, rng);
    return next;
}

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
};

inline metrics::Evaluation evaluate_genome_on(const Genome& g, const MlpSpec& spec,
                                              const LabeledDataset& data) {
    const MlpModel model = decode(g, spec);
    return metrics::evaluate_scores(scores(model, data.features), data.labels);
}

struct GaResult {
    Genome best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> history;  // generation 0 = initial population
    metrics::Evaluation test_eval;
};

inline constexpr double kDefaultPerturbRange = 0.5;

// Canonical generational GA over genomes, elitism of one. The elite occupies
// slot 0 of each generation and is exempt from mutation, which is what keeps
// the best-fitness history non-decreasing.
inline GaResult run_ga(const Genome& seed_genome, const MlpSpec& spec, const LabeledDataset& train,
                       const LabeledDataset& test, const GaParams& params,
                       double init_perturb_range = kDefaultPerturbRange, int workers = 1) {
    params.validate();

    Population pop = init_population(seed_genome, params.population_size, init_perturb_range,
                                     derive_seed(params.seed, "ga-init"));
    evaluate_population(pop, spec, train, workers);

    SplitMix64 op_rng(derive_seed(params.seed, "ga-operators"));

    GaResult result;
    const auto record = [&](int gen) {
        double sum = 0.0;
        for (const auto& m : pop.members) sum += *m.fitness;
        const std::size_t best = detail::best_member_index(pop);
        result.history.push_back(
            {gen, *pop.members[best].fitness, sum / static_cast<double>(pop.size())});
        if (!result.best.fitness || *pop.members[best].fitness > result.best_fitness) {
            result.best = pop.members[best];
            result.best_fitness = *pop.members[best].fitness;
        }
    };
    record(0);

    for (int gen = 1; gen <= params.generations; ++gen) {
        const Genome elite = pop.members[detail::best_member_index(pop)];
        Population next = breed(pop, params, op_rng, params.population_size - 1);
        next.members.insert(next.members.begin(), elite);
        next.generation = gen;
        evaluate_population(next, spec, train, workers);
        pop = std::move(next);
        record(gen);
    }

    result.test_eval = evaluate_genome_on(result.best, spec, test);
    return result;
}

}  // namespace mctsga
