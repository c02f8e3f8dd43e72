#include "coinflip/evo_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coinflip {

namespace {

void require_non_negative(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0) {
        throw std::invalid_argument(std::string(what) + " must be finite and non-negative");
    }
}

}  // namespace

void Genome::clamp() {
    for (double& g : genes) g = std::clamp(g, 0.0, 1.0);
}

void FitnessWeights::validate() const {
    require_non_negative(w1, "omega1");
    require_non_negative(w2, "omega2");
    require_non_negative(w3, "omega3");
}

void EvoConfig::validate() const {
    if (population_size < 2) throw std::invalid_argument("population_size must be at least 2");
    if (tournament_size < 1 || tournament_size > population_size) {
        throw std::invalid_argument("tournament_size must lie in [1, population_size]");
    }
    require_probability(crossover_probability, "crossover_probability");
    require_probability(per_gene_mutation_rate, "per_gene_mutation_rate");
    if (!(mutation_sigma > 0.0) || !std::isfinite(mutation_sigma)) {
        throw std::invalid_argument("mutation_sigma must be positive");
    }
    if (elitism_count > population_size) {
        throw std::invalid_argument("elitism_count must not exceed population_size");
    }
}

double set_coin_energy(const CircuitParams& c, const DeviceSpec& device) {
    return expected_energy_per_flip(device, c.p1) + expected_energy_per_flip(device, c.p2) +
           expected_energy_per_flip(device, c.q1) + expected_energy_per_flip(device, c.q2);
}

FitnessBreakdown evaluate_fitness(const Genome& genome, const DeviceSpec& device,
                                  const FitnessWeights& weights, const Distribution4& target) {
    const CircuitParams params = genome.params();
    FitnessBreakdown f;
    f.kl_nats = kl_divergence(exact_outcome_distribution(params), target);
    f.fairness = fairness_penalty(params);
    f.energy_fj = set_coin_energy(params, device);
    f.total = weights.w1 * f.kl_nats + weights.w2 * f.fairness + weights.w3 * f.energy_fj;
    return f;
}

double fitness(const Genome& genome, const DeviceSpec& device, const FitnessWeights& weights,
               const Distribution4& target) {
    return evaluate_fitness(genome, device, weights, target).total;
}

std::size_t tournament_select_index(std::span<const Scored> population, std::size_t k, Rng& rng) {
    if (population.empty()) throw std::invalid_argument("tournament on an empty population");
    if (k < 1) throw std::invalid_argument("tournament size must be at least 1");
    std::size_t best = rng.below(population.size());
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t c = rng.below(population.size());
        const double fc = population[c].fitness;
        const double fb = population[best].fitness;
        if (fc < fb || (fc == fb && c < best)) best = c;
    }
    return best;
}

Genome tournament_select(std::span<const Scored> population, std::size_t k, Rng& rng) {
    return population[tournament_select_index(population, k, rng)].genome;
}

Genome uniform_crossover(const Genome& a, const Genome& b, Rng& rng) {
    Genome child;
    for (std::size_t i = 0; i < kGenomeLength; ++i) {
        child.genes[i] = rng.bernoulli(0.5) ? a.genes[i] : b.genes[i];
    }
    return child;
}

Genome gaussian_mutate(const Genome& g, double sigma, double rate, Rng& rng) {
    if (!(sigma > 0.0)) throw std::invalid_argument("mutation sigma must be positive");
    require_probability(rate, "mutation rate");
    Genome out = g;
    for (double& gene : out.genes) {
        if (rng.bernoulli(rate)) gene += sigma * rng.normal();
    }
    out.clamp();
    return out;
}

void evaluate_population_serial(std::span<Scored> population, const FitnessContext& ctx) {
    for (Scored& s : population) {
        s.fitness = fitness(s.genome, ctx.device, ctx.weights, ctx.target);
    }
}

void evaluate_population(std::span<Scored> population, const FitnessContext& ctx, int threads) {
    const auto n = static_cast<std::ptrdiff_t>(population.size());
#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(static)
#else
    (void)threads;
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        Scored& s = population[static_cast<std::size_t>(i)];
        s.fitness = fitness(s.genome, ctx.device, ctx.weights, ctx.target);
    }
}

OptimizationResult evolve(const EvoConfig& config, const DeviceSpec& device,
                          const FitnessWeights& weights, const Distribution4& target,
                          int threads) {
    config.validate();
    weights.validate();
    if (!target.strictly_positive()) {
        throw std::domain_error("optimization target must be strictly positive");
    }

    const FitnessContext ctx{device, weights, target};
    Rng rng(config.seed);

    std::vector<Scored> population(config.population_size);
    for (Scored& s : population) {
        for (double& g : s.genome.genes) g = rng.uniform();
    }
    evaluate_population(population, ctx, threads);

    auto best_it = std::min_element(population.begin(), population.end(),
                                    [](const Scored& a, const Scored& b) { return a.fitness < b.fitness; });
    Scored best_ever = *best_it;

    OptimizationResult result;
    result.history.reserve(config.generations);

    std::vector<std::size_t> order(population.size());
    std::vector<Scored> next(population.size());
    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return population[a].fitness < population[b].fitness;
        });
        for (std::size_t e = 0; e < config.elitism_count; ++e) next[e] = population[order[e]];

        for (std::size_t i = config.elitism_count; i < next.size(); ++i) {
            Genome child = tournament_select(population, config.tournament_size, rng);
            if (rng.bernoulli(config.crossover_probability)) {
                const Genome other = tournament_select(population, config.tournament_size, rng);
                child = uniform_crossover(child, other, rng);
            }
            next[i].genome = gaussian_mutate(child, config.mutation_sigma,
                                             config.per_gene_mutation_rate, rng);
        }
        // Elites keep their scores; only bred children need evaluation.
        evaluate_population(std::span<Scored>(next).subspan(config.elitism_count), ctx, threads);
        population.swap(next);

        for (const Scored& s : population) {
            if (s.fitness < best_ever.fitness) best_ever = s;
        }
        result.history.push_back(
            {gen, best_ever.genome, evaluate_fitness(best_ever.genome, device, weights, target)});
    }

    const FitnessBreakdown f = evaluate_fitness(best_ever.genome, device, weights, target);
    result.best_genome = best_ever.genome;
    result.best_fitness = f.total;
    result.exact_kl = f.kl_nats;
    result.exact_energy_fj = f.energy_fj;
    result.fairness = f.fairness;
    return result;
}

}  // namespace coinflip
