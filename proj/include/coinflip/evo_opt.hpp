#pragma once

// Real-valued evolutionary optimizer over (w, p1, q1, p2, q2).
//
// Fitness (lower is better):
//   w1 * KL(v || target) + w2 * fairness_penalty + w3 * EN
// where v is the exact outcome distribution and EN is the summed expected
// per-flip energy (fJ) of the four set coins. The hidden coin is not part
// of EN.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "coinflip/devices.hpp"
#include "coinflip/prob_core.hpp"
#include "coinflip/rng.hpp"

namespace coinflip {

inline constexpr std::size_t kGenomeLength = 5;

/// Gene order: w, p1, q1, p2, q2.
struct Genome {
    std::array<double, kGenomeLength> genes{};

    static Genome from_params(const CircuitParams& p) { return {{p.w, p.p1, p.q1, p.p2, p.q2}}; }
    CircuitParams params() const { return {genes[0], genes[1], genes[2], genes[3], genes[4]}; }
    void clamp();

    friend bool operator==(const Genome&, const Genome&) = default;
};

struct FitnessWeights {
    double w1 = 7500.0;  // KL
    double w2 = 0.005;   // fairness
    double w3 = 0.5;     // energy

    void validate() const;
};

struct EvoConfig {
    std::size_t population_size = 100;
    std::size_t generations = 1000;
    std::size_t tournament_size = 2;
    double crossover_probability = 0.9;
    double per_gene_mutation_rate = 1.0 / static_cast<double>(kGenomeLength);
    double mutation_sigma = 0.001;
    std::size_t elitism_count = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitnessBreakdown {
    double kl_nats = 0.0;
    double fairness = 0.0;
    double energy_fj = 0.0;
    double total = 0.0;
};

/// EN: sum of expected per-flip energy over p1, p2, q1, q2.
double set_coin_energy(const CircuitParams& params, const DeviceSpec& device);

FitnessBreakdown evaluate_fitness(const Genome& genome, const DeviceSpec& device,
                                  const FitnessWeights& weights, const Distribution4& target);

double fitness(const Genome& genome, const DeviceSpec& device, const FitnessWeights& weights,
               const Distribution4& target);

struct Scored {
    Genome genome;
    double fitness = 0.0;
};

/// Draws k members uniformly with replacement and returns the index of the
/// fittest; ties go to the lowest population index.
std::size_t tournament_select_index(std::span<const Scored> population, std::size_t k, Rng& rng);

Genome tournament_select(std::span<const Scored> population, std::size_t k, Rng& rng);

Genome uniform_crossover(const Genome& a, const Genome& b, Rng& rng);

/// Each gene independently, with probability rate, gets N(0, sigma) noise;
/// genes are then clamped to [0, 1].
Genome gaussian_mutate(const Genome& g, double sigma, double rate, Rng& rng);

/// Everything a fitness evaluation needs besides the genome.
struct FitnessContext {
    const DeviceSpec& device;
    const FitnessWeights& weights;
    const Distribution4& target;
};

/// Reference kernel: evaluates every member in order.
void evaluate_population_serial(std::span<Scored> population, const FitnessContext& ctx);

/// OpenMP kernel; identical results to the serial one. threads <= 0 uses
/// the OpenMP default.
void evaluate_population(std::span<Scored> population, const FitnessContext& ctx, int threads = 0);

struct GenerationRecord {
    std::size_t generation = 0;  // 1-based breeding step
    Genome best_genome;          // best-ever up to this generation
    FitnessBreakdown best;
};

struct OptimizationResult {
    Genome best_genome;
    double best_fitness = 0.0;
    double exact_kl = 0.0;
    double exact_energy_fj = 0.0;
    double fairness = 0.0;
    std::vector<GenerationRecord> history;  // one entry per generation
};

/// Generational EA with elitism. All randomness is consumed sequentially in
/// initialization and breeding, so the result does not depend on threads.
OptimizationResult evolve(const EvoConfig& config, const DeviceSpec& device,
                          const FitnessWeights& weights, const Distribution4& target,
                          int threads = 0);

}  // namespace coinflip
