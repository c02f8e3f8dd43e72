#pragma once

// Experiment orchestration: sample-size sweeps, objective-weight sweeps and
// repeated optimization runs, with their CSV/JSON serializations.
//
// Seeds are derived hierarchically (master -> experiment -> cell -> trial)
// so every row can be recomputed in isolation and adding cells never
// perturbs existing ones.

#include <cstdint>
#include <string>
#include <vector>

#include "coinflip/circuit_sim.hpp"
#include "coinflip/evo_opt.hpp"

namespace coinflip {

// Experiment tags for derive_seed.
inline constexpr std::uint64_t kSampleSweepStream = 1;
inline constexpr std::uint64_t kWeightSweepStream = 2;
inline constexpr std::uint64_t kRepeatedRunsStream = 3;
inline constexpr std::uint64_t kSampleStream = 4;

inline const std::vector<std::uint64_t> kDefaultSampleSizes{10, 50, 100, 200, 500, 1000, 1500, 2000};

struct SweepConfig {
    std::vector<std::uint64_t> sample_sizes;
    std::size_t trials_per_size;
    std::uint64_t master_seed;
    DeviceSpec device;
    CircuitParams params;
    Distribution4 target;
    bool count_hidden_energy = true;

    /// Throws std::invalid_argument unless sizes are non-empty, positive and
    /// strictly increasing, trials >= 1 and the target has full support.
    void validate() const;
};

struct SweepRow {
    std::uint64_t sample_size = 0;
    std::size_t trial = 0;
    std::uint64_t substream_seed = 0;
    double kl_nats = 0.0;
    double total_energy_fj = 0.0;
    std::array<std::uint64_t, 4> counts{};

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
    std::string device;
    std::vector<SweepRow> rows;  // (size, trial) order

    double mean_kl(std::uint64_t sample_size) const;
    double mean_energy(std::uint64_t sample_size) const;
};

std::uint64_t sweep_cell_seed(std::uint64_t master_seed, std::size_t size_index, std::size_t trial);

/// One (size, trial) cell, reproducible from the config alone.
SweepRow run_sweep_cell(const SweepConfig& config, std::size_t size_index, std::size_t trial);

/// Reference implementation: cells in order on the calling thread.
SweepResult run_sample_sweep_serial(const SweepConfig& config);

/// OpenMP over cells; rows identical to the serial version.
SweepResult run_sample_sweep(const SweepConfig& config, int threads = 0);

std::string sweep_to_csv(const SweepResult& result);

struct WeightGrids {
    std::vector<double> omega1;
    std::vector<double> omega2;
    std::vector<double> omega3;

    /// points log-spaced values per omega from base/span to base*span.
    static WeightGrids log_spaced(const FitnessWeights& base, std::size_t points = 7,
                                  double span = 100.0);
};

struct WeightSweepRow {
    int varied_omega = 0;  // 1, 2 or 3
    FitnessWeights weights;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    double best_kl_nats = 0.0;
    double best_energy_fj = 0.0;
};

std::uint64_t weight_cell_seed(std::uint64_t master_seed, int varied_omega, std::size_t grid_index,
                               std::size_t rep);

/// Varies one omega at a time around base; every (omega, value, rep) cell
/// runs evolve with its own derived seed (config.seed is the master).
std::vector<WeightSweepRow> run_weight_sweep(const WeightGrids& grids, const FitnessWeights& base,
                                             const DeviceSpec& device, const EvoConfig& config,
                                             const Distribution4& target, std::size_t reps = 3,
                                             int threads = 0);

/// Lowest-KL row per (varied_omega, grid value), in grid order.
std::vector<WeightSweepRow> best_per_cell(const std::vector<WeightSweepRow>& rows);

std::string weight_sweep_to_csv(const std::vector<WeightSweepRow>& rows);

struct RunRow {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    Genome genome;
    double kl_nats = 0.0;
    double energy_fj = 0.0;
    double fitness = 0.0;
};

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run);

std::vector<RunRow> run_repeated_optimizations(std::size_t n_runs, const DeviceSpec& device,
                                               const EvoConfig& config,
                                               const FitnessWeights& weights,
                                               const Distribution4& target, int threads = 0);

std::string runs_to_csv(const std::string& device, const std::vector<RunRow>& rows);

std::string history_to_csv(const OptimizationResult& result);

/// Best-result document for one optimization run.
std::string optimization_to_json(const OptimizationResult& result, const DeviceSpec& device,
                                 const FitnessWeights& weights, const EvoConfig& config,
                                 const Distribution4& target);

}  // namespace coinflip
