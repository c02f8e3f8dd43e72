#include "coinflip/harness.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "coinflip/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coinflip {

namespace {

int resolve_threads(int threads) {
#ifdef _OPENMP
    return threads > 0 ? threads : omp_get_max_threads();
#else
    (void)threads;
    return 1;
#endif
}

const char* omega_name(int varied) {
    switch (varied) {
        case 1: return "omega1";
        case 2: return "omega2";
        case 3: return "omega3";
        default: return "?";
    }
}

}  // namespace

void SweepConfig::validate() const {
    if (sample_sizes.empty()) throw std::invalid_argument("sample_sizes must not be empty");
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        if (sample_sizes[i] == 0) throw std::invalid_argument("sample sizes must be positive");
        if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
            throw std::invalid_argument("sample_sizes must be strictly increasing");
        }
    }
    if (trials_per_size < 1) throw std::invalid_argument("trials_per_size must be at least 1");
    if (!target.strictly_positive()) {
        throw std::domain_error("sweep target must be strictly positive");
    }
}

double SweepResult::mean_kl(std::uint64_t sample_size) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.sample_size == sample_size) {
            sum += r.kl_nats;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("no rows for that sample size");
    return sum / static_cast<double>(n);
}

double SweepResult::mean_energy(std::uint64_t sample_size) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.sample_size == sample_size) {
            sum += r.total_energy_fj;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("no rows for that sample size");
    return sum / static_cast<double>(n);
}

std::uint64_t sweep_cell_seed(std::uint64_t master_seed, std::size_t size_index, std::size_t trial) {
    return derive_seed(master_seed, {kSampleSweepStream, size_index, trial});
}

SweepRow run_sweep_cell(const SweepConfig& config, std::size_t size_index, std::size_t trial) {
    const HiddenDependenceCircuit circuit{config.params, config.device, config.count_hidden_energy};
    SweepRow row;
    row.sample_size = config.sample_sizes.at(size_index);
    row.trial = trial;
    row.substream_seed = sweep_cell_seed(config.master_seed, size_index, trial);
    Rng rng(row.substream_seed);
    const EmpiricalDistribution emp = sample_n(circuit, row.sample_size, rng);
    row.kl_nats = empirical_kl(emp, config.target);
    row.total_energy_fj = emp.total_energy_fj;
    row.counts = emp.counts;
    return row;
}

SweepResult run_sample_sweep_serial(const SweepConfig& config) {
    config.validate();
    SweepResult result{config.device.name(), {}};
    for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) {
        for (std::size_t t = 0; t < config.trials_per_size; ++t) {
            result.rows.push_back(run_sweep_cell(config, s, t));
        }
    }
    return result;
}

SweepResult run_sample_sweep(const SweepConfig& config, int threads) {
    config.validate();
    const std::size_t trials = config.trials_per_size;
    const auto cells = static_cast<std::ptrdiff_t>(config.sample_sizes.size() * trials);
    SweepResult result{config.device.name(), std::vector<SweepRow>(static_cast<std::size_t>(cells))};
    [[maybe_unused]] const int nt = resolve_threads(threads);
    // Large sample sizes dominate; dynamic scheduling balances them.
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        const auto cell = static_cast<std::size_t>(c);
        result.rows[cell] = run_sweep_cell(config, cell / trials, cell % trials);
    }
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    CsvTable t;
    t.header = {"device", "sample_size", "trial", "substream_seed", "kl_nats", "total_energy_fj",
                "count0", "count1", "count2", "count3"};
    for (const auto& r : result.rows) {
        t.rows.push_back({result.device, std::to_string(r.sample_size), std::to_string(r.trial),
                          std::to_string(r.substream_seed), format_full(r.kl_nats),
                          format_full(r.total_energy_fj), std::to_string(r.counts[0]),
                          std::to_string(r.counts[1]), std::to_string(r.counts[2]),
                          std::to_string(r.counts[3])});
    }
    return to_csv(t);
}

WeightGrids WeightGrids::log_spaced(const FitnessWeights& base, std::size_t points, double span) {
    if (points < 1) throw std::invalid_argument("grid needs at least one point");
    if (!(span >= 1.0)) throw std::invalid_argument("grid span must be >= 1");
    auto grid = [&](double centre) {
        std::vector<double> g;
        if (points == 1) return std::vector<double>{centre};
        const double lo = std::log10(centre / span);
        const double hi = std::log10(centre * span);
        for (std::size_t i = 0; i < points; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(points - 1);
            g.push_back(std::pow(10.0, lo + t * (hi - lo)));
        }
        // Keep the base point exact when it falls on the grid.
        if (points % 2 == 1) g[points / 2] = centre;
        return g;
    };
    return {grid(base.w1), grid(base.w2), grid(base.w3)};
}

std::uint64_t weight_cell_seed(std::uint64_t master_seed, int varied_omega, std::size_t grid_index,
                               std::size_t rep) {
    return derive_seed(master_seed, {kWeightSweepStream, static_cast<std::uint64_t>(varied_omega),
                                     grid_index, rep});
}

std::vector<WeightSweepRow> run_weight_sweep(const WeightGrids& grids, const FitnessWeights& base,
                                             const DeviceSpec& device, const EvoConfig& config,
                                             const Distribution4& target, std::size_t reps,
                                             int threads) {
    config.validate();
    base.validate();
    if (grids.omega1.empty() || grids.omega2.empty() || grids.omega3.empty()) {
        throw std::invalid_argument("weight grids must be non-empty");
    }
    if (reps < 1) throw std::invalid_argument("reps must be at least 1");

    std::vector<WeightSweepRow> rows;
    const std::vector<double>* axes[3] = {&grids.omega1, &grids.omega2, &grids.omega3};
    for (int varied = 1; varied <= 3; ++varied) {
        const auto& axis = *axes[varied - 1];
        for (std::size_t gi = 0; gi < axis.size(); ++gi) {
            FitnessWeights w = base;
            (varied == 1 ? w.w1 : varied == 2 ? w.w2 : w.w3) = axis[gi];
            w.validate();
            for (std::size_t rep = 0; rep < reps; ++rep) {
                WeightSweepRow row;
                row.varied_omega = varied;
                row.weights = w;
                row.rep = rep;
                row.seed = weight_cell_seed(config.seed, varied, gi, rep);
                rows.push_back(row);
            }
        }
    }

    const auto n = static_cast<std::ptrdiff_t>(rows.size());
    [[maybe_unused]] const int nt = resolve_threads(threads);
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        WeightSweepRow& row = rows[static_cast<std::size_t>(i)];
        EvoConfig cell = config;
        cell.seed = row.seed;
        const OptimizationResult r = evolve(cell, device, row.weights, target, 1);
        row.best_kl_nats = r.exact_kl;
        row.best_energy_fj = r.exact_energy_fj;
    }
    return rows;
}

std::vector<WeightSweepRow> best_per_cell(const std::vector<WeightSweepRow>& rows) {
    std::vector<WeightSweepRow> out;
    for (const auto& r : rows) {
        if (!out.empty() && out.back().varied_omega == r.varied_omega &&
            out.back().weights.w1 == r.weights.w1 && out.back().weights.w2 == r.weights.w2 &&
            out.back().weights.w3 == r.weights.w3) {
            if (r.best_kl_nats < out.back().best_kl_nats) out.back() = r;
        } else {
            out.push_back(r);
        }
    }
    return out;
}

std::string weight_sweep_to_csv(const std::vector<WeightSweepRow>& rows) {
    CsvTable t;
    t.header = {"varied_omega", "omega1", "omega2", "omega3", "rep", "best_kl_nats", "best_energy_fj"};
    for (const auto& r : rows) {
        t.rows.push_back({omega_name(r.varied_omega), format_full(r.weights.w1),
                          format_full(r.weights.w2), format_full(r.weights.w3),
                          std::to_string(r.rep), format_full(r.best_kl_nats),
                          format_full(r.best_energy_fj)});
    }
    return to_csv(t);
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) {
    return derive_seed(master_seed, {kRepeatedRunsStream, run});
}

std::vector<RunRow> run_repeated_optimizations(std::size_t n_runs, const DeviceSpec& device,
                                               const EvoConfig& config,
                                               const FitnessWeights& weights,
                                               const Distribution4& target, int threads) {
    if (n_runs < 1) throw std::invalid_argument("n_runs must be at least 1");
    config.validate();
    weights.validate();
    std::vector<RunRow> rows(n_runs);
    const auto n = static_cast<std::ptrdiff_t>(n_runs);
    [[maybe_unused]] const int nt = resolve_threads(threads);
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        RunRow& row = rows[static_cast<std::size_t>(i)];
        row.run = static_cast<std::size_t>(i);
        row.seed = run_seed(config.seed, row.run);
        EvoConfig cell = config;
        cell.seed = row.seed;
        const OptimizationResult r = evolve(cell, device, weights, target, 1);
        row.genome = r.best_genome;
        row.kl_nats = r.exact_kl;
        row.energy_fj = r.exact_energy_fj;
        row.fitness = r.best_fitness;
    }
    return rows;
}

std::string runs_to_csv(const std::string& device, const std::vector<RunRow>& rows) {
    CsvTable t;
    t.header = {"device", "run", "seed", "w", "p1", "q1", "p2", "q2", "kl_nats", "energy_fj", "fitness"};
    for (const auto& r : rows) {
        std::vector<std::string> line{device, std::to_string(r.run), std::to_string(r.seed)};
        for (double g : r.genome.genes) line.push_back(format_full(g));
        line.push_back(format_full(r.kl_nats));
        line.push_back(format_full(r.energy_fj));
        line.push_back(format_full(r.fitness));
        t.rows.push_back(std::move(line));
    }
    return to_csv(t);
}

std::string history_to_csv(const OptimizationResult& result) {
    CsvTable t;
    t.header = {"generation", "best_fitness", "best_kl_nats", "best_fairness", "best_energy_fj",
                "w", "p1", "q1", "p2", "q2"};
    for (const auto& h : result.history) {
        std::vector<std::string> line{std::to_string(h.generation), format_full(h.best.total),
                                      format_full(h.best.kl_nats), format_full(h.best.fairness),
                                      format_full(h.best.energy_fj)};
        for (double g : h.best_genome.genes) line.push_back(format_full(g));
        t.rows.push_back(std::move(line));
    }
    return to_csv(t);
}

std::string optimization_to_json(const OptimizationResult& result, const DeviceSpec& device,
                                 const FitnessWeights& weights, const EvoConfig& config,
                                 const Distribution4& target) {
    using nlohmann::ordered_json;
    const CircuitParams p = result.best_genome.params();
    const Distribution4 v = exact_outcome_distribution(p);

    ordered_json doc;
    doc["device"] = device.name();
    doc["weights"] = {{"omega1", weights.w1}, {"omega2", weights.w2}, {"omega3", weights.w3}};
    doc["config"] = {{"population_size", config.population_size},
                     {"generations", config.generations},
                     {"tournament_size", config.tournament_size},
                     {"crossover_probability", config.crossover_probability},
                     {"per_gene_mutation_rate", config.per_gene_mutation_rate},
                     {"mutation_sigma", config.mutation_sigma},
                     {"elitism_count", config.elitism_count}};
    doc["seed"] = config.seed;
    doc["target"] = target.probs();
    doc["best_genome"] = {{"w", p.w}, {"p1", p.p1}, {"q1", p.q1}, {"p2", p.p2}, {"q2", p.q2}};
    doc["exact_v"] = v.probs();
    doc["exact_kl_nats"] = result.exact_kl;
    doc["fairness"] = result.fairness;
    doc["energy_fj"] = result.exact_energy_fj;
    doc["fitness"] = result.best_fitness;
    doc["energy_includes_hidden_coin"] = false;
    return doc.dump(2) + "\n";
}

}  // namespace coinflip
