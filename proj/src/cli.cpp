#include "coinflip/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "coinflip/circuit_sim.hpp"
#include "coinflip/devices.hpp"
#include "coinflip/evo_opt.hpp"
#include "coinflip/harness.hpp"
#include "coinflip/io.hpp"
#include "coinflip/plot.hpp"
#include "coinflip/prob_core.hpp"

namespace coinflip {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Decimal inputs like 0.1666667 do not sum to one within the library's
/// 1e-9; the command line accepts up to 1e-6 and renormalizes.
constexpr double kCliSumTolerance = 1e-6;

struct CommonOptions {
    std::string device = "td";
    std::string target;
    std::uint64_t seed = 42;
    std::string out;
    int threads = 0;
};

struct ParamOptions {
    std::string params;
    std::string preset;
};

struct Outputs {
    std::vector<std::pair<fs::path, std::string>> files;

    void add(fs::path p, std::string contents) { files.emplace_back(std::move(p), std::move(contents)); }
};

double round_sig6(double x) { return std::stod(format_sig6(x)); }

ordered_json sig6_array(const std::array<double, 4>& a) {
    ordered_json j = ordered_json::array();
    for (double x : a) j.push_back(round_sig6(x));
    return j;
}

Distribution4 parse_target(const std::string& text) {
    if (text.empty()) return Distribution4::die_target();
    const std::vector<double> v = parse_number_list(text);
    if (v.size() != 4) throw std::invalid_argument("--target needs exactly 4 comma-separated numbers");
    double sum = 0.0;
    for (double x : v) {
        require_probability(x, "target entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kCliSumTolerance) {
        throw std::invalid_argument("--target entries sum to " + format_sig6(sum) + ", expected 1");
    }
    return Distribution4({v[0] / sum, v[1] / sum, v[2] / sum, v[3] / sum});
}

CircuitParams preset_params(const std::string& name) {
    if (name == "td") return CircuitParams::td_reference();
    if (name == "mtj_she") return CircuitParams::mtj_she_reference();
    if (name == "mtj_vcma") return CircuitParams::mtj_vcma_reference();
    throw std::invalid_argument("unknown preset '" + name + "' (expected td, mtj_she or mtj_vcma)");
}

CircuitParams resolve_params(const ParamOptions& opts, const DeviceSpec& device) {
    if (!opts.params.empty()) {
        const std::vector<double> v = parse_number_list(opts.params);
        if (v.size() != 5) throw std::invalid_argument("--params needs 5 numbers: w,p1,q1,p2,q2");
        return CircuitParams(v[0], v[1], v[2], v[3], v[4]);
    }
    if (!opts.preset.empty()) return preset_params(opts.preset);
    return preset_params(device.name());
}

ordered_json params_json(const CircuitParams& p) {
    return {{"w", p.w}, {"p1", p.p1}, {"q1", p.q1}, {"p2", p.p2}, {"q2", p.q2}};
}

ordered_json weights_json(const FitnessWeights& w) {
    return {{"omega1", w.w1}, {"omega2", w.w2}, {"omega3", w.w3}};
}

ordered_json evo_json(const EvoConfig& c) {
    return {{"population_size", c.population_size},
            {"generations", c.generations},
            {"tournament_size", c.tournament_size},
            {"crossover_probability", c.crossover_probability},
            {"per_gene_mutation_rate", c.per_gene_mutation_rate},
            {"mutation_sigma", c.mutation_sigma},
            {"elitism_count", c.elitism_count}};
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension();
    p += suffix;
    return p;
}

/// Adds the manifest next to the primary output and writes everything.
/// Nothing is written until every artifact has been rendered.
void commit(Outputs& outputs, const std::string& subcommand, const std::vector<std::string>& args,
            ordered_json config, std::uint64_t seed) {
    if (outputs.files.empty()) return;
    // Keyed by the full output name so sweep.csv and sweep.svg do not collide.
    fs::path manifest_path = outputs.files.front().first;
    manifest_path += ".manifest.json";
    ordered_json m;
    m["tool"] = "coinflip";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["args"] = args;
    m["config"] = std::move(config);
    m["seed"] = seed;
    ordered_json paths = ordered_json::array();
    for (const auto& [p, _] : outputs.files) paths.push_back(p.generic_string());
    m["outputs"] = paths;
    outputs.add(manifest_path, m.dump(2) + "\n");

    for (const auto& [p, contents] : outputs.files) {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_text_file(p, contents);
    }
}

void add_common(CLI::App* sub, CommonOptions& c, bool with_seed = true) {
    sub->add_option("--device", c.device, "Device name (td, mtj_she, mtj_vcma) or config path")
        ->capture_default_str();
    sub->add_option("--target", c.target, "Target distribution a,b,c,d (default 1/2,1/6,1/6,1/6)");
    if (with_seed) sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--threads", c.threads, "Worker thread cap (0 = OpenMP default)")
        ->check(CLI::NonNegativeNumber);
}

void add_params(CLI::App* sub, ParamOptions& p) {
    sub->add_option("--params", p.params, "Circuit parameters w,p1,q1,p2,q2");
    sub->add_option("--preset", p.preset, "Reference parameters: td, mtj_she or mtj_vcma");
}

void add_weights(CLI::App* sub, FitnessWeights& w) {
    sub->add_option("--w1", w.w1, "KL weight")->capture_default_str();
    sub->add_option("--w2", w.w2, "Fairness weight")->capture_default_str();
    sub->add_option("--w3", w.w3, "Energy weight")->capture_default_str();
}

void add_evo(CLI::App* sub, EvoConfig& e) {
    sub->add_option("--generations", e.generations)->capture_default_str();
    sub->add_option("--population", e.population_size)->capture_default_str();
    sub->add_option("--tournament", e.tournament_size)->capture_default_str();
    sub->add_option("--crossover", e.crossover_probability)->capture_default_str();
    sub->add_option("--mutation-rate", e.per_gene_mutation_rate)->capture_default_str();
    sub->add_option("--sigma", e.mutation_sigma)->capture_default_str();
    sub->add_option("--elitism", e.elitism_count)->capture_default_str();
}

int cmd_evaluate(const CommonOptions& c, const ParamOptions& po, const FitnessWeights& weights,
                 const std::vector<std::string>& args, std::ostream& out) {
    weights.validate();
    const DeviceSpec device = resolve_device(c.device);
    const Distribution4 target = parse_target(c.target);
    const CircuitParams params = resolve_params(po, device);
    const Genome genome = Genome::from_params(params);
    const Distribution4 v = exact_outcome_distribution(params);
    const FitnessBreakdown f = evaluate_fitness(genome, device, weights, target);

    ordered_json r;
    r["device"] = device.name();
    r["params"] = params_json(params);
    r["weights"] = weights_json(weights);
    r["target"] = sig6_array(target.probs());
    r["v"] = sig6_array(v.probs());
    r["kl_nats"] = round_sig6(f.kl_nats);
    r["fairness"] = round_sig6(f.fairness);
    r["energy_fj"] = round_sig6(f.energy_fj);
    r["fitness"] = round_sig6(f.total);
    const std::string text = r.dump(2) + "\n";

    Outputs outputs;
    if (!c.out.empty()) outputs.add(c.out, text);
    commit(outputs, "evaluate", args,
           {{"device", device.name()}, {"params", params_json(params)},
            {"weights", weights_json(weights)}, {"target", target.probs()}},
           0);
    out << text;
    return kExitOk;
}

int cmd_solve(const CommonOptions& c, const std::vector<std::string>& args, std::ostream& out) {
    const Distribution4 target = parse_target(c.target);
    const std::optional<CoinPair> pair = solve_two_coins(target);
    ordered_json r;
    r["target"] = sig6_array(target.probs());
    r["residual"] = round_sig6(factorization_residual(target));
    r["tolerance"] = kSolveTolerance;
    if (pair) {
        r["solvable"] = true;
        r["p"] = round_sig6(pair->p);
        r["q"] = round_sig6(pair->q);
    } else {
        r["solvable"] = false;
        r["message"] = "no independent two-coin solution";
        r["violated_condition"] = "v0*v3 == v1*v2";
    }
    const std::string text = r.dump(2) + "\n";
    Outputs outputs;
    if (!c.out.empty()) outputs.add(c.out, text);
    commit(outputs, "solve", args, {{"target", target.probs()}}, 0);
    out << text;
    return kExitOk;
}

int cmd_optimize(const CommonOptions& c, EvoConfig evo, const FitnessWeights& weights,
                 const std::vector<std::string>& args, std::ostream& out) {
    evo.seed = c.seed;
    evo.validate();
    weights.validate();
    const DeviceSpec device = resolve_device(c.device);
    const Distribution4 target = parse_target(c.target);
    const OptimizationResult result = evolve(evo, device, weights, target, c.threads);
    const std::string doc = optimization_to_json(result, device, weights, evo, target);

    Outputs outputs;
    if (!c.out.empty()) {
        outputs.add(c.out, doc);
        outputs.add(sibling(c.out, ".history.csv"), history_to_csv(result));
    }
    commit(outputs, "optimize", args,
           {{"device", nlohmann::ordered_json::parse(device_to_json(device))},
            {"weights", weights_json(weights)},
            {"evo", evo_json(evo)},
            {"target", target.probs()}},
           evo.seed);
    out << doc;
    return kExitOk;
}

int cmd_sample(const CommonOptions& c, const ParamOptions& po, std::uint64_t n, bool no_hidden,
               const std::vector<std::string>& args, std::ostream& out) {
    if (n == 0) throw std::invalid_argument("--n must be at least 1");
    const DeviceSpec device = resolve_device(c.device);
    const Distribution4 target = parse_target(c.target);
    const CircuitParams params = resolve_params(po, device);
    const HiddenDependenceCircuit circuit{params, device, !no_hidden};
    Rng rng(derive_seed(c.seed, {kSampleStream}));
    const EmpiricalDistribution emp = sample_n(circuit, n, rng);
    const Distribution4 v = exact_outcome_distribution(params);
    const double kl = empirical_kl(emp, target);

    ordered_json r;
    r["device"] = device.name();
    r["params"] = params_json(params);
    r["n"] = n;
    r["seed"] = c.seed;
    r["counts"] = emp.counts;
    r["frequencies"] = sig6_array(emp.frequencies());
    r["exact_v"] = sig6_array(v.probs());
    r["target"] = sig6_array(target.probs());
    r["kl_nats"] = round_sig6(kl);
    r["total_energy_fj"] = round_sig6(emp.total_energy_fj);
    r["energy_includes_hidden_coin"] = !no_hidden;
    const std::string text = r.dump(2) + "\n";

    Outputs outputs;
    if (!c.out.empty()) {
        ordered_json full = r;
        full["frequencies"] = emp.frequencies();
        full["exact_v"] = v.probs();
        full["target"] = target.probs();
        full["kl_nats"] = kl;
        full["total_energy_fj"] = emp.total_energy_fj;
        outputs.add(c.out, full.dump(2) + "\n");

        static const std::array<const char*, 4> labels{"HH", "HT", "TH", "TT"};
        CsvTable hist;
        hist.header = {"outcome", "label", "count", "frequency", "target", "exact"};
        const auto freq = emp.frequencies();
        for (std::size_t i = 0; i < 4; ++i) {
            hist.rows.push_back({std::to_string(i), labels[i], std::to_string(emp.counts[i]),
                                 format_full(freq[i]), format_full(target[i]), format_full(v[i])});
        }
        outputs.add(sibling(c.out, ".histogram.csv"), to_csv(hist));
    }
    commit(outputs, "sample", args,
           {{"device", nlohmann::ordered_json::parse(device_to_json(device))},
            {"params", params_json(params)},
            {"n", n},
            {"count_hidden_energy", !no_hidden},
            {"target", target.probs()}},
           c.seed);
    out << text;
    return kExitOk;
}

int cmd_sweep(const CommonOptions& c, const ParamOptions& po, const std::string& sizes_text,
              std::size_t trials, bool no_hidden, const std::vector<std::string>& args,
              std::ostream& out) {
    std::vector<std::uint64_t> sizes = kDefaultSampleSizes;
    if (!sizes_text.empty()) {
        sizes.clear();
        for (double s : parse_number_list(sizes_text)) {
            if (!(s >= 1.0) || s != std::floor(s)) {
                throw std::invalid_argument("--sizes must be positive integers");
            }
            sizes.push_back(static_cast<std::uint64_t>(s));
        }
    }
    const DeviceSpec device = resolve_device(c.device);
    const SweepConfig config{sizes, trials, c.seed, device, resolve_params(po, device),
                             parse_target(c.target), !no_hidden};
    config.validate();
    const SweepResult result = run_sample_sweep(config, c.threads);
    const std::string csv = sweep_to_csv(result);

    Outputs outputs;
    if (!c.out.empty()) outputs.add(c.out, csv);
    commit(outputs, "sweep", args,
           {{"device", nlohmann::ordered_json::parse(device_to_json(device))},
            {"params", params_json(config.params)},
            {"sample_sizes", sizes},
            {"trials_per_size", trials},
            {"count_hidden_energy", !no_hidden},
            {"target", config.target.probs()}},
           c.seed);

    for (std::uint64_t n : sizes) {
        out << "n=" << n << " mean_kl_nats=" << format_sig6(result.mean_kl(n))
            << " mean_energy_fj=" << format_sig6(result.mean_energy(n)) << "\n";
    }
    return kExitOk;
}

struct GridOptions {
    std::string omega1, omega2, omega3;
    std::size_t points = 7;
    double span = 100.0;
    std::size_t reps = 3;
};

int cmd_weight_sweep(const CommonOptions& c, EvoConfig evo, const FitnessWeights& base,
                     const GridOptions& g, const std::vector<std::string>& args, std::ostream& out) {
    evo.seed = c.seed;
    evo.validate();
    base.validate();
    WeightGrids grids = WeightGrids::log_spaced(base, g.points, g.span);
    if (!g.omega1.empty()) grids.omega1 = parse_number_list(g.omega1);
    if (!g.omega2.empty()) grids.omega2 = parse_number_list(g.omega2);
    if (!g.omega3.empty()) grids.omega3 = parse_number_list(g.omega3);
    const DeviceSpec device = resolve_device(c.device);
    const Distribution4 target = parse_target(c.target);
    const auto rows = run_weight_sweep(grids, base, device, evo, target, g.reps, c.threads);
    const std::string csv = weight_sweep_to_csv(rows);

    Outputs outputs;
    if (!c.out.empty()) outputs.add(c.out, csv);
    commit(outputs, "weight-sweep", args,
           {{"device", nlohmann::ordered_json::parse(device_to_json(device))},
            {"base_weights", weights_json(base)},
            {"grids", {{"omega1", grids.omega1}, {"omega2", grids.omega2}, {"omega3", grids.omega3}}},
            {"reps", g.reps},
            {"evo", evo_json(evo)},
            {"target", target.probs()}},
           evo.seed);
    for (const auto& r : best_per_cell(rows)) {
        out << "omega" << r.varied_omega << " w=(" << format_sig6(r.weights.w1) << ","
            << format_sig6(r.weights.w2) << "," << format_sig6(r.weights.w3)
            << ") best_kl_nats=" << format_sig6(r.best_kl_nats)
            << " energy_fj=" << format_sig6(r.best_energy_fj) << "\n";
    }
    return kExitOk;
}

int cmd_runs(const CommonOptions& c, EvoConfig evo, const FitnessWeights& weights, std::size_t n_runs,
             const std::vector<std::string>& args, std::ostream& out) {
    evo.seed = c.seed;
    evo.validate();
    weights.validate();
    if (n_runs < 1) throw std::invalid_argument("--runs must be at least 1");
    const DeviceSpec device = resolve_device(c.device);
    const Distribution4 target = parse_target(c.target);
    const auto rows = run_repeated_optimizations(n_runs, device, evo, weights, target, c.threads);
    const std::string csv = runs_to_csv(device.name(), rows);

    Outputs outputs;
    if (!c.out.empty()) outputs.add(c.out, csv);
    commit(outputs, "runs", args,
           {{"device", nlohmann::ordered_json::parse(device_to_json(device))},
            {"weights", weights_json(weights)},
            {"runs", n_runs},
            {"evo", evo_json(evo)},
            {"target", target.probs()}},
           evo.seed);
    for (const auto& r : rows) {
        out << "run " << r.run << ": kl_nats=" << format_sig6(r.kl_nats)
            << " energy_fj=" << format_sig6(r.energy_fj) << " fitness=" << format_sig6(r.fitness)
            << "\n";
    }
    return kExitOk;
}

int cmd_plot(const std::string& in, const std::string& out_path, const std::string& kind_name,
             const std::vector<std::string>& args, std::ostream& out) {
    if (out_path.empty()) throw std::invalid_argument("plot needs --out");
    const CsvTable table = parse_csv(read_text_file(in));
    PlotKind kind;
    if (kind_name == "auto") kind = detect_plot_kind(table);
    else if (kind_name == "sweep") kind = PlotKind::SampleSweep;
    else if (kind_name == "histogram") kind = PlotKind::Histogram;
    else if (kind_name == "weight-sweep") kind = PlotKind::WeightSweep;
    else throw std::invalid_argument("unknown plot kind '" + kind_name + "'");
    const std::string svg = render_svg(table, kind);

    Outputs outputs;
    outputs.add(out_path, svg);
    commit(outputs, "plot", args, {{"input", in}, {"kind", kind_name}}, 0);
    out << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Codesign of hidden-dependence coin-flip circuits for stochastic devices", "coinflip"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions common;
    ParamOptions params;
    FitnessWeights weights;
    EvoConfig evo;
    std::uint64_t n_samples = 2000;
    bool no_hidden = false;
    std::string sizes;
    std::size_t trials = 10;
    std::size_t n_runs = 20;
    GridOptions grid;
    std::string plot_in, plot_kind = "auto";

    auto* evaluate = app.add_subcommand("evaluate", "Exact distribution, KL, fairness, energy and fitness");
    add_common(evaluate, common, false);
    add_params(evaluate, params);
    add_weights(evaluate, weights);

    auto* solve = app.add_subcommand("solve", "Solve for an independent two-coin representation");
    solve->add_option("--target", common.target, "Target distribution a,b,c,d");
    solve->add_option("--out", common.out, "Output path");

    auto* optimize = app.add_subcommand("optimize", "Evolve circuit parameters");
    add_common(optimize, common);
    add_weights(optimize, weights);
    add_evo(optimize, evo);

    auto* sample = app.add_subcommand("sample", "Monte Carlo sample the circuit");
    add_common(sample, common);
    add_params(sample, params);
    sample->add_option("--n", n_samples, "Number of samples")->capture_default_str();
    sample->add_flag("--no-hidden-energy", no_hidden, "Exclude the hidden coin from energy");

    auto* sweep = app.add_subcommand("sweep", "KL and energy vs sample size");
    add_common(sweep, common);
    add_params(sweep, params);
    sweep->add_option("--sizes", sizes, "Comma-separated sample sizes (default 10,...,2000)");
    sweep->add_option("--trials", trials, "Trials per size")->capture_default_str();
    sweep->add_flag("--no-hidden-energy", no_hidden, "Exclude the hidden coin from energy");

    auto* wsweep = app.add_subcommand("weight-sweep", "Vary one objective weight at a time");
    add_common(wsweep, common);
    add_weights(wsweep, weights);
    add_evo(wsweep, evo);
    wsweep->add_option("--omega1-grid", grid.omega1, "Explicit omega1 values");
    wsweep->add_option("--omega2-grid", grid.omega2, "Explicit omega2 values");
    wsweep->add_option("--omega3-grid", grid.omega3, "Explicit omega3 values");
    wsweep->add_option("--grid-points", grid.points, "Log-spaced points per omega")->capture_default_str();
    wsweep->add_option("--grid-span", grid.span, "Grid spans base/span .. base*span")->capture_default_str();
    wsweep->add_option("--reps", grid.reps, "Evolve repetitions per grid cell")->capture_default_str();

    auto* runs = app.add_subcommand("runs", "Repeated independent optimizations");
    add_common(runs, common);
    add_weights(runs, weights);
    add_evo(runs, evo);
    runs->add_option("--runs", n_runs, "Number of runs")->capture_default_str();

    auto* plot = app.add_subcommand("plot", "Render a result CSV to SVG");
    plot->add_option("--in", plot_in, "Input CSV")->required();
    plot->add_option("--out", common.out, "Output SVG path");
    plot->add_option("--kind", plot_kind, "auto, sweep, histogram or weight-sweep")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*evaluate) return cmd_evaluate(common, params, weights, args, out);
        if (*solve) return cmd_solve(common, args, out);
        if (*optimize) return cmd_optimize(common, evo, weights, args, out);
        if (*sample) return cmd_sample(common, params, n_samples, no_hidden, args, out);
        if (*sweep) return cmd_sweep(common, params, sizes, trials, no_hidden, args, out);
        if (*wsweep) return cmd_weight_sweep(common, evo, weights, grid, args, out);
        if (*runs) return cmd_runs(common, evo, weights, n_runs, args, out);
        if (*plot) return cmd_plot(plot_in, common.out, plot_kind, args, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace coinflip
