#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coinflip/harness.hpp"
#include "coinflip/io.hpp"

using namespace coinflip;

namespace {

SweepConfig td_sweep(std::vector<std::uint64_t> sizes, std::size_t trials, std::uint64_t seed = 42) {
    return {std::move(sizes), trials, seed, resolve_device("td"), CircuitParams::td_reference(),
            Distribution4::die_target(), true};
}

}  // namespace

TEST_CASE("sweep config validation") {
    CHECK_THROWS(td_sweep({}, 10).validate());
    CHECK_THROWS(td_sweep({10, 10}, 10).validate());
    CHECK_THROWS(td_sweep({50, 10}, 10).validate());
    CHECK_THROWS(td_sweep({0, 10}, 10).validate());
    CHECK_THROWS(td_sweep({10}, 0).validate());
    CHECK_NOTHROW(td_sweep(kDefaultSampleSizes, 10).validate());
}

TEST_CASE("serial and parallel sweeps agree") {
    const SweepConfig c = td_sweep(kDefaultSampleSizes, 4);
    const SweepResult a = run_sample_sweep_serial(c);
    const SweepResult b = run_sample_sweep(c, 3);
    CHECK(a.rows == b.rows);
    CHECK(a.rows.size() == kDefaultSampleSizes.size() * 4);
    for (const auto& r : a.rows) {
        CHECK(r.counts[0] + r.counts[1] + r.counts[2] + r.counts[3] == r.sample_size);
    }
}

TEST_CASE("sweep cells reproduce from their recorded seed") {
    const SweepConfig c = td_sweep({10, 100, 1000}, 5);
    const SweepResult res = run_sample_sweep(c);
    const HiddenDependenceCircuit circuit{c.params, c.device, c.count_hidden_energy};
    for (const auto& row : res.rows) {
        Rng rng(row.substream_seed);
        const EmpiricalDistribution emp = sample_n(circuit, row.sample_size, rng);
        CHECK(emp.counts == row.counts);
        CHECK(emp.total_energy_fj == row.total_energy_fj);
    }
    // Adding sizes does not perturb existing cells' seeds.
    CHECK(sweep_cell_seed(42, 0, 3) == run_sample_sweep(td_sweep({10}, 5)).rows[3].substream_seed);
}

TEST_CASE("sweep trends") {
    SUBCASE("more samples lower KL") {
        const SweepResult r = run_sample_sweep(td_sweep({10, 2000}, 10));
        CHECK(r.mean_kl(2000) < r.mean_kl(10));
    }
    SUBCASE("deterministic circuit") {
        SweepConfig c = td_sweep({100}, 1);
        c.params = CircuitParams(1.0, 1.0, 1.0, 0.0, 0.0);
        const SweepResult r = run_sample_sweep(c);
        REQUIRE(r.rows.size() == 1);
        CHECK(r.rows[0].counts == std::array<std::uint64_t, 4>{100, 0, 0, 0});
        CHECK(r.rows[0].kl_nats == doctest::Approx(std::log(2.0)).epsilon(1e-14));
        CHECK(r.rows[0].total_energy_fj == 15000.0);
    }
    SUBCASE("energy is linear in n") {
        const SweepResult r = run_sample_sweep(td_sweep({10, 2000}, 10));
        // Per-trial energy / n has a size-independent mean; compare the two
        // means with the standard error of the n=10 batch (the noisier one).
        std::vector<double> small;
        for (const auto& row : r.rows) {
            if (row.sample_size == 10) small.push_back(row.total_energy_fj / 10.0);
        }
        double m = 0, s2 = 0;
        for (double x : small) m += x;
        m /= small.size();
        for (double x : small) s2 += (x - m) * (x - m);
        const double se = std::sqrt(s2 / (small.size() - 1)) / std::sqrt(double(small.size()));
        CHECK(std::abs(r.mean_energy(2000) / 2000.0 - r.mean_energy(10) / 10.0) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("sweep CSV layout") {
    const std::string csv = sweep_to_csv(run_sample_sweep(td_sweep({10}, 2)));
    const CsvTable t = parse_csv(csv);
    CHECK(t.header == std::vector<std::string>{"device", "sample_size", "trial", "substream_seed", "kl_nats",
                                               "total_energy_fj", "count0", "count1", "count2", "count3"});
    CHECK(t.rows.size() == 2);
    CHECK(t.cell(0, "device") == "td");
}

TEST_CASE("weight grids") {
    const WeightGrids g = WeightGrids::log_spaced({7500, 0.005, 0.5});
    REQUIRE(g.omega1.size() == 7);
    CHECK(g.omega1[0] == doctest::Approx(75.0));
    CHECK(g.omega1[3] == 7500.0);
    CHECK(g.omega1[6] == doctest::Approx(750000.0));
    CHECK(g.omega3[0] == doctest::Approx(0.005));
    for (std::size_t i = 1; i < 7; ++i) CHECK(g.omega2[i] > g.omega2[i - 1]);
}

TEST_CASE("weight sweep degenerate grid matches plain evolve") {
    EvoConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 30;
    cfg.seed = 5;
    const FitnessWeights base{7500, 0.005, 0.5};
    const DeviceSpec dev = resolve_device("mtj_she");
    const auto rows = run_weight_sweep({{7500}, {0.005}, {0.5}}, base, dev, cfg,
                                       Distribution4::die_target(), 1);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        EvoConfig single = cfg;
        single.seed = weight_cell_seed(5, r.varied_omega, 0, 0);
        CHECK(r.seed == single.seed);
        const OptimizationResult o = evolve(single, dev, base, Distribution4::die_target());
        CHECK(r.best_kl_nats == o.exact_kl);
        CHECK(r.best_energy_fj == o.exact_energy_fj);
    }
    CHECK_THROWS(run_weight_sweep({{}, {0.005}, {0.5}}, base, dev, cfg, Distribution4::die_target(), 1));

    const CsvTable t = parse_csv(weight_sweep_to_csv(rows));
    CHECK(t.header == std::vector<std::string>{"varied_omega", "omega1", "omega2", "omega3", "rep",
                                               "best_kl_nats", "best_energy_fj"});
    CHECK(t.cell(2, "varied_omega") == "omega3");
}

TEST_CASE("best_per_cell keeps the lowest-KL rep") {
    std::vector<WeightSweepRow> rows(4);
    rows[0] = {1, {1, 0, 0}, 0, 0, 0.3, 1};
    rows[1] = {1, {1, 0, 0}, 1, 0, 0.1, 2};
    rows[2] = {1, {2, 0, 0}, 0, 0, 0.2, 3};
    rows[3] = {1, {2, 0, 0}, 1, 0, 0.4, 4};
    const auto best = best_per_cell(rows);
    REQUIRE(best.size() == 2);
    CHECK(best[0].best_energy_fj == 2);
    CHECK(best[1].best_energy_fj == 3);
}

TEST_CASE("repeated optimizations") {
    EvoConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 25;
    cfg.seed = 77;
    const FitnessWeights w{7500, 0.005, 0.5};
    const DeviceSpec dev = resolve_device("td");
    const auto one = run_repeated_optimizations(1, dev, cfg, w, Distribution4::die_target());
    REQUIRE(one.size() == 1);
    EvoConfig single = cfg;
    single.seed = run_seed(77, 0);
    const OptimizationResult o = evolve(single, dev, w, Distribution4::die_target());
    CHECK(one[0].genome == o.best_genome);
    CHECK(one[0].fitness == o.best_fitness);

    const auto many = run_repeated_optimizations(4, dev, cfg, w, Distribution4::die_target(), 2);
    CHECK(many[0].genome == one[0].genome);
    const CsvTable t = parse_csv(runs_to_csv("td", many));
    CHECK(t.rows.size() == 4);
    CHECK(t.header.size() == 11);
    CHECK_THROWS(run_repeated_optimizations(0, dev, cfg, w, Distribution4::die_target()));
}

TEST_CASE("history CSV and result document") {
    EvoConfig cfg;
    cfg.population_size = 10;
    cfg.generations = 5;
    const FitnessWeights w;
    const DeviceSpec dev = resolve_device("td");
    const OptimizationResult r = evolve(cfg, dev, w, Distribution4::die_target());
    const CsvTable h = parse_csv(history_to_csv(r));
    CHECK(h.header == std::vector<std::string>{"generation", "best_fitness", "best_kl_nats", "best_fairness",
                                               "best_energy_fj", "w", "p1", "q1", "p2", "q2"});
    CHECK(h.rows.size() == 5);
    // Full precision survives the round trip.
    CHECK(h.number(4, "best_fitness") == r.best_fitness);
    const std::string doc = optimization_to_json(r, dev, w, cfg, Distribution4::die_target());
    CHECK(doc.find("\"exact_kl_nats\"") != std::string::npos);
    CHECK(doc.find("\"best_genome\"") != std::string::npos);
}
