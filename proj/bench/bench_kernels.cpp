// Serial vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "coinflip/evo_opt.hpp"
#include "coinflip/harness.hpp"

using namespace coinflip;

namespace {

std::vector<Scored> random_population(std::size_t n) {
    Rng rng(1);
    std::vector<Scored> pop(n);
    for (auto& s : pop) {
        for (double& g : s.genome.genes) g = rng.uniform();
    }
    return pop;
}

void BM_PopulationSerial(benchmark::State& state) {
    const DeviceSpec dev = resolve_device("td");
    const FitnessWeights w;
    const Distribution4 target = Distribution4::die_target();
    const FitnessContext ctx{dev, w, target};
    auto pop = random_population(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        evaluate_population_serial(pop, ctx);
        benchmark::DoNotOptimize(pop.data());
    }
}

void BM_PopulationParallel(benchmark::State& state) {
    const DeviceSpec dev = resolve_device("td");
    const FitnessWeights w;
    const Distribution4 target = Distribution4::die_target();
    const FitnessContext ctx{dev, w, target};
    auto pop = random_population(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        evaluate_population(pop, ctx, 0);
        benchmark::DoNotOptimize(pop.data());
    }
}

SweepConfig sweep_config() {
    return {kDefaultSampleSizes, 10, 42, resolve_device("td"), CircuitParams::td_reference(),
            Distribution4::die_target(), true};
}

void BM_SweepSerial(benchmark::State& state) {
    const SweepConfig c = sweep_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_sample_sweep_serial(c));
}

void BM_SweepParallel(benchmark::State& state) {
    const SweepConfig c = sweep_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_sample_sweep(c, 0));
}

}  // namespace

BENCHMARK(BM_PopulationSerial)->Arg(100)->Arg(10000);
BENCHMARK(BM_PopulationParallel)->Arg(100)->Arg(10000);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
