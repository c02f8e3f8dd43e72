#include "coinflip/circuit_sim.hpp"

#include <stdexcept>

namespace coinflip {

EmpiricalDistribution& EmpiricalDistribution::operator+=(const EmpiricalDistribution& other) {
    for (std::size_t i = 0; i < 4; ++i) counts[i] += other.counts[i];
    total += other.total;
    total_energy_fj += other.total_energy_fj;
    return *this;
}

std::array<double, 4> EmpiricalDistribution::frequencies() const {
    std::array<double, 4> f{};
    if (total == 0) return f;
    for (std::size_t i = 0; i < 4; ++i) {
        f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return f;
}

Sample sample_once(const HiddenDependenceCircuit& c, Rng& rng) {
    const CircuitParams& k = c.params;
    const FlipRecord hidden = flip(c.device, k.w, rng);
    const double p = hidden.heads ? k.p1 : k.p2;
    const double q = hidden.heads ? k.q1 : k.q2;
    const FlipRecord coin1 = flip(c.device, p, rng);
    const FlipRecord coin2 = flip(c.device, q, rng);

    // HH -> 0, HT -> 1, TH -> 2, TT -> 3
    const int outcome = (coin1.heads ? 0 : 2) + (coin2.heads ? 0 : 1);
    double energy = coin1.energy_fj + coin2.energy_fj;
    if (c.count_hidden_energy) energy += hidden.energy_fj;
    return {outcome, energy};
}

EmpiricalDistribution sample_n(const HiddenDependenceCircuit& circuit, std::uint64_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("sample count must be at least 1");
    EmpiricalDistribution emp;
    long double energy = 0.0L;
    for (std::uint64_t i = 0; i < n; ++i) {
        const Sample s = sample_once(circuit, rng);
        ++emp.counts[static_cast<std::size_t>(s.outcome)];
        energy += s.energy_fj;
    }
    emp.total = n;
    emp.total_energy_fj = static_cast<double>(energy);
    return emp;
}

double empirical_kl(const EmpiricalDistribution& emp, const Distribution4& target) {
    if (emp.total == 0) throw std::invalid_argument("empirical distribution is empty");
    return kl_divergence(Distribution4(emp.frequencies()), target);
}

double expected_energy_per_sample(const HiddenDependenceCircuit& c) {
    const CircuitParams& k = c.params;
    const auto e = [&](double p) { return expected_energy_per_flip(c.device, p); };
    double energy = k.w * (e(k.p1) + e(k.q1)) + (1.0 - k.w) * (e(k.p2) + e(k.q2));
    if (c.count_hidden_energy) energy += e(k.w);
    return energy;
}

}  // namespace coinflip
