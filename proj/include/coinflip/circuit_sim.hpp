#pragma once

// Monte Carlo simulation of the hidden-dependence circuit.

#include <array>
#include <cstdint>

#include "coinflip/devices.hpp"
#include "coinflip/prob_core.hpp"
#include "coinflip/rng.hpp"

namespace coinflip {

struct HiddenDependenceCircuit {
    CircuitParams params;
    DeviceSpec device;
    /// Charge the hidden selector flip to the sample's energy.
    bool count_hidden_energy = true;
};

struct Sample {
    int outcome;  // 0..3
    double energy_fj;
};

/// Outcome tallies plus accumulated energy. Merging is entrywise addition.
struct EmpiricalDistribution {
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t total = 0;
    double total_energy_fj = 0.0;

    EmpiricalDistribution& operator+=(const EmpiricalDistribution& other);
    std::array<double, 4> frequencies() const;

    friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;
};

/// Flips hidden, coin 1, coin 2 in that order from rng.
Sample sample_once(const HiddenDependenceCircuit& circuit, Rng& rng);

/// n draws. Throws std::invalid_argument for n == 0.
EmpiricalDistribution sample_n(const HiddenDependenceCircuit& circuit, std::uint64_t n, Rng& rng);

/// KL of the empirical frequencies against target. Throws
/// std::invalid_argument on an empty distribution.
double empirical_kl(const EmpiricalDistribution& emp, const Distribution4& target);

/// Closed-form expected energy of one sample.
double expected_energy_per_sample(const HiddenDependenceCircuit& circuit);

}  // namespace coinflip
