#pragma once

// Exact analytics for two-coin circuits: outcome distributions, KL
// divergence, two-coin solvability and the fairness penalty.
//
// Outcome coding throughout: 0 = HH, 1 = HT, 2 = TH, 3 = TT
// (coin 1 face first).

#include <array>
#include <optional>
#include <stdexcept>

namespace coinflip {

inline constexpr double kDistributionSumTolerance = 1e-9;
inline constexpr double kSolveTolerance = 1e-9;

/// Throws std::invalid_argument unless 0 <= x <= 1 (NaN rejected).
void require_probability(double x, const char* what);

/// Probability vector over the four outcomes.
///
/// Construction normalizes inputs whose sum is within 1e-9 of one and
/// rejects anything further off, as well as entries outside [0, 1].
class Distribution4 {
public:
    explicit Distribution4(const std::array<double, 4>& probs);

    static Distribution4 uniform() { return Distribution4({0.25, 0.25, 0.25, 0.25}); }

    /// The loaded die (1/2, 1/6, 1/6, 1/6).
    static Distribution4 die_target() {
        return Distribution4({1.0 / 2.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0});
    }

    double operator[](std::size_t i) const { return probs_[i]; }
    const std::array<double, 4>& probs() const { return probs_; }
    bool strictly_positive() const;

    friend bool operator==(const Distribution4&, const Distribution4&) = default;

private:
    std::array<double, 4> probs_;
};

struct CoinPair {
    double p;  // coin 1 heads
    double q;  // coin 2 heads

    CoinPair(double p_, double q_);
};

/// Hidden-dependence circuit parameters. Set 1 (coins p1, q1) is chosen
/// when the hidden coin lands heads (probability w), set 2 otherwise.
struct CircuitParams {
    double w;
    double p1;
    double q1;
    double p2;
    double q2;

    CircuitParams(double w_, double p1_, double q1_, double p2_, double q2_);

    /// Parameters reported for the optimized tunnel-diode circuit.
    static CircuitParams td_reference() { return {0.714, 0.891, 0.766, 0.107, 0.419}; }
    /// Parameters reported for the optimized MTJ-SHE circuit.
    static CircuitParams mtj_she_reference() { return {0.306, 0.448, 0.439, 0.746, 0.749}; }
    /// Parameters reported in the prose for the MTJ-VCMA circuit.
    static CircuitParams mtj_vcma_reference() { return {0.233, 0.237, 0.199, 0.781, 0.805}; }

    /// Swaps the roles of the two sets: (1-w, set 2, set 1).
    CircuitParams swapped() const { return {1.0 - w, p2, q2, p1, q1}; }

    friend bool operator==(const CircuitParams&, const CircuitParams&) = default;
};

Distribution4 two_coin_product(const CoinPair& pair);

/// |v0 v3 - v1 v2|; zero exactly when the target factorizes as two
/// independent coins.
double factorization_residual(const Distribution4& target);

/// Returns the independent two-coin representation of target, or empty when
/// none exists within tol.
std::optional<CoinPair> solve_two_coins(const Distribution4& target,
                                        double tol = kSolveTolerance);

Distribution4 exact_outcome_distribution(const CircuitParams& params);

/// Sum of v_i ln(v_i / p_i) in nats with 0 ln 0 = 0. Throws std::domain_error
/// if any entry of p is zero.
double kl_divergence(const Distribution4& v, const Distribution4& p);

/// |p1-.5| + |p2-.5| + |q1-.5| + |q2-.5|. The hidden weight is not included.
double fairness_penalty(const CircuitParams& params);

}  // namespace coinflip
