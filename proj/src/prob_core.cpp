#include "coinflip/prob_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coinflip {

void require_probability(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " +
                                    std::to_string(x));
    }
}

Distribution4::Distribution4(const std::array<double, 4>& probs) : probs_(probs) {
    double sum = 0.0;
    for (double x : probs_) {
        require_probability(x, "distribution entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
        throw std::invalid_argument("distribution entries sum to " + std::to_string(sum) +
                                    ", expected 1");
    }
    if (sum != 1.0) {
        for (double& x : probs_) x /= sum;
    }
}

bool Distribution4::strictly_positive() const {
    for (double x : probs_) {
        if (!(x > 0.0)) return false;
    }
    return true;
}

CoinPair::CoinPair(double p_, double q_) : p(p_), q(q_) {
    require_probability(p, "p");
    require_probability(q, "q");
}

CircuitParams::CircuitParams(double w_, double p1_, double q1_, double p2_, double q2_)
    : w(w_), p1(p1_), q1(q1_), p2(p2_), q2(q2_) {
    require_probability(w, "w");
    require_probability(p1, "p1");
    require_probability(q1, "q1");
    require_probability(p2, "p2");
    require_probability(q2, "q2");
}

Distribution4 two_coin_product(const CoinPair& c) {
    return Distribution4({c.p * c.q, c.p * (1.0 - c.q), (1.0 - c.p) * c.q,
                          (1.0 - c.p) * (1.0 - c.q)});
}

double factorization_residual(const Distribution4& t) {
    return std::abs(t[0] * t[3] - t[1] * t[2]);
}

std::optional<CoinPair> solve_two_coins(const Distribution4& target, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (factorization_residual(target) > tol) return std::nullopt;

    // Marginals; clamp away rounding that could push them past 1.
    const double p = std::min(1.0, target[0] + target[1]);
    const double q = std::min(1.0, target[0] + target[2]);
    const CoinPair pair(p, q);
    const Distribution4 rebuilt = two_coin_product(pair);
    for (std::size_t i = 0; i < 4; ++i) {
        if (std::abs(rebuilt[i] - target[i]) > tol) return std::nullopt;
    }
    return pair;
}

Distribution4 exact_outcome_distribution(const CircuitParams& c) {
    const double a = c.w;
    const double b = 1.0 - c.w;
    return Distribution4({
        a * c.p1 * c.q1 + b * c.p2 * c.q2,
        a * c.p1 * (1.0 - c.q1) + b * c.p2 * (1.0 - c.q2),
        a * (1.0 - c.p1) * c.q1 + b * (1.0 - c.p2) * c.q2,
        a * (1.0 - c.p1) * (1.0 - c.q1) + b * (1.0 - c.p2) * (1.0 - c.q2),
    });
}

double kl_divergence(const Distribution4& v, const Distribution4& p) {
    if (!p.strictly_positive()) {
        throw std::domain_error("KL divergence reference distribution must be strictly positive");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (v[i] > 0.0) kl += v[i] * std::log(v[i] / p[i]);
    }
    // Rounding can leave a tiny negative residue when v == p.
    return kl < 0.0 ? 0.0 : kl;
}

double fairness_penalty(const CircuitParams& c) {
    return std::abs(c.p1 - 0.5) + std::abs(c.p2 - 0.5) + std::abs(c.q1 - 0.5) +
           std::abs(c.q2 - 0.5);
}

}  // namespace coinflip
