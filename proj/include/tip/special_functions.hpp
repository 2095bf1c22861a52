#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "tip/errors.hpp"

namespace tip {

/**
 * Natural log of the Gamma function for x > 0.
 *
 * Lanczos approximation (g = 7, nine coefficients) for x >= 0.5; smaller
 * arguments are shifted up with ln Gamma(x) = ln Gamma(x + 1) - ln x so the
 * series never sees the region where it loses accuracy.
 */
inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: argument must be positive and finite");
    }
    if (x < 0.5) {
        return log_gamma(x + 1.0) - std::log(x);
    }
    static constexpr double g = 7.0;
    static constexpr std::array<double, 9> c = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

    const double z = x - 1.0;
    double series = c[0];
    for (int i = 1; i < 9; ++i) {
        series += c[i] / (z + static_cast<double>(i));
    }
    const double t = z + g + 0.5;
    static const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return half_log_two_pi + (z + 0.5) * std::log(t) - t + std::log(series);
}

/**
 * Digamma function psi(x) = d/dx ln Gamma(x) for x > 0.
 *
 * Shifts the argument above 6 with psi(x) = psi(x + 1) - 1/x, then applies
 * the asymptotic expansion in 1/x^2.
 */
inline double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("digamma: argument must be positive and finite");
    }
    double shift = 0.0;
    while (x < 6.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli-number coefficients B_2k / (2k)
    const double tail =
        inv2 * (1.0 / 12.0 -
        inv2 * (1.0 / 120.0 -
        inv2 * (1.0 / 252.0 -
        inv2 * (1.0 / 240.0 -
        inv2 * (1.0 / 132.0 -
        inv2 * (691.0 / 32760.0 -
        inv2 * (1.0 / 12.0)))))));
    return shift + std::log(x) - 0.5 * inv - tail;
}

}  // namespace tip
