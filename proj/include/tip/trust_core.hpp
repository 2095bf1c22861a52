#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "tip/errors.hpp"
#include "tip/random.hpp"
#include "tip/special_functions.hpp"

namespace tip {

enum class InteractionKind { direct, indirect };

inline std::string_view to_string(InteractionKind k) {
    return k == InteractionKind::direct ? "direct" : "indirect";
}

/// Ratings read from data are clamped into [kRatingFloor, 1 - kRatingFloor].
inline constexpr double kRatingFloor = 1e-4;

/// Cumulative positive (alpha) and negative (beta) experience of one agent about another.
class ExperiencePair {
public:
    ExperiencePair(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
            throw DomainError("ExperiencePair: alpha and beta must be positive and finite");
        }
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    /// Variance of the Beta(alpha, beta) trust distribution.
    double variance() const noexcept {
        const double n = alpha_ + beta_;
        return alpha_ * beta_ / (n * n * (n + 1.0));
    }

    friend bool operator==(const ExperiencePair&, const ExperiencePair&) = default;

private:
    double alpha_;
    double beta_;
};

/// Parameter vector in the fixed order (alpha0, beta0, s, f, s_hat, f_hat).
using ParamVector = std::array<double, 6>;

enum ParamIndex : std::size_t { kAlpha0 = 0, kBeta0, kS, kF, kSHat, kFHat };

inline constexpr std::array<const char*, 6> kParamNames = {"alpha0", "beta0", "s",
                                                           "f",      "s_hat", "f_hat"};

/**
 * Six parameters of one human's trust in one robot: prior experience,
 * direct unit gains and indirect unit gains.
 *
 * A plain aggregate so fitted ablations (s = f = 0) can be represented;
 * validate() enforces the model constraints for user-supplied values.
 */
struct TrustParams {
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double s = 1.0;
    double f = 1.0;
    double s_hat = 1.0;
    double f_hat = 1.0;

    /// Throws ConfigError naming the first field that violates
    /// alpha0, beta0, s, f > 0 and s_hat, f_hat >= 0.
    void validate() const {
        const ParamVector v = to_array();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) {
                throw ConfigError(kParamNames[i], "must be finite");
            }
            if (i < kSHat && !(v[i] > 0.0)) {
                throw ConfigError(kParamNames[i], "must be positive");
            }
            if (i >= kSHat && v[i] < 0.0) {
                throw ConfigError(kParamNames[i], "must be non-negative");
            }
        }
    }

    ParamVector to_array() const { return {alpha0, beta0, s, f, s_hat, f_hat}; }

    static TrustParams from_array(const ParamVector& v) {
        return {v[kAlpha0], v[kBeta0], v[kS], v[kF], v[kSHat], v[kFHat]};
    }

    ExperiencePair prior() const { return {alpha0, beta0}; }

    friend bool operator==(const TrustParams&, const TrustParams&) = default;
};

/// Success and failure measures of one robot during one interaction.
class PerformanceObservation {
public:
    /// Requires p + p_bar = 1 unless `independent_failure` is set.
    PerformanceObservation(double p, double p_bar, bool independent_failure = false)
        : p_(p), p_bar_(p_bar) {
        if (!(p >= 0.0 && p <= 1.0) || !(p_bar >= 0.0 && p_bar <= 1.0)) {
            throw DomainError("PerformanceObservation: measures must lie in [0, 1]");
        }
        if (!independent_failure && std::abs(p + p_bar - 1.0) > 1e-9) {
            throw DomainError("PerformanceObservation: p + p_bar must equal 1");
        }
    }

    static PerformanceObservation from_success(double p) { return {p, 1.0 - p}; }

    double p() const noexcept { return p_; }
    double p_bar() const noexcept { return p_bar_; }

    friend bool operator==(const PerformanceObservation&, const PerformanceObservation&) = default;

private:
    double p_;
    double p_bar_;
};

/// A trust value strictly inside (0, 1).
class TrustRating {
public:
    explicit TrustRating(double value) : value_(value) {
        if (!(value > 0.0 && value < 1.0)) {
            throw DomainError("TrustRating: value must lie in (0, 1)");
        }
    }

    /// Accepts a raw rating in [0, 1] and clamps it away from the endpoints.
    static TrustRating clamped(double raw) {
        if (!(raw >= 0.0 && raw <= 1.0)) {
            throw DomainError("TrustRating: raw rating must lie in [0, 1]");
        }
        return TrustRating(std::clamp(raw, kRatingFloor, 1.0 - kRatingFloor));
    }

    double value() const noexcept { return value_; }
    operator double() const noexcept { return value_; }

private:
    double value_;
};

/// Mean of the Beta trust distribution.
inline double expected_trust(const ExperiencePair& e) noexcept {
    return e.alpha() / (e.alpha() + e.beta());
}

/// Experience after one direct interaction.
inline ExperiencePair direct_update(const ExperiencePair& e, const TrustParams& params,
                                    const PerformanceObservation& obs) {
    return {e.alpha() + params.s * obs.p(), e.beta() + params.f * obs.p_bar()};
}

/**
 * Experience after hearing a teammate's trust in the same robot.
 *
 * The gap between the teammate's report and the agent's own previous trust,
 * discounted by the agent's trust in the teammate, feeds positive experience
 * when the report is higher and negative experience when it is lower.
 */
inline ExperiencePair indirect_update(const ExperiencePair& e, const TrustParams& params,
                                      double own_prev_trust, double peer_trust,
                                      double trust_in_peer) {
    const double gap = peer_trust - own_prev_trust;
    if (gap >= 0.0) {
        return {e.alpha() + params.s_hat * trust_in_peer * gap, e.beta()};
    }
    return {e.alpha(), e.beta() + params.f_hat * trust_in_peer * (-gap)};
}

inline ExperiencePair indirect_update(const ExperiencePair& e, const TrustParams& params,
                                      TrustRating own_prev_trust, TrustRating peer_trust,
                                      TrustRating trust_in_peer) {
    return indirect_update(e, params, own_prev_trust.value(), peer_trust.value(),
                           trust_in_peer.value());
}

/// ln Beta(alpha + beta) - ln Gamma(alpha) - ln Gamma(beta) terms; independent of t.
inline double log_beta_normalizer(double alpha, double beta) {
    return log_gamma(alpha + beta) - log_gamma(alpha) - log_gamma(beta);
}

/// Log-density of Beta(alpha, beta) at t in (0, 1).
inline double log_beta_pdf(double t, const ExperiencePair& e) {
    if (!(t > 0.0 && t < 1.0)) {
        throw DomainError("log_beta_pdf: t must lie in (0, 1); clamp ratings first");
    }
    return log_beta_normalizer(e.alpha(), e.beta()) + (e.alpha() - 1.0) * std::log(t) +
           (e.beta() - 1.0) * std::log1p(-t);
}

/// One draw from Beta(alpha, beta), computed as G1 / (G1 + G2) with G1, G2 Gamma variates.
inline TrustRating sample_beta(const ExperiencePair& e, RandomStream& rng) {
    const double g1 = rng.gamma(e.alpha());
    const double g2 = rng.gamma(e.beta());
    double t = g1 / (g1 + g2);
    // Extreme shapes can round a draw onto an endpoint.
    if (!(t > 0.0)) t = std::numeric_limits<double>::min();
    if (!(t < 1.0)) t = std::nextafter(1.0, 0.0);
    return TrustRating(t);
}

}  // namespace tip
