#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tip/errors.hpp"
#include "tip/special_functions.hpp"
#include "tip/trust_core.hpp"

namespace tip {

/// What happened between session k-1 and session k for one (human, robot) pair.
struct SessionInteraction {
    InteractionKind kind = InteractionKind::direct;
    std::optional<PerformanceObservation> performance;  ///< present for direct sessions
};

/**
 * Everything needed to fit one human's trust in one robot.
 *
 * The three rating series are indexed by session k = 0..K and hold clamped
 * values; an empty entry is a missing rating. `interactions[k - 1]`
 * describes session k.
 */
struct AgentHistory {
    std::vector<std::optional<double>> ratings;        ///< own trust in the robot
    std::vector<std::optional<double>> peer_trust;     ///< teammate's trust in the robot
    std::vector<std::optional<double>> trust_in_peer;  ///< own trust in the teammate
    std::vector<SessionInteraction> interactions;

    std::size_t sessions() const noexcept { return interactions.size(); }

    /// Indices k with a missing own rating.
    std::vector<std::size_t> missing() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < ratings.size(); ++k) {
            if (!ratings[k]) out.push_back(k);
        }
        return out;
    }

    bool complete() const {
        const auto has = [](const std::optional<double>& v) { return v.has_value(); };
        if (!std::all_of(ratings.begin(), ratings.end(), has)) return false;
        for (std::size_t k = 1; k <= sessions(); ++k) {
            if (interactions[k - 1].kind == InteractionKind::indirect &&
                (!peer_trust[k] || !trust_in_peer[k])) {
                return false;
            }
        }
        return true;
    }

    /// Structural checks: series lengths, initial rating, a performance record per direct session.
    void validate() const {
        const std::size_t n = sessions() + 1;
        if (ratings.size() != n || peer_trust.size() != n || trust_in_peer.size() != n) {
            throw MisuseError("AgentHistory: rating series must have K + 1 entries");
        }
        if (!ratings[0]) throw DomainError("AgentHistory: initial rating must be present");
        for (std::size_t k = 1; k < n; ++k) {
            const SessionInteraction& s = interactions[k - 1];
            if (s.kind == InteractionKind::direct && !s.performance) {
                throw MisuseError("AgentHistory: direct session " + std::to_string(k) +
                                  " has no performance record");
            }
        }
        for (const auto* series : {&ratings, &peer_trust, &trust_in_peer}) {
            for (const auto& v : *series) {
                if (v && !(*v > 0.0 && *v < 1.0)) {
                    throw DomainError("AgentHistory: ratings must be clamped into (0, 1)");
                }
            }
        }
    }
};

/// Carry-forward imputation: each missing entry takes the most recent observed value of its series.
inline AgentHistory impute_series(const AgentHistory& h) {
    h.validate();
    AgentHistory out = h;
    for (auto* series : {&out.ratings, &out.peer_trust, &out.trust_in_peer}) {
        std::optional<double> last;
        for (auto& v : *series) {
            if (v) {
                last = v;
            } else {
                v = last;
            }
        }
    }
    return out;
}

/// Copy of `h` with the last `k_hat` sessions' own, peer and teammate ratings removed.
inline AgentHistory hold_out_tail(const AgentHistory& h, std::size_t k_hat) {
    h.validate();
    if (k_hat == 0 || k_hat > h.sessions()) {
        throw MisuseError("hold_out_tail: K_hat must lie in [1, K]");
    }
    AgentHistory out = h;
    for (std::size_t k = h.sessions() + 1 - k_hat; k <= h.sessions(); ++k) {
        out.ratings[k].reset();
        out.peer_trust[k].reset();
        out.trust_in_peer[k].reset();
    }
    return out;
}

/// Cumulative performance sums (P, P_bar) and rectified trust-gap sums (Q, Q_bar) for k = 0..K.
struct SufficientSums {
    std::vector<double> p;
    std::vector<double> p_bar;
    std::vector<double> q;
    std::vector<double> q_bar;

    std::size_t size() const noexcept { return p.size(); }

    ExperiencePair experience(const TrustParams& theta, std::size_t k) const {
        return {theta.alpha0 + theta.s * p[k] + theta.s_hat * q[k],
                theta.beta0 + theta.f * p_bar[k] + theta.f_hat * q_bar[k]};
    }
};

inline SufficientSums build_sufficient_sums(const AgentHistory& h) {
    h.validate();
    if (!h.complete()) {
        throw MisuseError("build_sufficient_sums: history has missing entries; call impute_series first");
    }
    const std::size_t n = h.sessions() + 1;
    SufficientSums s;
    s.p.assign(n, 0.0);
    s.p_bar.assign(n, 0.0);
    s.q.assign(n, 0.0);
    s.q_bar.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        s.p[k] = s.p[k - 1];
        s.p_bar[k] = s.p_bar[k - 1];
        s.q[k] = s.q[k - 1];
        s.q_bar[k] = s.q_bar[k - 1];
        const SessionInteraction& it = h.interactions[k - 1];
        if (it.kind == InteractionKind::direct) {
            s.p[k] += it.performance->p();
            s.p_bar[k] += it.performance->p_bar();
        } else {
            const double gap = *h.peer_trust[k] - *h.ratings[k - 1];
            const double discount = *h.trust_in_peer[k];
            if (gap >= 0.0) {
                s.q[k] += discount * gap;
            } else {
                s.q_bar[k] -= discount * gap;
            }
        }
    }
    return s;
}

/**
 * Log-likelihood of a rating series over a chosen subset of sessions.
 *
 * For session k, alpha_k = alpha0 + s P_k + s_hat Q_k and
 * beta_k = beta0 + f P_bar_k + f_hat Q_bar_k are linear in the parameters,
 * so the gradient is sum_k C_k v_k where the coefficient rows C_k hold
 * (1, P_k, Q_k) and (1, P_bar_k, Q_bar_k) and never change during a fit,
 * and v_k carries the digamma and log-rating terms.
 */
class LogLikelihood {
public:
    LogLikelihood(SufficientSums sums, std::span<const double> ratings,
                  std::vector<std::size_t> included)
        : sums_(std::move(sums)), included_(std::move(included)) {
        if (ratings.size() != sums_.size()) {
            throw MisuseError("LogLikelihood: ratings and sums cover different session counts");
        }
        log_t_.reserve(ratings.size());
        log_1mt_.reserve(ratings.size());
        for (double t : ratings) {
            if (!(t > 0.0 && t < 1.0)) throw DomainError("LogLikelihood: ratings must lie in (0, 1)");
            log_t_.push_back(std::log(t));
            log_1mt_.push_back(std::log1p(-t));
        }
        for (std::size_t k : included_) {
            if (k >= sums_.size()) throw MisuseError("LogLikelihood: session index out of range");
        }
    }

    /// Every session contributes.
    LogLikelihood(SufficientSums sums, std::span<const double> ratings)
        : LogLikelihood(std::move(sums), ratings, all_indices(ratings.size())) {}

    const SufficientSums& sums() const noexcept { return sums_; }
    const std::vector<std::size_t>& included() const noexcept { return included_; }

    double value(const ParamVector& theta) const {
        double h = 0.0;
        for (std::size_t k : included_) {
            const auto [a, b] = alpha_beta(theta, k);
            if (!(a > 0.0) || !(b > 0.0)) return -std::numeric_limits<double>::infinity();
            h += log_beta_normalizer(a, b) + (a - 1.0) * log_t_[k] + (b - 1.0) * log_1mt_[k];
        }
        return h;
    }

    ParamVector gradient(const ParamVector& theta) const {
        ParamVector g{};
        for (std::size_t k : included_) {
            const auto [a, b] = alpha_beta(theta, k);
            const double psi_sum = digamma(a + b);
            const double d_alpha = psi_sum - digamma(a) + log_t_[k];
            const double d_beta = psi_sum - digamma(b) + log_1mt_[k];
            g[kAlpha0] += d_alpha;
            g[kBeta0] += d_beta;
            g[kS] += sums_.p[k] * d_alpha;
            g[kF] += sums_.p_bar[k] * d_beta;
            g[kSHat] += sums_.q[k] * d_alpha;
            g[kFHat] += sums_.q_bar[k] * d_beta;
        }
        return g;
    }

private:
    static std::vector<std::size_t> all_indices(std::size_t n) {
        std::vector<std::size_t> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = i;
        return v;
    }

    std::pair<double, double> alpha_beta(const ParamVector& th, std::size_t k) const {
        return {th[kAlpha0] + th[kS] * sums_.p[k] + th[kSHat] * sums_.q[k],
                th[kBeta0] + th[kF] * sums_.p_bar[k] + th[kFHat] * sums_.q_bar[k]};
    }

    SufficientSums sums_;
    std::vector<std::size_t> included_;
    std::vector<double> log_t_;
    std::vector<double> log_1mt_;
};

inline double log_likelihood(const TrustParams& theta, const SufficientSums& sums,
                             std::span<const double> ratings) {
    return LogLikelihood(sums, ratings).value(theta.to_array());
}

/// Analytic gradient in the order (alpha0, beta0, s, f, s_hat, f_hat).
inline ParamVector gradient(const TrustParams& theta, const SufficientSums& sums,
                            std::span<const double> ratings) {
    return LogLikelihood(sums, ratings).gradient(theta.to_array());
}

enum class ModelVariant { tip, direct_only, indirect_only };

inline std::string_view to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::tip: return "tip";
        case ModelVariant::direct_only: return "direct";
        case ModelVariant::indirect_only: return "indirect";
    }
    return "unknown";
}

/// Coordinates held at zero by a variant.
inline std::array<bool, 6> frozen_mask(ModelVariant v) {
    switch (v) {
        case ModelVariant::direct_only: return {false, false, false, false, true, true};
        case ModelVariant::indirect_only: return {false, false, true, true, false, false};
        case ModelVariant::tip: break;
    }
    return {};
}

struct FitOptions {
    int max_iterations = 100000;
    double gradient_tolerance = 1e-6;
    double armijo_c = 1e-4;
    double initial_step = 1.0;
    double floor = 1e-6;
    /// Open each line search at the Barzilai-Borwein step instead of initial_step.
    bool spectral_step = true;
};

struct FitReport {
    TrustParams theta_star;
    std::vector<double> loglik_trajectory;
    std::vector<double> expected_trust_series;  ///< mu_k for k = 0..K
    int iterations = 0;
    bool converged = false;
    ModelVariant model_variant = ModelVariant::tip;
    std::optional<std::string> warning;

    double final_loglik() const { return loglik_trajectory.back(); }
};

/// Expected trust mu_k = alpha_k / (alpha_k + beta_k) for every session.
inline std::vector<double> expected_trust_series(const TrustParams& theta, const SufficientSums& sums) {
    std::vector<double> mu;
    mu.reserve(sums.size());
    for (std::size_t k = 0; k < sums.size(); ++k) {
        const double a = theta.alpha0 + theta.s * sums.p[k] + theta.s_hat * sums.q[k];
        const double b = theta.beta0 + theta.f * sums.p_bar[k] + theta.f_hat * sums.q_bar[k];
        mu.push_back(a / (a + b));
    }
    return mu;
}

/**
 * Projected gradient ascent on a concave log-likelihood.
 *
 * Starts from all free coordinates at 1 and frozen ones at 0. Each step
 * tries a trial step (initial_step, or the Barzilai-Borwein step from the
 * previous move when spectral_step is set), halving until the Armijo
 * condition holds on the projected move, then clamps free coordinates to
 * [floor, inf). Stops when the projected gradient's sup-norm drops below
 * the tolerance.
 */
inline FitReport maximize(const LogLikelihood& objective, ModelVariant variant,
                          const FitOptions& options = {}) {
    const std::array<bool, 6> frozen = frozen_mask(variant);
    ParamVector theta;
    for (std::size_t i = 0; i < 6; ++i) theta[i] = frozen[i] ? 0.0 : 1.0;

    FitReport report;
    report.model_variant = variant;
    double h = objective.value(theta);
    if (!std::isfinite(h)) {
        throw NumericError("fit: log-likelihood is not finite at the starting point (value " +
                           std::to_string(h) + ", " + std::to_string(objective.included().size()) +
                           " sessions)");
    }
    report.loglik_trajectory.push_back(h);

    ParamVector prev_theta{};
    ParamVector prev_grad{};
    bool have_prev = false;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        ParamVector g = objective.gradient(theta);
        double sup = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            if (frozen[i]) {
                g[i] = 0.0;
                continue;
            }
            const bool blocked = theta[i] <= options.floor && g[i] < 0.0;
            if (!blocked) sup = std::max(sup, std::abs(g[i]));
        }
        if (sup < options.gradient_tolerance) {
            report.converged = true;
            break;
        }

        double step = options.initial_step;
        if (options.spectral_step && have_prev) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < 6; ++i) {
                const double ds = theta[i] - prev_theta[i];
                ss += ds * ds;
                sy += ds * (prev_grad[i] - g[i]);
            }
            if (sy > 0.0) step = std::clamp(ss / sy, 1e-12, 1e12);
        }
        bool accepted = false;
        ParamVector candidate{};
        double h_candidate = h;
        while (step > 1e-30) {
            double ascent = 0.0;
            for (std::size_t i = 0; i < 6; ++i) {
                candidate[i] = frozen[i] ? 0.0 : std::max(options.floor, theta[i] + step * g[i]);
                ascent += g[i] * (candidate[i] - theta[i]);
            }
            h_candidate = objective.value(candidate);
            if (ascent > 0.0 && std::isfinite(h_candidate) &&
                h_candidate >= h + options.armijo_c * ascent && h_candidate > h) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no ascent possible at working precision
        prev_theta = theta;
        prev_grad = g;
        have_prev = true;
        theta = candidate;
        h = h_candidate;
        report.loglik_trajectory.push_back(h);
    }

    report.iterations = iter;
    report.theta_star = TrustParams::from_array(theta);
    report.expected_trust_series = expected_trust_series(report.theta_star, objective.sums());
    return report;
}

namespace detail {

inline std::vector<double> rating_values(const AgentHistory& complete) {
    std::vector<double> t;
    t.reserve(complete.ratings.size());
    for (const auto& v : complete.ratings) t.push_back(*v);
    return t;
}

}  // namespace detail

/// Maximum-likelihood parameters for a complete history.
inline FitReport fit(const AgentHistory& h, ModelVariant variant, const FitOptions& options = {}) {
    SufficientSums sums = build_sufficient_sums(h);
    const std::vector<double> t = detail::rating_values(h);
    return maximize(LogLikelihood(std::move(sums), t), variant, options);
}

struct MissingEstimate {
    FitReport report;
    std::vector<std::pair<std::size_t, double>> predictions;  ///< (u, mu_u) for each missing u
};

/**
 * Fits on the observed sessions only, with missing ratings carried forward
 * inside the experience sums, and predicts each missing rating by mu_u.
 */
inline MissingEstimate estimate_missing(const AgentHistory& h, ModelVariant variant,
                                        const FitOptions& options = {}) {
    h.validate();
    const std::vector<std::size_t> missing = h.missing();
    const AgentHistory filled = impute_series(h);
    std::vector<std::size_t> observed;
    for (std::size_t k = 0; k < h.ratings.size(); ++k) {
        if (h.ratings[k]) observed.push_back(k);
    }
    SufficientSums sums = build_sufficient_sums(filled);
    const std::vector<double> t = detail::rating_values(filled);
    MissingEstimate out{maximize(LogLikelihood(std::move(sums), t, observed), variant, options), {}};
    if (observed.size() == 1 && h.ratings.size() > 1) {
        out.report.warning = "underdetermined fit: only the initial rating is observed";
    }
    for (std::size_t u : missing) {
        out.predictions.emplace_back(u, out.report.expected_trust_series[u]);
    }
    return out;
}

}  // namespace tip
