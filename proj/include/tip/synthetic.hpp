#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>

#include "tip/dataset.hpp"
#include "tip/random.hpp"
#include "tip/trust_core.hpp"

namespace tip {

/// How the humans' trust in each other evolves in generated data.
enum class PeerTrustMode {
    constant,  ///< held at the configured value every session
    drift,     ///< redrawn each session from a Beta centred on the configured value
};

/**
 * Ground-truth parameters for generated teams. Population means of the
 * generated ratings start near 0.56 (A) and 0.60 (B), settle within about
 * five sessions, and end near 0.82 (A) and 0.48 (B) at reliabilities 0.9
 * and 0.6 over 15 sessions.
 */
inline ParamSet default_true_params() {
    return {
        {"x:A", {5.6, 4.4, 16.0, 25.6, 16.0, 16.0}},
        {"y:A", {5.6, 4.4, 18.4, 29.44, 13.6, 18.4}},
        {"x:B", {6.0, 4.0, 16.0, 28.0, 16.0, 16.0}},
        {"y:B", {6.0, 4.0, 13.6, 23.8, 18.4, 13.6}},
    };
}

struct SynthConfig {
    int sessions = 15;
    int tasks_per_session = 10;
    double reliability_a = 0.9;
    double reliability_b = 0.6;
    ParamSet true_params = default_true_params();
    PeerTrustMode peer_mode = PeerTrustMode::constant;
    double trust_x_in_y = 0.8;
    double trust_y_in_x = 0.8;
    double drift_concentration = 50.0;
    /// When set, x always works with this robot and y with the other one.
    std::optional<Robot> fixed_robot_for_x;
    std::uint64_t seed = 0;

    void validate() const {
        if (sessions < 1) throw ConfigError("sessions", "must be positive");
        if (tasks_per_session < 1) throw ConfigError("tasks", "must be positive");
        if (!(reliability_a > 0.0 && reliability_a <= 1.0)) throw ConfigError("rel-a", "must lie in (0, 1]");
        if (!(reliability_b > 0.0 && reliability_b <= 1.0)) throw ConfigError("rel-b", "must lie in (0, 1]");
        for (double t : {trust_x_in_y, trust_y_in_x}) {
            if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("trust-xy/trust-yx", "must lie in [0, 1]");
        }
        if (!(drift_concentration > 0.0)) throw ConfigError("drift_concentration", "must be positive");
        for (Human h : {Human::x, Human::y}) {
            for (Robot r : {Robot::A, Robot::B}) {
                const auto it = true_params.find(pair_key(h, r));
                if (it == true_params.end()) throw ConfigError("pairs." + pair_key(h, r), "missing");
                it->second.validate();
            }
        }
    }
};

namespace detail {

/// Ratings are stored with six decimals; the generator works with the stored values.
inline double quantize_rating(double t) { return std::round(t * 1e6) / 1e6; }

}  // namespace detail

/**
 * Simulates one team session by session.
 *
 * Each session pairs every human with one robot (random unless fixed), each
 * robot scores Binomial(tasks, reliability) correct choices, the paired human
 * updates directly with p = correct / tasks and reports a sampled trust, and
 * the teammate updates indirectly from that report before rating the robot
 * it did not work with. Deterministic in cfg.seed.
 */
inline ExperimentDataset generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    RandomStream rng(cfg.seed);
    const auto params = [&](Human h, Robot r) -> const TrustParams& {
        return cfg.true_params.at(pair_key(h, r));
    };
    const auto idx = [](Human h, Robot r) {
        return static_cast<std::size_t>(h == Human::x ? 0 : 2) + (r == Robot::A ? 0 : 1);
    };
    const auto clamped = [](double v) { return TrustRating::clamped(v).value(); };
    const auto sample = [&](const ExperiencePair& e) {
        return detail::quantize_rating(sample_beta(e, rng).value());
    };
    const auto teammate_trust = [&](double centre) {
        if (cfg.peer_mode == PeerTrustMode::constant || centre <= 0.0 || centre >= 1.0) {
            return detail::quantize_rating(centre);
        }
        const double k = cfg.drift_concentration;
        return sample(ExperiencePair(centre * k, (1.0 - centre) * k));
    };

    std::vector<ExperiencePair> exp;
    std::array<double, 4> rating{};
    for (Human h : {Human::x, Human::y}) {
        for (Robot r : {Robot::A, Robot::B}) exp.push_back(params(h, r).prior());
    }

    ExperimentDataset d;
    d.tasks_per_session = cfg.tasks_per_session;
    SessionRow first;
    for (Human h : {Human::x, Human::y}) {
        for (Robot r : {Robot::A, Robot::B}) {
            rating[idx(h, r)] = sample(exp[idx(h, r)]);
            first.ratings[rating_column(h, r)] = rating[idx(h, r)];
        }
    }
    first.ratings[kXY] = detail::quantize_rating(cfg.trust_x_in_y);
    first.ratings[kYX] = detail::quantize_rating(cfg.trust_y_in_x);
    d.rows.push_back(first);

    for (int k = 1; k <= cfg.sessions; ++k) {
        SessionRow row;
        row.session = k;
        const Robot x_robot = cfg.fixed_robot_for_x ? *cfg.fixed_robot_for_x
                                                    : (rng.bernoulli(0.5) ? Robot::A : Robot::B);
        row.robot_x = x_robot;
        row.robot_y = other(x_robot);
        row.correct_a = rng.binomial(cfg.tasks_per_session, cfg.reliability_a);
        row.correct_b = rng.binomial(cfg.tasks_per_session, cfg.reliability_b);

        // Direct experience with the assigned robot, then a trust report.
        for (Human h : {Human::x, Human::y}) {
            const Robot r = *row.robot_of(h);
            const double p = static_cast<double>(*row.correct(r)) / cfg.tasks_per_session;
            exp[idx(h, r)] = direct_update(exp[idx(h, r)], params(h, r),
                                           PerformanceObservation::from_success(p));
        }
        std::array<double, 4> prev = rating;
        for (Human h : {Human::x, Human::y}) {
            const Robot r = *row.robot_of(h);
            rating[idx(h, r)] = sample(exp[idx(h, r)]);
        }

        row.ratings[kXY] = teammate_trust(cfg.trust_x_in_y);
        row.ratings[kYX] = teammate_trust(cfg.trust_y_in_x);

        // Indirect experience with the teammate's robot from the teammate's report.
        for (Human h : {Human::x, Human::y}) {
            const Robot r = other(*row.robot_of(h));
            const double discount = clamped(*row.ratings[teammate_column(h)]);
            exp[idx(h, r)] = indirect_update(exp[idx(h, r)], params(h, r), clamped(prev[idx(h, r)]),
                                             clamped(rating[idx(other(h), r)]), discount);
            rating[idx(h, r)] = sample(exp[idx(h, r)]);
        }

        for (Human h : {Human::x, Human::y}) {
            for (Robot r : {Robot::A, Robot::B}) row.ratings[rating_column(h, r)] = rating[idx(h, r)];
        }
        d.rows.push_back(row);
    }
    return d;
}

}  // namespace tip
