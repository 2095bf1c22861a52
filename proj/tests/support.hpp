#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tip/tip.hpp"

namespace tip::testing {

inline double uniform_in(RandomStream& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

/// Random complete history with K sessions and clamped ratings.
inline AgentHistory random_history(RandomStream& rng, std::size_t sessions) {
    AgentHistory h;
    const auto rating = [&] { return uniform_in(rng, 0.02, 0.98); };
    h.ratings.push_back(rating());
    h.peer_trust.push_back(rating());
    h.trust_in_peer.push_back(rating());
    for (std::size_t k = 1; k <= sessions; ++k) {
        SessionInteraction it;
        if (rng.bernoulli(0.5)) {
            it.kind = InteractionKind::direct;
            it.performance = PerformanceObservation::from_success(rng.below(11) / 10.0);
        } else {
            it.kind = InteractionKind::indirect;
        }
        h.interactions.push_back(it);
        h.ratings.push_back(rating());
        h.peer_trust.push_back(rating());
        h.trust_in_peer.push_back(rating());
    }
    return h;
}

/// Strictly positive random parameters, far enough from zero for a finite-difference step.
inline TrustParams random_theta(RandomStream& rng) {
    return {uniform_in(rng, 0.3, 6.0), uniform_in(rng, 0.3, 6.0), uniform_in(rng, 0.1, 4.0),
            uniform_in(rng, 0.1, 4.0), uniform_in(rng, 0.1, 4.0), uniform_in(rng, 0.1, 4.0)};
}

inline std::vector<double> ratings_of(const AgentHistory& h) {
    std::vector<double> t;
    for (const auto& v : h.ratings) t.push_back(*v);
    return t;
}

/// Reference likelihood: replays the update rules session by session and sums Beta log-densities.
inline std::vector<ExperiencePair> replay_experience(const AgentHistory& h, const TrustParams& theta) {
    std::vector<ExperiencePair> out{theta.prior()};
    for (std::size_t k = 1; k <= h.sessions(); ++k) {
        const SessionInteraction& it = h.interactions[k - 1];
        const ExperiencePair& prev = out.back();
        if (it.kind == InteractionKind::direct) {
            out.push_back(direct_update(prev, theta, *it.performance));
        } else {
            out.push_back(indirect_update(prev, theta, *h.ratings[k - 1], *h.peer_trust[k],
                                          *h.trust_in_peer[k]));
        }
    }
    return out;
}

inline double replay_log_likelihood(const AgentHistory& h, const TrustParams& theta) {
    const std::vector<ExperiencePair> e = replay_experience(h, theta);
    double sum = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) sum += log_beta_pdf(*h.ratings[k], e[k]);
    return sum;
}

/// Central finite-difference gradient of the replayed likelihood.
inline ParamVector finite_difference_gradient(const AgentHistory& h, const TrustParams& theta,
                                              double step = 1e-5) {
    ParamVector g{};
    for (std::size_t i = 0; i < 6; ++i) {
        ParamVector up = theta.to_array();
        ParamVector down = up;
        up[i] += step;
        down[i] -= step;
        g[i] = (replay_log_likelihood(h, TrustParams::from_array(up)) -
                replay_log_likelihood(h, TrustParams::from_array(down))) /
               (2.0 * step);
    }
    return g;
}

/// |a - b| scaled by the larger magnitude, with an absolute comparison near zero.
inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Random schedule and parameters from the range used for equilibrium checks.
struct CoupledInstance {
    TrustParams x;
    TrustParams y;
    ScheduleSpec sched;
};

inline CoupledInstance random_coupled_instance(RandomStream& rng) {
    const auto params = [&] {
        return TrustParams{uniform_in(rng, 0.5, 5.0), uniform_in(rng, 0.5, 5.0),
                           uniform_in(rng, 0.5, 3.0), uniform_in(rng, 0.5, 3.0),
                           uniform_in(rng, 0.0, 3.0), uniform_in(rng, 0.0, 3.0)};
    };
    CoupledInstance inst;
    inst.x = params();
    inst.y = params();
    inst.sched.m = 1 + static_cast<int>(rng.below(3));
    inst.sched.n = 1 + static_cast<int>(rng.below(3));
    inst.sched.reliability = uniform_in(rng, 0.2, 0.95);
    inst.sched.trust_x_in_y = uniform_in(rng, 0.3, 1.0);
    inst.sched.trust_y_in_x = uniform_in(rng, 0.3, 1.0);
    return inst;
}

/// Random dataset in canonical form: ratings on the six-decimal grid, some cells missing.
inline ExperimentDataset random_dataset(RandomStream& rng) {
    ExperimentDataset d;
    d.tasks_per_session = 1 + static_cast<int>(rng.below(20));
    const int sessions = static_cast<int>(rng.below(25));
    const auto rating = [&] { return static_cast<double>(rng.below(1000001)) / 1e6; };
    for (int k = 0; k <= sessions; ++k) {
        SessionRow row;
        row.session = k;
        if (k > 0) {
            row.robot_x = rng.bernoulli(0.5) ? Robot::A : Robot::B;
            row.robot_y = other(*row.robot_x);
            row.correct_a = static_cast<int>(rng.below(d.tasks_per_session + 1));
            row.correct_b = static_cast<int>(rng.below(d.tasks_per_session + 1));
        }
        for (auto& r : row.ratings) {
            if (k == 0 || !rng.bernoulli(0.15)) r = rating();
        }
        d.rows.push_back(row);
    }
    return d;
}

}  // namespace tip::testing
