#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tip/errors.hpp"
#include "tip/trust_core.hpp"

namespace tip {

/**
 * Alternating interaction schedule of two humans x and y with one robot of
 * constant reliability. Each block holds m direct interactions of x followed
 * by n direct interactions of y; after every direct interaction the actor
 * tells the other human its trust.
 */
struct ScheduleSpec {
    int m = 1;
    int n = 1;
    double reliability = 0.5;
    double trust_x_in_y = 1.0;
    double trust_y_in_x = 1.0;

    void validate() const {
        if (m < 0 || n < 0) throw ConfigError("m/n", "interaction counts must be non-negative");
        if (m == 0 && n == 0) throw ConfigError("m/n", "m and n cannot both be zero");
        if (!(reliability > 0.0 && reliability < 1.0)) {
            throw ConfigError("reliability", "must lie in (0, 1)");
        }
        if (!(trust_x_in_y > 0.0 && trust_x_in_y <= 1.0)) {
            throw ConfigError("trust_x_in_y", "must lie in (0, 1]");
        }
        if (!(trust_y_in_x > 0.0 && trust_y_in_x <= 1.0)) {
            throw ConfigError("trust_y_in_x", "must lie in (0, 1]");
        }
    }
};

/// Experience one agent gains per schedule block in the long run.
struct AgentGains {
    double direct_pos = 0.0;    ///< own turns, success side
    double direct_neg = 0.0;    ///< own turns, failure side
    double indirect_pos = 0.0;  ///< teammate's turns, per unit of positive trust gap
    double indirect_neg = 0.0;  ///< teammate's turns, per unit of negative trust gap
};

struct LongRunGains {
    AgentGains x;
    AgentGains y;
};

enum class EquilibriumCase { case_one, case_two, closed_form_n0, closed_form_m0 };

inline std::string_view to_string(EquilibriumCase c) {
    switch (c) {
        case EquilibriumCase::case_one: return "case_one";
        case EquilibriumCase::case_two: return "case_two";
        case EquilibriumCase::closed_form_n0: return "closed_form_n0";
        case EquilibriumCase::closed_form_m0: return "closed_form_m0";
    }
    return "unknown";
}

struct Equilibrium {
    double t_x = 0.0;
    double t_y = 0.0;
    EquilibriumCase case_used = EquilibriumCase::case_one;
    double residual = 0.0;
    int iterations = 0;
    /// Newton gave up and the grid search supplied the answer.
    bool used_fallback = false;
    /// Distinct interior roots seen by the grid search (1 for other methods).
    int roots_located = 1;
};

inline LongRunGains long_run_gains(const TrustParams& params_x, const TrustParams& params_y,
                                   const ScheduleSpec& sched) {
    sched.validate();
    const double r = sched.reliability;
    const double r_bar = 1.0 - r;
    const double m = sched.m;
    const double n = sched.n;
    LongRunGains g;
    g.x.direct_pos = m * params_x.s * r;
    g.x.direct_neg = m * params_x.f * r_bar;
    g.x.indirect_pos = n * sched.trust_x_in_y * params_x.s_hat;
    g.x.indirect_neg = n * sched.trust_x_in_y * params_x.f_hat;
    g.y.direct_pos = n * params_y.s * r;
    g.y.direct_neg = n * params_y.f * r_bar;
    g.y.indirect_pos = m * sched.trust_y_in_x * params_y.s_hat;
    g.y.indirect_neg = m * sched.trust_y_in_x * params_y.f_hat;
    return g;
}

/// case_one when x's direct gains favour the robot at least as much as y's; ties go to case_one.
inline EquilibriumCase select_case(const LongRunGains& g) {
    return g.x.direct_pos * g.y.direct_neg >= g.x.direct_neg * g.y.direct_pos
               ? EquilibriumCase::case_one
               : EquilibriumCase::case_two;
}

namespace detail {

/**
 * Equilibrium equations of the two-agent system rewritten as polynomials.
 *
 * The "leader" is the agent whose trust ends up higher; it only receives
 * negative indirect experience while the follower only receives positive
 * indirect experience. With u = t_leader and w = 1 - t_follower:
 *
 *   f1 = Fh u^2 + Fh w u + (F + S - Fh) u - S
 *   f2 = Sh w^2 + Sh w u + (S' + F' - Sh) w - F'
 */
struct CoupledSystem {
    double lead_pos, lead_neg, lead_indirect_neg;
    double follow_pos, follow_neg, follow_indirect_pos;

    std::array<double, 2> values(double u, double w) const {
        const double fh = lead_indirect_neg;
        const double sh = follow_indirect_pos;
        return {fh * u * u + fh * w * u + (lead_neg + lead_pos - fh) * u - lead_pos,
                sh * w * w + sh * w * u + (follow_pos + follow_neg - sh) * w - follow_neg};
    }

    /// Row-major 2x2 Jacobian with respect to (u, w).
    std::array<double, 4> jacobian(double u, double w) const {
        const double fh = lead_indirect_neg;
        const double sh = follow_indirect_pos;
        return {2.0 * fh * u + fh * w + lead_neg + lead_pos - fh, fh * u, sh * w,
                2.0 * sh * w + sh * u + follow_pos + follow_neg - sh};
    }

    double residual(double u, double w) const {
        const auto v = values(u, w);
        return std::max(std::abs(v[0]), std::abs(v[1]));
    }
};

inline CoupledSystem coupled_system(const LongRunGains& g, EquilibriumCase c) {
    if (c == EquilibriumCase::case_one) {
        return {g.x.direct_pos, g.x.direct_neg, g.x.indirect_neg,
                g.y.direct_pos, g.y.direct_neg, g.y.indirect_pos};
    }
    return {g.y.direct_pos, g.y.direct_neg, g.y.indirect_neg,
            g.x.direct_pos, g.x.direct_neg, g.x.indirect_pos};
}

/// Map (t_x, t_y) to the system's (u, w) coordinates and back.
inline std::pair<double, double> to_system(EquilibriumCase c, double t_x, double t_y) {
    return c == EquilibriumCase::case_one ? std::pair{t_x, 1.0 - t_y} : std::pair{t_y, 1.0 - t_x};
}

inline std::pair<double, double> from_system(EquilibriumCase c, double u, double w) {
    return c == EquilibriumCase::case_one ? std::pair{u, 1.0 - w} : std::pair{1.0 - w, u};
}

inline void require_coupled(const ScheduleSpec& sched) {
    sched.validate();
    if (sched.m == 0 || sched.n == 0) {
        throw MisuseError("coupled equilibrium needs m > 0 and n > 0; use closed_form_degenerate");
    }
}

}  // namespace detail

/**
 * Closed-form equilibrium when only one human works with the robot.
 * `direct_agent` is x's parameters when n = 0 and y's when m = 0; both
 * humans settle at s r / (f (1 - r) + s r).
 */
inline Equilibrium closed_form_degenerate(const TrustParams& direct_agent,
                                          const ScheduleSpec& sched) {
    sched.validate();
    if (sched.m > 0 && sched.n > 0) {
        throw MisuseError("closed_form_degenerate: requires m = 0 or n = 0");
    }
    const double r = sched.reliability;
    const double pos = direct_agent.s * r;
    const double neg = direct_agent.f * (1.0 - r);
    const double t = pos / (neg + pos);
    Equilibrium eq;
    eq.t_x = t;
    eq.t_y = t;
    eq.case_used = sched.n == 0 ? EquilibriumCase::closed_form_n0 : EquilibriumCase::closed_form_m0;
    eq.residual = std::abs(pos * (1.0 - t) - neg * t);
    eq.iterations = 0;
    return eq;
}

/**
 * Exhaustive search over the closed unit square for roots of the selected
 * case's equations.
 *
 * A 201 x 201 coarse grid is scanned and each local minimum of
 * max(|f1|, |f2|) is refined by three rounds of window shrinkage
 * (factor 20 per round). Roots on the boundary are discarded; the
 * equilibrium lies strictly inside the square. Throws NumericError when no
 * interior root reaches residual 1e-4. Schedules with m = 0 or n = 0 are
 * accepted, which gives an independent check of closed_form_degenerate.
 */
inline Equilibrium grid_oracle(const LongRunGains& g, const ScheduleSpec& sched) {
    sched.validate();
    const EquilibriumCase c = select_case(g);
    const detail::CoupledSystem sys = detail::coupled_system(g, c);

    constexpr int coarse = 201;
    constexpr double coarse_step = 1.0 / (coarse - 1);
    std::vector<double> field(static_cast<std::size_t>(coarse * coarse));
    auto at = [&](int i, int j) -> double& { return field[static_cast<std::size_t>(i * coarse + j)]; };
    for (int i = 0; i < coarse; ++i) {
        for (int j = 0; j < coarse; ++j) {
            at(i, j) = sys.residual(i * coarse_step, j * coarse_step);
        }
    }

    struct Candidate {
        double residual, u, w;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < coarse; ++i) {
        for (int j = 0; j < coarse; ++j) {
            const double here = at(i, j);
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= coarse || b >= coarse) continue;
                    if (at(a, b) < here) {
                        is_min = false;
                        break;
                    }
                }
            }
            if (is_min) candidates.push_back({here, i * coarse_step, j * coarse_step});
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.residual < b.residual; });
    if (candidates.size() > 32) candidates.resize(32);

    auto refine = [&](Candidate best) {
        constexpr int points = 201;
        double step = coarse_step;
        for (int round = 0; round < 3; ++round) {
            const double half_width = 5.0 * step;
            const double fine = 2.0 * half_width / (points - 1);
            // Re-centre while the minimum sits on the window edge.
            for (int shift = 0; shift < 50; ++shift) {
                const double u0 = best.u - half_width;
                const double w0 = best.w - half_width;
                int bi = 0, bj = 0;
                Candidate local = best;
                for (int i = 0; i < points; ++i) {
                    const double u = u0 + i * fine;
                    if (u < 0.0 || u > 1.0) continue;
                    for (int j = 0; j < points; ++j) {
                        const double w = w0 + j * fine;
                        if (w < 0.0 || w > 1.0) continue;
                        const double res = sys.residual(u, w);
                        if (res < local.residual) {
                            local = {res, u, w};
                            bi = i;
                            bj = j;
                        }
                    }
                }
                const bool moved = local.u != best.u || local.w != best.w;
                best = local;
                const bool on_edge = bi == 0 || bj == 0 || bi == points - 1 || bj == points - 1;
                if (!moved || !on_edge) break;
            }
            step = fine;
        }
        return best;
    };

    constexpr double boundary_margin = 1e-6;
    std::vector<Candidate> roots;
    for (const Candidate& start : candidates) {
        const Candidate r = refine(start);
        if (r.residual >= 1e-4) continue;
        if (r.u < boundary_margin || r.u > 1.0 - boundary_margin || r.w < boundary_margin ||
            r.w > 1.0 - boundary_margin) {
            continue;
        }
        const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Candidate& k) {
            return std::abs(k.u - r.u) < 1e-4 && std::abs(k.w - r.w) < 1e-4;
        });
        if (!duplicate) roots.push_back(r);
    }
    if (roots.empty()) {
        throw NumericError("grid_oracle: no equilibrium located");
    }
    const auto best = *std::min_element(roots.begin(), roots.end(), [](const Candidate& a, const Candidate& b) {
        return a.residual < b.residual;
    });
    const auto [t_x, t_y] = detail::from_system(c, best.u, best.w);
    Equilibrium eq;
    eq.t_x = t_x;
    eq.t_y = t_y;
    eq.case_used = c;
    eq.residual = best.residual;
    eq.iterations = 3;
    eq.roots_located = static_cast<int>(roots.size());
    return eq;
}

/**
 * Newton iteration on the polynomial form of the selected case, started at
 * (0.5, 0.5) with iterates clamped to [1e-9, 1 - 1e-9]^2. A singular Jacobian
 * or 200 iterations without reaching residual 1e-10 hands the problem to
 * grid_oracle and marks the result with used_fallback.
 */
inline Equilibrium newton_solve(const LongRunGains& g, const ScheduleSpec& sched) {
    detail::require_coupled(sched);
    const EquilibriumCase c = select_case(g);
    const detail::CoupledSystem sys = detail::coupled_system(g, c);

    constexpr double lo = 1e-9;
    constexpr double hi = 1.0 - 1e-9;
    constexpr int max_iterations = 200;
    double u = 0.5;
    double w = 0.5;
    bool singular = false;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        const auto f = sys.values(u, w);
        const auto j = sys.jacobian(u, w);
        const double det = j[0] * j[3] - j[1] * j[2];
        if (!std::isfinite(det) || std::abs(det) < 1e-300) {
            singular = true;
            break;
        }
        const double du = (j[3] * f[0] - j[1] * f[1]) / det;
        const double dw = (j[0] * f[1] - j[2] * f[0]) / det;
        const double nu = std::clamp(u - du, lo, hi);
        const double nw = std::clamp(w - dw, lo, hi);
        const bool stalled = nu == u && nw == w;
        u = nu;
        w = nw;
        if (stalled) break;
        if (std::abs(du) < 1e-15 && std::abs(dw) < 1e-15) break;
    }

    const double residual = sys.residual(u, w);
    if (singular || !(residual < 1e-10)) {
        Equilibrium eq = grid_oracle(g, sched);
        eq.used_fallback = true;
        return eq;
    }
    const auto [t_x, t_y] = detail::from_system(c, u, w);
    Equilibrium eq;
    eq.t_x = t_x;
    eq.t_y = t_y;
    eq.case_used = c;
    eq.residual = residual;
    eq.iterations = iter + 1;
    return eq;
}

enum class EquilibriumMethod { newton, grid };

/// Routes degenerate schedules to the closed form and coupled ones to the chosen solver.
inline Equilibrium solve_equilibrium(const TrustParams& params_x, const TrustParams& params_y,
                                     const ScheduleSpec& sched,
                                     EquilibriumMethod method = EquilibriumMethod::newton) {
    sched.validate();
    if (sched.n == 0) return closed_form_degenerate(params_x, sched);
    if (sched.m == 0) return closed_form_degenerate(params_y, sched);
    const LongRunGains g = long_run_gains(params_x, params_y, sched);
    return method == EquilibriumMethod::newton ? newton_solve(g, sched) : grid_oracle(g, sched);
}

}  // namespace tip
