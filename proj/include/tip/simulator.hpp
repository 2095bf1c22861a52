#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string_view>
#include <thread>
#include <vector>

#include "tip/equilibrium.hpp"
#include "tip/format.hpp"
#include "tip/random.hpp"
#include "tip/trust_core.hpp"

namespace tip {

/// How an agent's trust is read out after each update.
enum class CommunicationMode {
    reported_sample,  ///< a draw from Beta(alpha, beta)
    expected_value,   ///< alpha / (alpha + beta), noise free
};

enum class Agent { x, y };

inline std::string_view to_string(Agent a) { return a == Agent::x ? "x" : "y"; }

struct SimConfig {
    ScheduleSpec sched;
    TrustParams params_x;
    TrustParams params_y;
    int turns = 1;
    int replicas = 1;
    std::uint64_t seed = 0;
    CommunicationMode communication = CommunicationMode::reported_sample;

    void validate() const {
        sched.validate();
        if (turns < 1) throw ConfigError("turns", "must be at least 1");
        if (replicas < 1) throw ConfigError("replicas", "must be at least 1");
    }
};

struct TrajectoryEvent {
    std::size_t index;
    int block;
    Agent actor;
    InteractionKind kind;
    ExperiencePair x;
    ExperiencePair y;
    double reported_trust;  ///< trust of the acting agent after its update
    double trust_x;         ///< x's current trust after this event
    double trust_y;         ///< y's current trust after this event
};

struct Trajectory {
    int m = 0;
    int n = 0;
    int turns = 0;
    ExperiencePair initial_x{1.0, 1.0};
    ExperiencePair initial_y{1.0, 1.0};
    std::vector<TrajectoryEvent> events;
};

namespace detail {

inline double read_trust(const ExperiencePair& e, CommunicationMode mode, RandomStream& rng) {
    return mode == CommunicationMode::reported_sample ? sample_beta(e, rng).value()
                                                      : expected_trust(e);
}

/**
 * Runs one replica of the alternating schedule and hands every event to
 * `sink`. Each direct interaction of one human is immediately followed by
 * the other human's indirect update from the reported trust. A human's
 * "previous trust" is the last value it read out.
 */
template <class Sink>
void run_replica(const SimConfig& cfg, std::uint64_t replica_index, Sink&& sink) {
    RandomStream rng(cfg.seed, replica_index);
    const ScheduleSpec& s = cfg.sched;
    const PerformanceObservation obs = PerformanceObservation::from_success(s.reliability);

    ExperiencePair ex = cfg.params_x.prior();
    ExperiencePair ey = cfg.params_y.prior();
    double tx = read_trust(ex, cfg.communication, rng);
    double ty = read_trust(ey, cfg.communication, rng);

    std::size_t index = 0;
    for (int block = 0; block < cfg.turns; ++block) {
        for (int i = 0; i < s.m; ++i) {
            ex = direct_update(ex, cfg.params_x, obs);
            tx = read_trust(ex, cfg.communication, rng);
            sink(TrajectoryEvent{index++, block, Agent::x, InteractionKind::direct, ex, ey, tx, tx, ty});
            ey = indirect_update(ey, cfg.params_y, ty, tx, s.trust_y_in_x);
            ty = read_trust(ey, cfg.communication, rng);
            sink(TrajectoryEvent{index++, block, Agent::y, InteractionKind::indirect, ex, ey, ty, tx, ty});
        }
        for (int j = 0; j < s.n; ++j) {
            ey = direct_update(ey, cfg.params_y, obs);
            ty = read_trust(ey, cfg.communication, rng);
            sink(TrajectoryEvent{index++, block, Agent::y, InteractionKind::direct, ex, ey, ty, tx, ty});
            ex = indirect_update(ex, cfg.params_x, tx, ty, s.trust_x_in_y);
            tx = read_trust(ex, cfg.communication, rng);
            sink(TrajectoryEvent{index++, block, Agent::x, InteractionKind::indirect, ex, ey, tx, tx, ty});
        }
    }
}

}  // namespace detail

/// Full event record of one replica; deterministic in (cfg.seed, replica_index).
inline Trajectory run_schedule(const SimConfig& cfg, std::uint64_t replica_index) {
    cfg.validate();
    Trajectory traj;
    traj.m = cfg.sched.m;
    traj.n = cfg.sched.n;
    traj.turns = cfg.turns;
    traj.initial_x = cfg.params_x.prior();
    traj.initial_y = cfg.params_y.prior();
    traj.events.reserve(2u * static_cast<std::size_t>(cfg.turns) *
                        static_cast<std::size_t>(cfg.sched.m + cfg.sched.n));
    detail::run_replica(cfg, replica_index, [&](const TrajectoryEvent& e) { traj.events.push_back(e); });
    return traj;
}

struct MonteCarloSummary {
    double mean_x = 0.0;   ///< replica mean of x's trust over the final 5% of events
    double mean_y = 0.0;
    double sd_x = 0.0;     ///< cross-replica standard deviation of x's final trust
    double sd_y = 0.0;
    double drift_x = 0.0;  ///< |final-window mean - preceding-window mean|, both replica averaged
    double drift_y = 0.0;
    int replicas = 0;
};

/**
 * Runs cfg.replicas independent replicas (in parallel when threads are
 * available) and reduces them in replica order, so the result depends only
 * on the configuration.
 */
inline MonteCarloSummary monte_carlo_limit(const SimConfig& cfg) {
    cfg.validate();
    const std::size_t total = 2u * static_cast<std::size_t>(cfg.turns) *
                              static_cast<std::size_t>(cfg.sched.m + cfg.sched.n);
    const std::size_t window = std::max<std::size_t>(1, total / 20);
    const std::size_t tail_start = total - window;
    const std::size_t prev_start = total >= 2 * window ? total - 2 * window : 0;

    struct ReplicaStats {
        double tail_x = 0, tail_y = 0, prev_x = 0, prev_y = 0, final_x = 0, final_y = 0;
    };
    std::vector<ReplicaStats> stats(static_cast<std::size_t>(cfg.replicas));

    auto work = [&](std::size_t r) {
        ReplicaStats st;
        std::size_t prev_count = 0;
        detail::run_replica(cfg, r, [&](const TrajectoryEvent& e) {
            if (e.index >= tail_start) {
                st.tail_x += e.trust_x;
                st.tail_y += e.trust_y;
            } else if (e.index >= prev_start) {
                st.prev_x += e.trust_x;
                st.prev_y += e.trust_y;
                ++prev_count;
            }
            st.final_x = e.trust_x;
            st.final_y = e.trust_y;
        });
        st.tail_x /= static_cast<double>(window);
        st.tail_y /= static_cast<double>(window);
        if (prev_count > 0) {
            st.prev_x /= static_cast<double>(prev_count);
            st.prev_y /= static_cast<double>(prev_count);
        } else {
            st.prev_x = st.tail_x;
            st.prev_y = st.tail_y;
        }
        stats[r] = st;
    };

    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1,
                                                        stats.size());
    if (workers <= 1) {
        for (std::size_t r = 0; r < stats.size(); ++r) work(r);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t r = w; r < stats.size(); r += workers) work(r);
            });
        }
    }

    const double count = static_cast<double>(stats.size());
    MonteCarloSummary out;
    out.replicas = cfg.replicas;
    double prev_x = 0, prev_y = 0, fin_x = 0, fin_y = 0;
    for (const ReplicaStats& st : stats) {
        out.mean_x += st.tail_x;
        out.mean_y += st.tail_y;
        prev_x += st.prev_x;
        prev_y += st.prev_y;
        fin_x += st.final_x;
        fin_y += st.final_y;
    }
    out.mean_x /= count;
    out.mean_y /= count;
    out.drift_x = std::abs(out.mean_x - prev_x / count);
    out.drift_y = std::abs(out.mean_y - prev_y / count);
    fin_x /= count;
    fin_y /= count;
    if (stats.size() > 1) {
        double vx = 0, vy = 0;
        for (const ReplicaStats& st : stats) {
            vx += (st.final_x - fin_x) * (st.final_x - fin_x);
            vy += (st.final_y - fin_y) * (st.final_y - fin_y);
        }
        out.sd_x = std::sqrt(vx / (count - 1.0));
        out.sd_y = std::sqrt(vy / (count - 1.0));
    }
    return out;
}

struct RollingStats {
    std::vector<double> mean;
    std::vector<double> variance;
};

struct ConvergenceDiagnostics {
    std::size_t window = 0;
    RollingStats x;
    RollingStats y;
    std::vector<double> gap;  ///< |t_x - t_y| after every event

    /// Mean of the gap series over the final `window` events.
    double tail_gap_mean() const {
        const std::size_t start = gap.size() - window;
        double sum = 0.0;
        for (std::size_t i = start; i < gap.size(); ++i) sum += gap[i];
        return sum / static_cast<double>(window);
    }
};

/// Population mean and variance over every length-`window` stretch of `series`.
inline RollingStats rolling_stats(const std::vector<double>& series, std::size_t window) {
    if (window == 0 || window > series.size()) {
        throw MisuseError("rolling_stats: window must lie in [1, series length]");
    }
    RollingStats out;
    const std::size_t count = series.size() - window + 1;
    out.mean.reserve(count);
    out.variance.reserve(count);
    // Sums of deviations from a fixed shift keep constant stretches exact.
    const double shift = series.front();
    const double w = static_cast<double>(window);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double d = series[i] - shift;
        s1 += d;
        s2 += d * d;
        if (i >= window) {
            const double old = series[i - window] - shift;
            s1 -= old;
            s2 -= old * old;
        }
        if (i + 1 >= window) {
            out.mean.push_back(shift + s1 / w);
            out.variance.push_back(std::max(0.0, (s2 - s1 * s1 / w) / w));
        }
    }
    return out;
}

inline ConvergenceDiagnostics convergence_diagnostics(const Trajectory& traj, std::size_t window) {
    if (window == 0 || window > traj.events.size()) {
        throw MisuseError("convergence_diagnostics: window exceeds trajectory length");
    }
    std::vector<double> tx, ty;
    tx.reserve(traj.events.size());
    ty.reserve(traj.events.size());
    ConvergenceDiagnostics d;
    d.window = window;
    d.gap.reserve(traj.events.size());
    for (const TrajectoryEvent& e : traj.events) {
        tx.push_back(e.trust_x);
        ty.push_back(e.trust_y);
        d.gap.push_back(std::abs(e.trust_x - e.trust_y));
    }
    d.x = rolling_stats(tx, window);
    d.y = rolling_stats(ty, window);
    return d;
}

inline constexpr std::string_view kTrajectoryCsvHeader =
    "event_index,block,actor,kind,alpha_x,beta_x,alpha_y,beta_y,reported_trust";

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajectoryCsvHeader << '\n';
    for (const TrajectoryEvent& e : traj.events) {
        out << e.index << ',' << e.block << ',' << to_string(e.actor) << ',' << to_string(e.kind)
            << ',' << format_double(e.x.alpha()) << ',' << format_double(e.x.beta()) << ','
            << format_double(e.y.alpha()) << ',' << format_double(e.y.beta()) << ','
            << format_double(e.reported_trust) << '\n';
    }
}

}  // namespace tip
