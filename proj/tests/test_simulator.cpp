#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tip/simulator.hpp"

namespace {

using namespace tip;

SimConfig single_actor(int turns, int replicas) {
    SimConfig cfg;
    cfg.sched = {1, 0, 0.5, 1.0, 1.0};
    cfg.turns = turns;
    cfg.replicas = replicas;
    cfg.seed = 42;
    return cfg;
}

std::string as_csv(const Trajectory& t) {
    std::ostringstream out;
    write_trajectory_csv(out, t);
    return out.str();
}

TEST(RunSchedule, SingleActorSettlesAtReliability) {
    const SimConfig cfg = single_actor(10000, 50);
    double gap = 0.0;
    for (int r = 0; r < cfg.replicas; ++r) {
        const Trajectory t = run_schedule(cfg, static_cast<std::uint64_t>(r));
        const TrajectoryEvent& last = t.events.back();
        if (r == 0) {
            EXPECT_NEAR(expected_trust(last.x), 0.5, 0.01);
        }
        gap += std::abs(last.trust_x - last.trust_y);
    }
    EXPECT_LT(gap / cfg.replicas, 0.05);
}

TEST(RunSchedule, ZeroIndirectGainsFreezeListener) {
    SimConfig cfg = single_actor(200, 1);
    cfg.params_y = {2.5, 3.5, 1, 1, 0, 0};
    const Trajectory t = run_schedule(cfg, 0);
    for (const TrajectoryEvent& e : t.events) EXPECT_EQ(e.y, ExperiencePair(2.5, 3.5));
}

TEST(RunSchedule, ReproduciblePerReplica) {
    SimConfig cfg;
    cfg.sched = {2, 3, 0.7, 0.9, 0.8};
    cfg.turns = 300;
    cfg.seed = 5;
    EXPECT_EQ(as_csv(run_schedule(cfg, 3)), as_csv(run_schedule(cfg, 3)));
    EXPECT_NE(as_csv(run_schedule(cfg, 3)), as_csv(run_schedule(cfg, 4)));
    SimConfig other = cfg;
    other.seed = 6;
    EXPECT_NE(as_csv(run_schedule(cfg, 3)), as_csv(run_schedule(other, 3)));
}

TEST(RunSchedule, FollowsScheduleOrder) {
    SimConfig cfg;
    cfg.sched = {2, 3, 0.6, 1, 1};
    cfg.turns = 7;
    const Trajectory t = run_schedule(cfg, 0);
    ASSERT_EQ(t.events.size(), 2u * 7 * 5);
    int direct = 0, indirect = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const TrajectoryEvent& e = t.events[i];
        EXPECT_EQ(e.index, i);
        const std::size_t pos = i % 10;
        EXPECT_EQ(e.block, static_cast<int>(i / 10));
        EXPECT_EQ(e.kind, pos % 2 == 0 ? InteractionKind::direct : InteractionKind::indirect);
        const bool x_turn = pos < 4;
        const Agent expected_actor = (pos % 2 == 0) == x_turn ? Agent::x : Agent::y;
        EXPECT_EQ(e.actor, expected_actor);
        (e.kind == InteractionKind::direct ? direct : indirect) += 1;
        EXPECT_EQ(e.reported_trust, e.actor == Agent::x ? e.trust_x : e.trust_y);
    }
    EXPECT_EQ(direct, 7 * 5);
    EXPECT_EQ(indirect, 7 * 5);
}

TEST(RunSchedule, ExperienceTotalsReconcile) {
    SimConfig cfg;
    cfg.sched = {2, 3, 0.65, 0.9, 0.7};
    cfg.params_x = {1.5, 2.5, 1.2, 0.8, 0.6, 1.4};
    cfg.params_y = {3.0, 1.0, 0.7, 1.1, 1.3, 0.5};
    cfg.turns = 400;
    const Trajectory t = run_schedule(cfg, 1);
    double indirect_alpha = 0.0, indirect_beta = 0.0;
    ExperiencePair prev = t.initial_x;
    for (const TrajectoryEvent& e : t.events) {
        if (e.actor == Agent::x && e.kind == InteractionKind::indirect) {
            indirect_alpha += e.x.alpha() - prev.alpha();
            indirect_beta += e.x.beta() - prev.beta();
        }
        prev = e.x;
    }
    const double r = cfg.sched.reliability;
    const ExperiencePair& last = t.events.back().x;
    const double blocks_direct = static_cast<double>(cfg.turns) * cfg.sched.m;
    EXPECT_NEAR(last.alpha() - cfg.params_x.alpha0 - blocks_direct * cfg.params_x.s * r, indirect_alpha,
                1e-9 * last.alpha());
    EXPECT_NEAR(last.beta() - cfg.params_x.beta0 - blocks_direct * cfg.params_x.f * (1 - r), indirect_beta,
                1e-9 * last.beta());
}

TEST(RunSchedule, ExpectedValueModeWithoutIndirectGainsIsDeterministic) {
    SimConfig cfg;
    cfg.sched = {2, 1, 0.6, 1, 1};
    cfg.params_x = {1, 2, 1, 1, 0, 0};
    cfg.params_y = {2, 1, 1, 2, 0, 0};
    cfg.communication = CommunicationMode::expected_value;
    cfg.turns = 50;
    cfg.seed = 1;
    SimConfig other = cfg;
    other.seed = 999;
    EXPECT_EQ(as_csv(run_schedule(cfg, 0)), as_csv(run_schedule(other, 17)));
}

TEST(MonteCarlo, SymmetricTeamMatchesSolver) {
    SimConfig cfg;
    cfg.sched = {2, 3, 0.7, 1, 1};
    cfg.turns = 5000;
    cfg.replicas = 100;
    cfg.seed = 3;
    const MonteCarloSummary mc = monte_carlo_limit(cfg);
    const Equilibrium eq = solve_equilibrium(cfg.params_x, cfg.params_y, cfg.sched);
    EXPECT_NEAR(mc.mean_x, eq.t_x, 0.02);
    EXPECT_NEAR(mc.mean_y, eq.t_y, 0.02);
    EXPECT_EQ(mc.replicas, 100);
}

TEST(MonteCarlo, DeterministicForFixedSeed) {
    SimConfig cfg;
    cfg.sched = {1, 2, 0.4, 0.8, 0.9};
    cfg.turns = 300;
    cfg.replicas = 13;
    cfg.seed = 8;
    const MonteCarloSummary a = monte_carlo_limit(cfg);
    const MonteCarloSummary b = monte_carlo_limit(cfg);
    EXPECT_EQ(a.mean_x, b.mean_x);
    EXPECT_EQ(a.sd_y, b.sd_y);
    EXPECT_EQ(a.drift_x, b.drift_x);
}

TEST(MonteCarlo, DriftAndSpreadShrinkWithHorizon) {
    SimConfig cfg;
    cfg.sched = {1, 1, 0.75, 0.9, 0.9};
    cfg.params_x = {1, 4, 1, 1, 1, 1};
    cfg.params_y = {4, 1, 1, 1, 1, 1};
    cfg.replicas = 40;
    cfg.seed = 12;
    std::vector<MonteCarloSummary> runs;
    for (int turns : {30, 300, 3000}) {
        cfg.turns = turns;
        runs.push_back(monte_carlo_limit(cfg));
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
        EXPECT_LT(runs[i].drift_x, runs[i - 1].drift_x) << "horizon " << i;
        EXPECT_LT(runs[i].drift_y, runs[i - 1].drift_y) << "horizon " << i;
        EXPECT_LT(runs[i].sd_x, runs[i - 1].sd_x) << "horizon " << i;
        EXPECT_LT(runs[i].sd_y, runs[i - 1].sd_y) << "horizon " << i;
    }
}

TEST(RollingStats, ConstantSeriesHasZeroVariance) {
    const RollingStats s = rolling_stats(std::vector<double>(100, 0.3), 7);
    ASSERT_EQ(s.variance.size(), 94u);
    for (double v : s.variance) EXPECT_EQ(v, 0.0);
    for (double m : s.mean) EXPECT_DOUBLE_EQ(m, 0.3);
}

TEST(RollingStats, MatchesTwoPassComputation) {
    RandomStream rng(4);
    std::vector<double> series;
    for (int i = 0; i < 500; ++i) series.push_back(rng.uniform());
    const std::size_t w = 25;
    const RollingStats s = rolling_stats(series, w);
    for (std::size_t start = 0; start + w <= series.size(); ++start) {
        double mean = 0.0;
        for (std::size_t i = start; i < start + w; ++i) mean += series[i];
        mean /= w;
        double var = 0.0;
        for (std::size_t i = start; i < start + w; ++i) var += (series[i] - mean) * (series[i] - mean);
        var /= w;
        EXPECT_NEAR(s.mean[start], mean, 1e-12);
        EXPECT_NEAR(s.variance[start], var, 1e-12);
    }
    EXPECT_THROW(rolling_stats(series, 0), MisuseError);
    EXPECT_THROW(rolling_stats(series, 501), MisuseError);
}

TEST(Diagnostics, SingleActorGapVanishes) {
    const Trajectory t = run_schedule(single_actor(10000, 1), 2);
    const ConvergenceDiagnostics d = convergence_diagnostics(t, t.events.size() / 20);
    EXPECT_LT(d.tail_gap_mean(), 0.05);
    EXPECT_EQ(d.gap.size(), t.events.size());
}

TEST(Diagnostics, CoupledGapMatchesSolver) {
    SimConfig cfg;
    cfg.sched = {2, 3, 0.8, 0.9, 0.9};
    cfg.params_x = {1, 1, 2, 1, 1, 1};
    cfg.params_y = {1, 1, 1, 2, 1, 1};
    cfg.turns = 5000;
    cfg.seed = 77;
    const Equilibrium eq = solve_equilibrium(cfg.params_x, cfg.params_y, cfg.sched);
    const Trajectory t = run_schedule(cfg, 0);
    const ConvergenceDiagnostics d = convergence_diagnostics(t, t.events.size() / 20);
    EXPECT_NEAR(d.tail_gap_mean(), std::abs(eq.t_x - eq.t_y), 0.03);
}

TEST(Diagnostics, RejectsOversizedWindow) {
    const Trajectory t = run_schedule(single_actor(5, 1), 0);
    EXPECT_THROW(convergence_diagnostics(t, t.events.size() + 1), MisuseError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
    const Trajectory t = run_schedule(single_actor(3, 1), 0);
    std::istringstream in(as_csv(t));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "event_index,block,actor,kind,alpha_x,beta_x,alpha_y,beta_y,reported_trust");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("0,0,x,direct,1.5,1.5,1,1,", 0), 0u) << line;
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 6);
}

TEST(SimConfig, Validation) {
    SimConfig cfg;
    cfg.turns = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.turns = 1;
    cfg.replicas = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
