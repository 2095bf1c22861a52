#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tip/evaluation.hpp"

namespace {

using namespace tip;
using tip::testing::uniform_in;

FitReport report_with(std::vector<double> mu) {
    FitReport r;
    r.expected_trust_series = std::move(mu);
    r.loglik_trajectory = {0.0};
    return r;
}

TEST(FittingError, Examples) {
    const std::vector<double> t{0.2, 0.5, 0.7};
    for (double e : fitting_error_series(report_with(t), t).errors) EXPECT_EQ(e, 0.0);
    for (double e : fitting_error_series(report_with({0.3, 0.6, 0.8}), t).errors) EXPECT_NEAR(e, 0.1, 1e-15);
    const std::vector<double> single{0.80};
    EXPECT_NEAR(fitting_error_series(report_with({0.83}), single).errors[0], 0.03, 1e-15);
}

TEST(FittingError, LengthMismatch) {
    const std::vector<double> t{0.2, 0.5};
    EXPECT_THROW(fitting_error_series(report_with({0.2}), t), MisuseError);
}

TEST(FittingError, BoundedByOne) {
    RandomStream rng(51);
    std::vector<double> mu, t;
    for (int i = 0; i < 1000; ++i) {
        mu.push_back(rng.uniform());
        t.push_back(uniform_in(rng, 1e-6, 1 - 1e-6));
    }
    const ErrorSeries e = fitting_error_series(report_with(mu), t);
    for (double v : e.errors) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

ErrorSeries constant_series(std::string robot, double value, std::size_t length) {
    return {"x", std::move(robot), std::vector<double>(length, value)};
}

TEST(Rmse, Examples) {
    EXPECT_EQ(rmse({constant_series("A", 0.0, 5)}).at("A"), 0.0);
    for (double d : {0.01, 0.05, 0.3, 0.77}) {
        EXPECT_DOUBLE_EQ(rmse({constant_series("A", d, 16), constant_series("A", d, 16)}).at("A"), d);
    }
    EXPECT_NEAR(rmse({constant_series("A", 0.0, 4), constant_series("A", 0.2, 4)}).at("A"), std::sqrt(0.02),
                1e-15);
}

TEST(Rmse, GroupsByRobot) {
    const auto out = rmse({constant_series("A", 0.1, 3), constant_series("B", 0.4, 3)});
    EXPECT_DOUBLE_EQ(out.at("A"), 0.1);
    EXPECT_DOUBLE_EQ(out.at("B"), 0.4);
}

TEST(Rmse, Errors) {
    EXPECT_THROW(rmse({}), MisuseError);
    EXPECT_THROW(rmse({constant_series("A", 0.1, 3), constant_series("A", 0.1, 4)}), MisuseError);
}

HoldoutSeries holdout(std::string agent, std::vector<std::pair<std::size_t, double>> values) {
    return {std::move(agent), "A", std::move(values)};
}

TEST(HoldoutRmse, Examples) {
    const std::vector<HoldoutSeries> truth{holdout("x", {{14, 0.6}, {15, 0.7}})};
    EXPECT_EQ(holdout_rmse(truth, truth, 2).at("A"), 0.0);
    EXPECT_NEAR(holdout_rmse({holdout("x", {{15, 0.75}})}, {holdout("x", {{15, 0.7}})}, 1).at("A"), 0.05,
                1e-15);
}

TEST(HoldoutRmse, MismatchErrors) {
    const std::vector<HoldoutSeries> truth{holdout("x", {{14, 0.6}, {15, 0.7}})};
    EXPECT_THROW(holdout_rmse({holdout("x", {{13, 0.6}, {15, 0.7}})}, truth, 2), MisuseError);
    EXPECT_THROW(holdout_rmse({holdout("y", {{14, 0.6}, {15, 0.7}})}, truth, 2), MisuseError);
    EXPECT_THROW(holdout_rmse(truth, truth, 1), MisuseError);
    EXPECT_THROW(holdout_rmse(truth, truth, 0), MisuseError);
    EXPECT_THROW(holdout_rmse({}, {}, 1), MisuseError);
}

std::vector<CorpusEntry> corpus_of(const ExperimentDataset& d) {
    std::vector<CorpusEntry> corpus;
    for (Human h : {Human::x, Human::y}) {
        for (Robot r : {Robot::A, Robot::B}) {
            corpus.push_back({std::string(to_string(h)), std::string(to_string(r)), history_for(d, h, r)});
        }
    }
    return corpus;
}

double mean_error_of(const ComparisonTable& t, ModelVariant v) {
    double sum = 0.0;
    int n = 0;
    for (const ComparisonRow& row : t.rows) {
        if (row.variant == v && !row.failed) {
            sum += row.mean_error;
            ++n;
        }
    }
    return sum / n;
}

TEST(CompareModels, InertIndirectCoordinatesOnDirectOnlyCorpus) {
    SynthConfig cfg;
    cfg.seed = 3;
    cfg.fixed_robot_for_x = Robot::A;
    const ExperimentDataset d = generate_synthetic(cfg);
    // x only ever works with A and y only with B, so these two pairs have no indirect sessions.
    std::vector<CorpusEntry> corpus;
    corpus.push_back({"x", "A", history_for(d, Human::x, Robot::A)});
    corpus.push_back({"y", "B", history_for(d, Human::y, Robot::B)});
    for (CorpusEntry& e : corpus) {
        for (const SessionInteraction& it : e.history.interactions) ASSERT_EQ(it.kind, InteractionKind::direct);
    }
    const ComparisonTable t = compare_models(corpus, {ModelVariant::tip, ModelVariant::direct_only});
    EXPECT_NEAR(mean_error_of(t, ModelVariant::tip), mean_error_of(t, ModelVariant::direct_only), 1e-3);
}

TEST(CompareModels, FullModelNeverTrailsOnLikelihood) {
    SynthConfig cfg;
    cfg.seed = 9;
    const ComparisonTable t =
        compare_models(corpus_of(generate_synthetic(cfg)),
                       {ModelVariant::tip, ModelVariant::direct_only, ModelVariant::indirect_only});
    ASSERT_EQ(t.rows.size(), 12u);
    for (std::size_t i = 0; i < t.rows.size(); i += 3) {
        EXPECT_EQ(t.rows[i].variant, ModelVariant::tip);
        EXPECT_GE(t.rows[i].final_loglik, t.rows[i + 1].final_loglik - 1e-4);
        EXPECT_GE(t.rows[i].final_loglik, t.rows[i + 2].final_loglik - 1e-4);
    }
    EXPECT_EQ(t.rmse.size(), 6u);
}

TEST(CompareModels, FlagsFailedRowsAndContinues) {
    SynthConfig cfg;
    cfg.seed = 4;
    std::vector<CorpusEntry> corpus = corpus_of(generate_synthetic(cfg));
    corpus[1].history.ratings[3].reset();
    const ComparisonTable t = compare_models(corpus, {ModelVariant::tip});
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_TRUE(t.rows[1].failed);
    EXPECT_FALSE(t.rows[1].failure.empty());
    EXPECT_FALSE(t.rows[0].failed);
    EXPECT_EQ(t.rmse.size(), 2u);

    std::ostringstream out;
    write_comparison_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "agent,robot,variant,mean_error,final_loglik,converged");
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line, "x,B,tip,nan,nan,failed");
}

TEST(CompareModels, Deterministic) {
    SynthConfig cfg;
    cfg.seed = 5;
    const std::vector<CorpusEntry> corpus = corpus_of(generate_synthetic(cfg));
    std::ostringstream a, b;
    write_comparison_csv(a, compare_models(corpus, {ModelVariant::tip, ModelVariant::direct_only}));
    write_comparison_csv(b, compare_models(corpus, {ModelVariant::tip, ModelVariant::direct_only}));
    EXPECT_EQ(a.str(), b.str());
}

}  // namespace
