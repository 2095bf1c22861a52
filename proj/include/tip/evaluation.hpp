#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tip/errors.hpp"
#include "tip/format.hpp"
#include "tip/inference.hpp"

namespace tip {

/// Per-session absolute fitting errors |mu_k - t_k| of one (agent, robot) pair.
struct ErrorSeries {
    std::string agent;
    std::string robot;
    std::vector<double> errors;

    double mean() const {
        if (errors.empty()) throw MisuseError("ErrorSeries::mean: empty series");
        double sum = 0.0;
        for (double e : errors) sum += e;
        return sum / static_cast<double>(errors.size());
    }
};

inline ErrorSeries fitting_error_series(const FitReport& report, std::span<const double> ratings,
                                        std::string agent = {}, std::string robot = {}) {
    if (report.expected_trust_series.size() != ratings.size()) {
        throw MisuseError("fitting_error_series: report and ratings cover different session counts");
    }
    ErrorSeries out{std::move(agent), std::move(robot), {}};
    out.errors.reserve(ratings.size());
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        out.errors.push_back(std::abs(report.expected_trust_series[k] - ratings[k]));
    }
    return out;
}

/// Root of the mean squared error over every agent and session of one group.
inline double pooled_rmse(std::span<const ErrorSeries> group) {
    if (group.empty()) throw MisuseError("rmse: empty collection");
    const std::size_t len = group.front().errors.size();
    if (len == 0) throw MisuseError("rmse: empty error series");
    double sum = 0.0;
    for (const ErrorSeries& s : group) {
        if (s.errors.size() != len) throw MisuseError("rmse: series lengths differ");
        double inner = 0.0;
        for (double e : s.errors) inner += e * e;
        sum += inner / static_cast<double>(len);
    }
    return std::sqrt(sum / static_cast<double>(group.size()));
}

/// RMSE per robot label.
inline std::map<std::string, double> rmse(const std::vector<ErrorSeries>& errors) {
    if (errors.empty()) throw MisuseError("rmse: empty collection");
    std::map<std::string, std::vector<ErrorSeries>> groups;
    for (const ErrorSeries& s : errors) groups[s.robot].push_back(s);
    std::map<std::string, double> out;
    for (const auto& [robot, group] : groups) out[robot] = pooled_rmse(group);
    return out;
}

/// Held-out values (u, value) of one (agent, robot) pair: predictions or ground truth.
struct HoldoutSeries {
    std::string agent;
    std::string robot;
    std::vector<std::pair<std::size_t, double>> values;
};

/**
 * RMSE over the last `k_hat` sessions of each pair, per robot. Estimates and
 * truths are matched by position and must name the same sessions.
 */
inline std::map<std::string, double> holdout_rmse(const std::vector<HoldoutSeries>& estimates,
                                                  const std::vector<HoldoutSeries>& truths,
                                                  std::size_t k_hat) {
    if (k_hat == 0) throw MisuseError("holdout_rmse: K_hat must be positive");
    if (estimates.empty() || estimates.size() != truths.size()) {
        throw MisuseError("holdout_rmse: estimates and truths must pair up one to one");
    }
    std::vector<ErrorSeries> errors;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const HoldoutSeries& est = estimates[i];
        const HoldoutSeries& tru = truths[i];
        if (est.agent != tru.agent || est.robot != tru.robot || est.values.size() != k_hat ||
            tru.values.size() != k_hat) {
            throw MisuseError("holdout_rmse: estimate/truth mismatch for " + est.agent + ":" + est.robot);
        }
        ErrorSeries e{est.agent, est.robot, {}};
        for (std::size_t j = 0; j < k_hat; ++j) {
            if (est.values[j].first != tru.values[j].first) {
                throw MisuseError("holdout_rmse: session index mismatch for " + est.agent + ":" + est.robot);
            }
            e.errors.push_back(std::abs(est.values[j].second - tru.values[j].second));
        }
        errors.push_back(std::move(e));
    }
    return rmse(errors);
}

/// One (agent, robot) history to compare models on.
struct CorpusEntry {
    std::string agent;
    std::string robot;
    AgentHistory history;
};

struct ComparisonRow {
    std::string agent;
    std::string robot;
    ModelVariant variant = ModelVariant::tip;
    double mean_error = std::numeric_limits<double>::quiet_NaN();
    double final_loglik = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    bool failed = false;
    std::string failure;
    ErrorSeries errors;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    /// Pooled RMSE keyed by (robot, variant), over rows that fit successfully.
    std::map<std::pair<std::string, ModelVariant>, double> rmse;
};

/**
 * Fits every history under every variant and tabulates per-pair mean errors
 * and per-robot RMSE. A failed fit is flagged on its row and left out of the
 * RMSE; the rest of the table is still produced.
 */
inline ComparisonTable compare_models(const std::vector<CorpusEntry>& corpus,
                                      const std::vector<ModelVariant>& variants,
                                      const FitOptions& options = {}) {
    ComparisonTable table;
    for (const CorpusEntry& entry : corpus) {
        for (ModelVariant v : variants) {
            ComparisonRow row;
            row.agent = entry.agent;
            row.robot = entry.robot;
            row.variant = v;
            try {
                const FitReport rep = fit(entry.history, v, options);
                std::vector<double> t;
                for (const auto& r : entry.history.ratings) t.push_back(*r);
                row.errors = fitting_error_series(rep, t, entry.agent, entry.robot);
                row.mean_error = row.errors.mean();
                row.final_loglik = rep.final_loglik();
                row.converged = rep.converged;
            } catch (const std::exception& e) {
                row.failed = true;
                row.failure = e.what();
            }
            table.rows.push_back(std::move(row));
        }
    }
    std::map<std::pair<std::string, ModelVariant>, std::vector<ErrorSeries>> groups;
    for (const ComparisonRow& row : table.rows) {
        if (!row.failed) groups[{row.robot, row.variant}].push_back(row.errors);
    }
    for (const auto& [key, group] : groups) table.rmse[key] = pooled_rmse(group);
    return table;
}

inline constexpr std::string_view kComparisonCsvHeader =
    "agent,robot,variant,mean_error,final_loglik,converged";

inline void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
    out << kComparisonCsvHeader << '\n';
    for (const ComparisonRow& row : table.rows) {
        out << row.agent << ',' << row.robot << ',' << to_string(row.variant) << ','
            << (row.failed ? "nan" : format_fixed(row.mean_error, 6)) << ','
            << (row.failed ? "nan" : format_fixed(row.final_loglik, 6)) << ','
            << (row.failed ? "failed" : (row.converged ? "true" : "false")) << '\n';
    }
}

}  // namespace tip
