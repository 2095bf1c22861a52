#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tip/dataset.hpp"
#include "tip/equilibrium.hpp"
#include "tip/evaluation.hpp"
#include "tip/inference.hpp"
#include "tip/simulator.hpp"
#include "tip/synthetic.hpp"

namespace tip::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

namespace detail {

using nlohmann::json;

/// Writes to the file at `path`, or to `fallback` when the path is empty.
class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

inline TrustParams param_or_default(const ParamSet& set, const std::string& key) {
    const auto it = set.find(key);
    return it == set.end() ? TrustParams{} : it->second;
}

inline ModelVariant parse_variant(const std::string& s) {
    if (s == "tip") return ModelVariant::tip;
    if (s == "direct") return ModelVariant::direct_only;
    return ModelVariant::indirect_only;
}

struct ScheduleFlags {
    int m = 1;
    int n = 1;
    double reliability = 0.5;
    double trust_xy = 1.0;
    double trust_yx = 1.0;
    std::string params_path;

    void add_to(CLI::App* app) {
        app->add_option("--m", m, "direct interactions of x per block")->capture_default_str();
        app->add_option("--n", n, "direct interactions of y per block")->capture_default_str();
        app->add_option("--reliability", reliability, "robot reliability r")->capture_default_str();
        app->add_option("--trust-xy", trust_xy, "x's constant trust in y")->capture_default_str();
        app->add_option("--trust-yx", trust_yx, "y's constant trust in x")->capture_default_str();
        app->add_option("--params", params_path, "parameter JSON with pairs x:A and y:A");
    }

    ScheduleSpec schedule() const { return {m, n, reliability, trust_xy, trust_yx}; }

    std::pair<TrustParams, TrustParams> params() const {
        ParamSet set;
        if (!params_path.empty()) set = load_params(params_path);
        return {param_or_default(set, "x:A"), param_or_default(set, "y:A")};
    }
};

inline json fit_report_json(const FitReport& rep, std::string_view agent, std::string_view robot) {
    json j;
    j["agent"] = agent;
    j["robot"] = robot;
    j["model"] = to_string(rep.model_variant);
    j["theta_star"] = to_json(rep.theta_star);
    j["final_loglik"] = rep.final_loglik();
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["mu"] = rep.expected_trust_series;
    if (rep.warning) j["warning"] = *rep.warning;
    return j;
}

}  // namespace detail

/**
 * Entry point shared by the tip_cli binary and the tests. Results go to
 * files or `out`; diagnostics go to `err`. Returns 0 on success, 1 on usage
 * errors, 2 on data/schema errors and 3 on numeric failures.
 */
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using detail::json;
    CLI::App app{"Trust inference and propagation toolkit", "tip_cli"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;
    int tasks = 10;
    std::string model = "tip";

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic session log");
    SynthConfig synth_cfg;
    std::string synth_params;
    std::string peer_mode = "constant";
    std::string fixed_robot;
    synth->add_option("--seed", seed, "random seed")->capture_default_str();
    synth->add_option("--out", out_path, "output CSV (default: stdout)");
    synth->add_option("--sessions", synth_cfg.sessions, "sessions after the initial rating")->capture_default_str();
    synth->add_option("--tasks", synth_cfg.tasks_per_session, "tasks per session")->capture_default_str();
    synth->add_option("--rel-a", synth_cfg.reliability_a, "reliability of robot A")->capture_default_str();
    synth->add_option("--rel-b", synth_cfg.reliability_b, "reliability of robot B")->capture_default_str();
    synth->add_option("--trust-xy", synth_cfg.trust_x_in_y, "x's trust in y")->capture_default_str();
    synth->add_option("--trust-yx", synth_cfg.trust_y_in_x, "y's trust in x")->capture_default_str();
    synth->add_option("--params", synth_params, "true parameter JSON (all four pairs)");
    synth->add_option("--peer-mode", peer_mode, "teammate trust dynamics")
        ->check(CLI::IsMember({"constant", "drift"}))->capture_default_str();
    synth->add_option("--fixed-robot-x", fixed_robot, "always pair x with this robot")
        ->check(CLI::IsMember({"A", "B"}));

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo run of the alternating schedule");
    detail::ScheduleFlags sim_flags;
    int turns = 1000;
    int replicas = 30;
    std::uint64_t replica = 0;
    std::string communication = "sample";
    sim_flags.add_to(simulate);
    simulate->add_option("--turns", turns, "schedule blocks per replica")->capture_default_str();
    simulate->add_option("--replicas", replicas, "independent replicas")->capture_default_str();
    simulate->add_option("--seed", seed, "random seed")->capture_default_str();
    simulate->add_option("--replica", replica, "replica written to --out")->capture_default_str();
    simulate->add_option("--out", out_path, "trajectory CSV");
    simulate->add_option("--communication", communication, "trust read-out")
        ->check(CLI::IsMember({"sample", "expected"}))->capture_default_str();

    // equilibrium
    auto* equilibrium = app.add_subcommand("equilibrium", "long-run trust equilibrium");
    detail::ScheduleFlags eq_flags;
    std::string method = "newton";
    eq_flags.add_to(equilibrium);
    equilibrium->add_option("--method", method, "solver")
        ->check(CLI::IsMember({"newton", "grid"}))->capture_default_str();

    // fit / estimate / eval share dataset inputs
    std::vector<std::string> datasets;
    std::string agent_name = "x";
    std::string robot_name = "A";
    std::size_t holdout = 7;
    std::string rmse_out;

    auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit of one (agent, robot) pair");
    fit_cmd->add_option("dataset", datasets, "session-log CSV")->required()->expected(1);
    fit_cmd->add_option("--agent", agent_name, "x or y")->check(CLI::IsMember({"x", "y"}))->capture_default_str();
    fit_cmd->add_option("--robot", robot_name, "A or B")->check(CLI::IsMember({"A", "B"}))->capture_default_str();
    fit_cmd->add_option("--model", model, "model variant")
        ->check(CLI::IsMember({"tip", "direct", "indirect"}))->capture_default_str();
    fit_cmd->add_option("--tasks", tasks, "tasks per session")->capture_default_str();
    fit_cmd->add_option("--out", out_path, "output JSON (default: stdout)");

    auto* estimate = app.add_subcommand("estimate", "predict the last K sessions' ratings");
    estimate->add_option("dataset", datasets, "session-log CSV")->required()->expected(1);
    estimate->add_option("--holdout", holdout, "number of trailing sessions withheld")->capture_default_str();
    estimate->add_option("--model", model, "model variant")
        ->check(CLI::IsMember({"tip", "direct", "indirect"}))->capture_default_str();
    estimate->add_option("--tasks", tasks, "tasks per session")->capture_default_str();
    estimate->add_option("--out", out_path, "output JSON (default: stdout)");

    auto* eval = app.add_subcommand("eval", "compare TIP with direct-only and indirect-only fits");
    eval->add_option("datasets", datasets, "session-log CSVs")->required();
    eval->add_option("--tasks", tasks, "tasks per session")->capture_default_str();
    eval->add_option("--out", out_path, "comparison CSV (default: stdout)");
    eval->add_option("--rmse-out", rmse_out, "per-robot RMSE CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        if (synth->parsed()) {
            synth_cfg.seed = seed;
            if (!synth_params.empty()) synth_cfg.true_params = load_params(synth_params);
            synth_cfg.peer_mode = peer_mode == "drift" ? PeerTrustMode::drift : PeerTrustMode::constant;
            if (!fixed_robot.empty()) synth_cfg.fixed_robot_for_x = parse_robot(fixed_robot);
            const ExperimentDataset d = generate_synthetic(synth_cfg);
            detail::OutputTarget target(out_path, out);
            write_dataset(target.get(), d);
        } else if (simulate->parsed()) {
            SimConfig cfg;
            cfg.sched = sim_flags.schedule();
            std::tie(cfg.params_x, cfg.params_y) = sim_flags.params();
            cfg.turns = turns;
            cfg.replicas = replicas;
            cfg.seed = seed;
            cfg.communication = communication == "expected" ? CommunicationMode::expected_value
                                                            : CommunicationMode::reported_sample;
            cfg.validate();
            if (!out_path.empty()) {
                detail::OutputTarget target(out_path, out);
                write_trajectory_csv(target.get(), run_schedule(cfg, replica));
            }
            const MonteCarloSummary s = monte_carlo_limit(cfg);
            json j{{"replicas", s.replicas}, {"mean_x", s.mean_x}, {"mean_y", s.mean_y},
                   {"sd_x", s.sd_x},         {"sd_y", s.sd_y},     {"drift_x", s.drift_x},
                   {"drift_y", s.drift_y}};
            const Equilibrium eq = solve_equilibrium(cfg.params_x, cfg.params_y, cfg.sched);
            j["equilibrium"] = {{"t_x", eq.t_x}, {"t_y", eq.t_y}};
            out << j.dump(2) << "\n";
        } else if (equilibrium->parsed()) {
            const auto [px, py] = eq_flags.params();
            const Equilibrium eq =
                solve_equilibrium(px, py, eq_flags.schedule(),
                                  method == "grid" ? EquilibriumMethod::grid : EquilibriumMethod::newton);
            json j{{"t_x", eq.t_x},
                   {"t_y", eq.t_y},
                   {"case", to_string(eq.case_used)},
                   {"residual", eq.residual},
                   {"iterations", eq.iterations},
                   {"used_fallback", eq.used_fallback}};
            out << j.dump(2) << "\n";
        } else if (fit_cmd->parsed()) {
            const ExperimentDataset d = parse_dataset(datasets.front(), tasks);
            const Human h = *parse_human(agent_name);
            const Robot r = *parse_robot(robot_name);
            const AgentHistory hist = history_for(d, h, r);
            // Missing ratings are carried forward and left out of the likelihood.
            const MissingEstimate est = estimate_missing(hist, detail::parse_variant(model));
            detail::OutputTarget target(out_path, out);
            target.get() << detail::fit_report_json(est.report, agent_name, robot_name).dump(2) << "\n";
        } else if (estimate->parsed()) {
            const ExperimentDataset d = parse_dataset(datasets.front(), tasks);
            std::vector<HoldoutSeries> predicted, observed;
            json preds = json::array();
            for (Human h : {Human::x, Human::y}) {
                for (Robot r : {Robot::A, Robot::B}) {
                    const AgentHistory full = history_for(d, h, r);
                    const MissingEstimate est =
                        estimate_missing(hold_out_tail(full, holdout), detail::parse_variant(model));
                    HoldoutSeries p{std::string(to_string(h)), std::string(to_string(r)), {}};
                    HoldoutSeries o = p;
                    for (const auto& [u, mu] : est.predictions) {
                        if (!full.ratings[u]) {
                            throw ParseError(u + 2, "held-out session has no observed rating to score against");
                        }
                        p.values.emplace_back(u, mu);
                        o.values.emplace_back(u, *full.ratings[u]);
                        preds.push_back({{"agent", p.agent}, {"robot", p.robot}, {"session", u},
                                         {"predicted", mu}, {"observed", *full.ratings[u]}});
                    }
                    predicted.push_back(std::move(p));
                    observed.push_back(std::move(o));
                }
            }
            const auto scores = holdout_rmse(predicted, observed, holdout);
            json j{{"holdout", holdout}, {"model", model}, {"predictions", preds}, {"rmse", scores}};
            detail::OutputTarget target(out_path, out);
            target.get() << j.dump(2) << "\n";
        } else if (eval->parsed()) {
            std::vector<CorpusEntry> corpus;
            for (const std::string& path : datasets) {
                const ExperimentDataset d = parse_dataset(path, tasks);
                const std::string prefix =
                    datasets.size() > 1 ? std::filesystem::path(path).stem().string() + "/" : "";
                for (Human h : {Human::x, Human::y}) {
                    for (Robot r : {Robot::A, Robot::B}) {
                        AgentHistory hist = history_for(d, h, r);
                        if (!hist.complete()) hist = impute_series(hist);
                        corpus.push_back({prefix + std::string(to_string(h)), std::string(to_string(r)),
                                          std::move(hist)});
                    }
                }
            }
            const ComparisonTable table = compare_models(
                corpus, {ModelVariant::tip, ModelVariant::direct_only, ModelVariant::indirect_only});
            {
                detail::OutputTarget target(out_path, out);
                write_comparison_csv(target.get(), table);
            }
            std::ostringstream summary;
            summary << "robot,variant,rmse\n";
            for (const auto& [key, value] : table.rmse) {
                summary << key.first << ',' << to_string(key.second) << ',' << format_fixed(value, 6) << '\n';
            }
            if (!rmse_out.empty()) {
                detail::OutputTarget target(rmse_out, out);
                target.get() << summary.str();
            }
            err << summary.str();
            for (const ComparisonRow& row : table.rows) {
                if (row.failed) err << "fit failed for " << row.agent << ":" << row.robot << ": " << row.failure << "\n";
            }
        }
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kOk;
}

}  // namespace tip::cli
