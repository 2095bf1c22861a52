#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "tip/errors.hpp"
#include "tip/format.hpp"
#include "tip/inference.hpp"
#include "tip/trust_core.hpp"

namespace tip {

enum class Human { x, y };
enum class Robot { A, B };

inline std::string_view to_string(Human h) { return h == Human::x ? "x" : "y"; }
inline std::string_view to_string(Robot r) { return r == Robot::A ? "A" : "B"; }
inline Human other(Human h) { return h == Human::x ? Human::y : Human::x; }
inline Robot other(Robot r) { return r == Robot::A ? Robot::B : Robot::A; }

inline std::optional<Human> parse_human(std::string_view s) {
    if (s == "x") return Human::x;
    if (s == "y") return Human::y;
    return std::nullopt;
}

inline std::optional<Robot> parse_robot(std::string_view s) {
    if (s == "A") return Robot::A;
    if (s == "B") return Robot::B;
    return std::nullopt;
}

/// Rating columns in file order.
enum RatingColumn : std::size_t { kXA = 0, kXB, kYA, kYB, kXY, kYX };

inline constexpr std::size_t rating_column(Human h, Robot r) {
    return h == Human::x ? (r == Robot::A ? kXA : kXB) : (r == Robot::A ? kYA : kYB);
}

inline constexpr std::size_t teammate_column(Human h) { return h == Human::x ? kXY : kYX; }

struct SessionRow {
    int session = 0;
    std::optional<Robot> robot_x;  ///< robot x worked with; empty at session 0
    std::optional<Robot> robot_y;
    std::optional<int> correct_a;  ///< correct choices of robot A; empty at session 0
    std::optional<int> correct_b;
    std::array<std::optional<double>, 6> ratings;  ///< raw ratings in [0, 1], empty = missing

    std::optional<Robot> robot_of(Human h) const { return h == Human::x ? robot_x : robot_y; }
    std::optional<int> correct(Robot r) const { return r == Robot::A ? correct_a : correct_b; }
};

/// One team's session log: two humans, two robots, sessions 0..K.
struct ExperimentDataset {
    int tasks_per_session = 10;
    std::vector<SessionRow> rows;

    int sessions() const { return static_cast<int>(rows.size()) - 1; }
};

inline constexpr std::string_view kDatasetCsvHeader =
    "session,robot_x,robot_y,correct_A,correct_B,t_x_A,t_x_B,t_y_A,t_y_B,t_x_y,t_y_x";

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_real(std::string_view s) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

/**
 * Reads a session log in the canonical CSV schema.
 *
 * Session 0 carries the six initial ratings only; every later session needs
 * a bijective robot assignment and both robots' correct counts in
 * [0, tasks_per_session]. Empty rating cells after session 0 are missing
 * values. Errors carry the offending line number.
 */
inline ExperimentDataset parse_dataset(std::istream& in, int tasks_per_session = 10) {
    if (tasks_per_session < 1) throw ConfigError("tasks", "must be positive");
    ExperimentDataset d;
    d.tasks_per_session = tasks_per_session;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line != kDatasetCsvHeader) throw ParseError(line_no, "unexpected header");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 11) {
            throw ParseError(line_no, "expected 11 fields, found " + std::to_string(cells.size()));
        }
        SessionRow row;
        const auto session = detail::parse_int(cells[0]);
        if (!session || *session != static_cast<int>(d.rows.size())) {
            throw ParseError(line_no, "session index must count up from 0");
        }
        row.session = *session;
        if (row.session == 0) {
            for (int c = 1; c <= 4; ++c) {
                if (!cells[static_cast<std::size_t>(c)].empty()) {
                    throw ParseError(line_no, "session 0 must leave assignment and performance empty");
                }
            }
        } else {
            row.robot_x = parse_robot(cells[1]);
            row.robot_y = parse_robot(cells[2]);
            if (!row.robot_x || !row.robot_y) throw ParseError(line_no, "robot must be A or B");
            if (*row.robot_x == *row.robot_y) {
                throw ParseError(line_no, "assignment must pair each human with a different robot");
            }
            row.correct_a = detail::parse_int(cells[3]);
            row.correct_b = detail::parse_int(cells[4]);
            for (const auto& c : {row.correct_a, row.correct_b}) {
                if (!c || *c < 0 || *c > tasks_per_session) {
                    throw ParseError(line_no, "correct counts must be integers in [0, " +
                                                  std::to_string(tasks_per_session) + "]");
                }
            }
        }
        for (std::size_t i = 0; i < 6; ++i) {
            const std::string_view cell = cells[5 + i];
            if (cell.empty()) {
                if (row.session == 0) throw ParseError(line_no, "initial ratings cannot be missing");
                continue;
            }
            const auto v = detail::parse_real(cell);
            if (!v || !(*v >= 0.0 && *v <= 1.0)) {
                throw ParseError(line_no, "rating must be a number in [0, 1]");
            }
            row.ratings[i] = v;
        }
        d.rows.push_back(row);
    }
    if (!header_seen) throw ParseError(line_no + 1, "missing header");
    if (d.rows.empty()) throw ParseError(line_no + 1, "dataset has no session 0 row");
    return d;
}

inline ExperimentDataset parse_dataset(const std::string& path, int tasks_per_session) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_dataset(in, tasks_per_session);
}

/// Canonical CSV: ratings with six decimals, empty cells for missing values.
inline void write_dataset(std::ostream& out, const ExperimentDataset& d) {
    out << kDatasetCsvHeader << '\n';
    for (const SessionRow& row : d.rows) {
        out << row.session << ',';
        if (row.robot_x) out << to_string(*row.robot_x);
        out << ',';
        if (row.robot_y) out << to_string(*row.robot_y);
        out << ',';
        if (row.correct_a) out << *row.correct_a;
        out << ',';
        if (row.correct_b) out << *row.correct_b;
        for (const auto& r : row.ratings) {
            out << ',';
            if (r) out << format_fixed(*r, 6);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_dataset: output stream failure");
}

inline void write_dataset(const std::string& path, const ExperimentDataset& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_dataset(out, d);
}

/// History of `agent`'s trust in `robot`, with every rating clamped for likelihood use.
inline AgentHistory history_for(const ExperimentDataset& d, Human agent, Robot robot) {
    const auto clamp = [](const std::optional<double>& v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return TrustRating::clamped(*v).value();
    };
    AgentHistory h;
    const std::size_t own = rating_column(agent, robot);
    const std::size_t peer = rating_column(other(agent), robot);
    const std::size_t teammate = teammate_column(agent);
    for (const SessionRow& row : d.rows) {
        h.ratings.push_back(clamp(row.ratings[own]));
        h.peer_trust.push_back(clamp(row.ratings[peer]));
        h.trust_in_peer.push_back(clamp(row.ratings[teammate]));
        if (row.session == 0) continue;
        SessionInteraction it;
        if (row.robot_of(agent) == robot) {
            it.kind = InteractionKind::direct;
            it.performance = PerformanceObservation::from_success(
                static_cast<double>(*row.correct(robot)) / d.tasks_per_session);
        } else {
            it.kind = InteractionKind::indirect;
        }
        h.interactions.push_back(it);
    }
    return h;
}

/// Parameters keyed by "<human>:<robot>", e.g. "x:A".
using ParamSet = std::map<std::string, TrustParams>;

inline std::string pair_key(Human h, Robot r) {
    return std::string(to_string(h)) + ":" + std::string(to_string(r));
}

inline nlohmann::json to_json(const TrustParams& p) {
    return {{"alpha0", p.alpha0}, {"beta0", p.beta0}, {"s", p.s},
            {"f", p.f},           {"s_hat", p.s_hat}, {"f_hat", p.f_hat}};
}

inline TrustParams params_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where, "must be an object");
    ParamVector v{};
    for (std::size_t i = 0; i < 6; ++i) {
        const std::string field = where + "." + kParamNames[i];
        const auto it = j.find(kParamNames[i]);
        if (it == j.end()) throw ConfigError(field, "missing");
        if (!it->is_number()) throw ConfigError(field, "must be a number");
        v[i] = it->get<double>();
    }
    const TrustParams p = TrustParams::from_array(v);
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + "." + e.field(), e.what());
    }
    return p;
}

/// Parses `{ "pairs": { "x:A": {...six fields...}, ... } }`.
inline ParamSet parse_params(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("document", e.what());
    }
    if (!doc.is_object() || !doc.contains("pairs") || !doc["pairs"].is_object()) {
        throw ConfigError("pairs", "missing or not an object");
    }
    ParamSet out;
    for (const auto& [key, value] : doc["pairs"].items()) {
        out[key] = params_from_json(value, "pairs." + key);
    }
    return out;
}

inline ParamSet load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open parameter file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_params(buf.str());
}

inline std::string dump_params(const ParamSet& params) {
    nlohmann::json pairs = nlohmann::json::object();
    for (const auto& [key, p] : params) pairs[key] = to_json(p);
    return nlohmann::json{{"pairs", pairs}}.dump(2) + "\n";
}

inline void save_params(const std::string& path, const ParamSet& params) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot open parameter file for writing");
    out << dump_params(params);
}

}  // namespace tip
