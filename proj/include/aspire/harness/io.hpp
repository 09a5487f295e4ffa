#pragma once
/**
 * @file   io.hpp
 * @brief  CSV (RFC 4180) and JSON-lines output for metrics, traces, benchmark rows and trees.
 *
 * Numbers are written in shortest round-trip form so equal inputs give equal bytes.
 */

#include <charconv>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aspire/apft.hpp"
#include "aspire/harness/bench.hpp"
#include "aspire/harness/compare.hpp"
#include "aspire/harness/episode.hpp"

namespace aspire::harness {

[[nodiscard]] inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Quotes a field when it contains a comma, quote, CR or LF; embedded quotes are doubled.
[[nodiscard]] inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) os_ << ',';
            os_ << csv_escape(fields[i]);
        }
        os_ << "\r\n";
    }

private:
    std::ostream& os_;
};

[[nodiscard]] inline std::string optional_field(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

// ---- episode metrics ------------------------------------------------------------------

[[nodiscard]] inline std::vector<std::string> episode_header(bool timing) {
    std::vector<std::string> h{"seed",      "planner",        "steps",    "detected",        "t_s_steps",
                               "t_s_seconds", "r_vis",        "r_los",    "eps_est",         "mean_rollout_depth"};
    if (timing) h.push_back("mean_plan_seconds");
    return h;
}

[[nodiscard]] inline std::vector<std::string> episode_fields(const EpisodeSummary& e, double dt, bool timing) {
    const EpisodeMetrics& m = e.metrics;
    std::vector<std::string> f{std::to_string(e.seed),
                               std::string(to_string(e.planner)),
                               std::to_string(m.steps),
                               m.detected() ? "1" : "0",
                               m.search_steps ? std::to_string(*m.search_steps) : std::string(),
                               optional_field(m.search_seconds(dt)),
                               optional_field(m.visibility_rate),
                               optional_field(m.loss_rate),
                               optional_field(m.estimation_error),
                               format_number(m.mean_rollout_depth)};
    if (timing) f.push_back(format_number(m.mean_plan_seconds));
    return f;
}

[[nodiscard]] inline std::vector<std::string> aggregate_header(bool timing) {
    std::vector<std::string> h{"planner",    "episodes",   "detected", "mean_t_s_steps", "median_t_s_steps",
                               "mean_r_los", "mean_r_vis", "mean_eps_est", "mean_rollout_depth"};
    if (timing) h.push_back("mean_plan_seconds");
    return h;
}

[[nodiscard]] inline std::vector<std::string> aggregate_fields(const PlannerAggregate& a, bool timing) {
    std::vector<std::string> f{std::string(to_string(a.planner)),
                               std::to_string(a.episodes),
                               std::to_string(a.detected),
                               format_number(a.mean_search_steps),
                               format_number(a.median_search_steps),
                               optional_field(a.mean_loss_rate),
                               optional_field(a.mean_visibility_rate),
                               optional_field(a.mean_estimation_error),
                               format_number(a.mean_rollout_depth)};
    if (timing) f.push_back(format_number(a.mean_plan_seconds));
    return f;
}

// ---- benchmark ------------------------------------------------------------------------

inline void write_bench_csv(std::ostream& os, const BenchResult& r) {
    CsvWriter w(os);
    w.row({"method", "eps_a", "eps_r", "tau_seconds", "calls", "relative_calls"});
    for (const auto& row : r.rows) {
        w.row({row.method, format_number(row.abs_error), format_number(row.rel_error),
               format_number(row.seconds_per_call), std::to_string(row.calls), std::to_string(row.relative_calls)});
    }
}

// ---- traces ---------------------------------------------------------------------------

[[nodiscard]] inline nlohmann::ordered_json pose_json(const Pose2D& p) { return {p.x(), p.y(), p.theta()}; }

[[nodiscard]] inline nlohmann::ordered_json measurement_json(const Measurement& z) {
    if (!z) return nullptr;
    return {{"range", z->range}, {"bearing", z->bearing}};
}

/// One JSON object per line: a header line, then one line per step.
inline void write_trace(std::ostream& os, const EpisodeRecord& rec, bool timing) {
    nlohmann::ordered_json head;
    head["seed"] = rec.seed;
    head["planner"] = std::string(to_string(rec.planner));
    head["dt"] = rec.dt;
    head["t_max"] = rec.t_max;
    head["robot_start"] = pose_json(rec.robot_start);
    head["target_start"] = pose_json(rec.target_start);
    os << head.dump() << '\n';
    for (const auto& s : rec.steps) {
        nlohmann::ordered_json j;
        j["k"] = s.k;
        j["control"] = {s.control.v, s.control.w};
        j["robot"] = pose_json(s.robot);
        j["target"] = pose_json(s.target);
        j["z"] = measurement_json(s.z);
        j["estimate"] = {s.estimate.x(), s.estimate.y()};
        j["mean_rollout_depth"] = s.mean_rollout_depth;
        j["degenerate_update"] = s.degenerate_update;
        if (timing) j["plan_seconds"] = s.plan_seconds;
        os << j.dump() << '\n';
    }
}

/// Nested JSON view of a policy tree (visits, Q, action / observation per node).
[[nodiscard]] inline nlohmann::ordered_json tree_to_json(const PolicyTree& tree, int node = 0) {
    const PolicyTreeNode& n = tree.nodes.at(static_cast<std::size_t>(node));
    nlohmann::ordered_json j;
    switch (n.kind) {
        case PolicyTreeNode::Kind::root: j["kind"] = "root"; break;
        case PolicyTreeNode::Kind::action:
            j["kind"] = "action";
            j["action"] = {n.action.v, n.action.w};
            j["q"] = n.value;
            break;
        case PolicyTreeNode::Kind::observation:
            j["kind"] = "observation";
            j["z"] = measurement_json(n.observation);
            break;
    }
    j["visits"] = n.visits;
    j["depth"] = n.depth;
    auto children = nlohmann::ordered_json::array();
    for (int c : n.children) children.push_back(tree_to_json(tree, c));
    j["children"] = std::move(children);
    return j;
}

}  // namespace aspire::harness
