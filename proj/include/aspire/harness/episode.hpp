#pragma once
/**
 * @file   episode.hpp
 * @brief  Closed-loop episode execution and the search / tracking metrics.
 */

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aspire/apft.hpp"
#include "aspire/baselines.hpp"
#include "aspire/belief.hpp"
#include "aspire/error.hpp"
#include "aspire/harness/config.hpp"
#include "aspire/harness/scenario.hpp"

namespace aspire::harness {

enum class PlannerKind { aspire, nbv, rollout10, rollout20, rollout30 };

[[nodiscard]] inline std::string_view to_string(PlannerKind k) noexcept {
    switch (k) {
        case PlannerKind::aspire: return "aspire";
        case PlannerKind::nbv: return "nbv";
        case PlannerKind::rollout10: return "rollout10";
        case PlannerKind::rollout20: return "rollout20";
        case PlannerKind::rollout30: return "rollout30";
    }
    return "?";
}

[[nodiscard]] inline PlannerKind parse_planner(std::string_view s) {
    for (auto k : {PlannerKind::aspire, PlannerKind::nbv, PlannerKind::rollout10, PlannerKind::rollout20,
                   PlannerKind::rollout30}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown planner: " + std::string(s));
}

/// Fixed rollout depth of a Rollout-d planner, 0 otherwise.
[[nodiscard]] inline int rollout_depth(PlannerKind k) noexcept {
    switch (k) {
        case PlannerKind::rollout10: return 10;
        case PlannerKind::rollout20: return 20;
        case PlannerKind::rollout30: return 30;
        default: return 0;
    }
}

struct StepRecord {
    int k{0};
    ControlInput control;
    Pose2D robot;
    Pose2D target;
    Measurement z;
    Vec2 estimate{Vec2::Zero()};
    double plan_seconds{0.0};
    double mean_rollout_depth{0.0};
    bool degenerate_update{false};
};

struct EpisodeRecord {
    std::uint64_t seed{0};
    PlannerKind planner{PlannerKind::aspire};
    double dt{0.5};
    int t_max{0};
    Pose2D robot_start;
    Pose2D target_start;
    std::vector<StepRecord> steps;
};

struct EpisodeOptions {
    /// End the episode at the first detection (search-only experiments).
    bool stop_when_detected{false};
    /// Keep the policy tree of the first planning step (debug dump).
    bool keep_first_tree{false};
};

struct EpisodeResult {
    EpisodeRecord record;
    std::optional<PolicyTree> first_tree;
};

/// One control decision by the selected planner.
struct PlannerOutput {
    ControlInput control;
    PlanStats stats;
    std::optional<PolicyTree> tree;
};

[[nodiscard]] inline PlannerOutput run_planner(PlannerKind kind, const ParticleBelief& b, const TrackingModel& model,
                                               const PlannerParams& params, std::mt19937_64& rng, bool keep_tree) {
    PlannerOutput out;
    if (kind == PlannerKind::nbv) {
        out.control = nbv_plan(b, model, params.reward, rng);
        return out;
    }
    PlanResult r = kind == PlannerKind::aspire ? AdaptiveParticleFilterTree(model, params).plan(b, rng)
                                               : fixed_rollout_plan(b, model, params, rollout_depth(kind), rng);
    out.control = r.control;
    out.stats = r.stats;
    if (keep_tree) out.tree = std::move(r.tree);
    return out;
}

/// Closed loop for k = 1..t_max: plan, move the robot, step the true target, sense, then
/// filter (predict, update, resample when ESS < ess_fraction * N) and record.
[[nodiscard]] inline EpisodeResult run_episode(const ScenarioConfig& cfg, PlannerKind planner, std::uint64_t seed,
                                               const EpisodeOptions& opts = {}) {
    Scenario sc = instantiate(cfg, seed);
    auto meas_rng = make_stream(seed, Stream::measurement);
    auto filter_rng = make_stream(seed, Stream::filter);
    auto plan_rng = make_stream(seed, Stream::planner);

    EpisodeResult out;
    EpisodeRecord& rec = out.record;
    rec.seed = seed;
    rec.planner = planner;
    rec.dt = cfg.robot.dt;
    rec.t_max = cfg.t_max;
    rec.robot_start = sc.robot_start;
    rec.target_start = sc.truth.poses.front();

    ParticleBelief belief = std::move(sc.belief);
    Pose2D robot = sc.robot_start;
    for (int k = 1; k <= cfg.t_max; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        PlannerOutput plan;
        try {
            plan = run_planner(planner, belief, sc.model, cfg.planner, plan_rng, opts.keep_first_tree && k == 1);
        } catch (const PlanningInfeasible& e) {
            throw PlanningInfeasible("step " + std::to_string(k) + ": " + e.what());
        }
        const double plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (plan.tree) out.first_tree = std::move(plan.tree);

        robot = unicycle_step(robot, plan.control, cfg.robot.dt);
        const Pose2D& target = sc.truth.poses[static_cast<std::size_t>(k)];
        const Measurement z = sample_measurement(robot, target, sc.model.footprint, sc.model.map, sc.model.noise,
                                                 meas_rng);

        belief = sc.model.predict(std::move(belief), plan.control, filter_rng);
        auto upd = sc.model.update(std::move(belief), z);
        belief = resample_if_degenerate(std::move(upd.belief), cfg.ess_fraction, filter_rng);

        StepRecord s;
        s.k = k;
        s.control = plan.control;
        s.robot = robot;
        s.target = target;
        s.z = z;
        s.estimate = point_estimate(belief);
        s.plan_seconds = plan_seconds;
        s.mean_rollout_depth = plan.stats.mean_rollout_depth();
        s.degenerate_update = upd.degenerate;
        rec.steps.push_back(s);
        if (opts.stop_when_detected && z) break;
    }
    return out;
}

/// Search and tracking metrics of one episode. Tracking quantities cover steps t_s..end and
/// are undefined when the target was never detected.
struct EpisodeMetrics {
    std::optional<int> search_steps;
    std::optional<double> visibility_rate;
    std::optional<double> loss_rate;
    std::optional<double> estimation_error;
    double mean_plan_seconds{0.0};
    double mean_rollout_depth{0.0};
    int steps{0};

    [[nodiscard]] bool detected() const noexcept { return search_steps.has_value(); }
    [[nodiscard]] std::optional<double> search_seconds(double dt) const {
        if (!search_steps) return std::nullopt;
        return *search_steps * dt;
    }
};

[[nodiscard]] inline EpisodeMetrics metrics(const EpisodeRecord& rec) {
    EpisodeMetrics m;
    m.steps = static_cast<int>(rec.steps.size());
    if (rec.steps.empty()) return m;
    double plan = 0.0;
    double depth = 0.0;
    for (const auto& s : rec.steps) {
        plan += s.plan_seconds;
        depth += s.mean_rollout_depth;
    }
    m.mean_plan_seconds = plan / static_cast<double>(rec.steps.size());
    m.mean_rollout_depth = depth / static_cast<double>(rec.steps.size());

    const auto first = std::find_if(rec.steps.begin(), rec.steps.end(), [](const StepRecord& s) { return s.z.has_value(); });
    if (first == rec.steps.end()) return m;
    m.search_steps = first->k;
    int tracked = 0;
    int visible = 0;
    double err = 0.0;
    for (auto it = first; it != rec.steps.end(); ++it) {
        ++tracked;
        if (it->z) ++visible;
        err += (it->target.position() - it->estimate).norm();
    }
    m.visibility_rate = static_cast<double>(visible) / tracked;
    m.loss_rate = 1.0 - *m.visibility_rate;
    m.estimation_error = err / tracked;
    return m;
}

}  // namespace aspire::harness
