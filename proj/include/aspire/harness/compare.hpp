#pragma once
/**
 * @file   compare.hpp
 * @brief  Seeds x planners batches and their per-planner aggregates.
 */

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "aspire/harness/episode.hpp"

namespace aspire::harness {

struct EpisodeSummary {
    std::uint64_t seed{0};
    PlannerKind planner{PlannerKind::aspire};
    int t_max{0};
    EpisodeMetrics metrics;

    /// Search steps with never-detected episodes counted as t_max.
    [[nodiscard]] int censored_search_steps() const { return metrics.search_steps.value_or(t_max); }
};

struct PlannerAggregate {
    PlannerKind planner{PlannerKind::aspire};
    int episodes{0};
    int detected{0};
    double mean_search_steps{0.0};
    double median_search_steps{0.0};
    std::optional<double> mean_loss_rate;
    std::optional<double> mean_visibility_rate;
    std::optional<double> mean_estimation_error;
    double mean_plan_seconds{0.0};
    double mean_rollout_depth{0.0};
};

[[nodiscard]] inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Aggregate over the episodes of one planner. Search-time statistics censor undetected
/// episodes at t_max; tracking statistics average over detected episodes only.
[[nodiscard]] inline PlannerAggregate aggregate(PlannerKind planner, const std::vector<EpisodeSummary>& episodes) {
    PlannerAggregate a;
    a.planner = planner;
    std::vector<double> ts;
    double los = 0.0, vis = 0.0, err = 0.0, plan = 0.0, depth = 0.0;
    for (const auto& e : episodes) {
        if (e.planner != planner) continue;
        ++a.episodes;
        ts.push_back(e.censored_search_steps());
        plan += e.metrics.mean_plan_seconds;
        depth += e.metrics.mean_rollout_depth;
        if (e.metrics.detected()) {
            ++a.detected;
            los += *e.metrics.loss_rate;
            vis += *e.metrics.visibility_rate;
            err += *e.metrics.estimation_error;
        }
    }
    if (a.episodes == 0) return a;
    double sum = 0.0;
    for (double t : ts) sum += t;
    a.mean_search_steps = sum / a.episodes;
    a.median_search_steps = median(ts);
    a.mean_plan_seconds = plan / a.episodes;
    a.mean_rollout_depth = depth / a.episodes;
    if (a.detected > 0) {
        a.mean_loss_rate = los / a.detected;
        a.mean_visibility_rate = vis / a.detected;
        a.mean_estimation_error = err / a.detected;
    }
    return a;
}

using EpisodeCallback = std::function<void(const EpisodeSummary&)>;

/// Runs every (seed, planner) pair, seed-major. Episodes are independent; the result order
/// depends only on the inputs.
[[nodiscard]] inline std::vector<EpisodeSummary> run_comparison(const ScenarioConfig& cfg,
                                                                const std::vector<PlannerKind>& planners,
                                                                const std::vector<std::uint64_t>& seeds,
                                                                const EpisodeOptions& opts = {},
                                                                const EpisodeCallback& on_episode = {}) {
    std::vector<EpisodeSummary> out;
    for (std::uint64_t seed : seeds) {
        for (PlannerKind p : planners) {
            const EpisodeResult r = run_episode(cfg, p, seed, opts);
            out.push_back({seed, p, cfg.t_max, metrics(r.record)});
            if (on_episode) on_episode(out.back());
        }
    }
    return out;
}

}  // namespace aspire::harness
