#pragma once
/**
 * @file   baselines.hpp
 * @brief  Comparison planners: greedy next-best-view and fixed-depth rollout tree search.
 */

#include <limits>
#include <random>
#include <vector>

#include "aspire/apft.hpp"
#include "aspire/belief.hpp"
#include "aspire/error.hpp"
#include "aspire/model.hpp"

namespace aspire {

/// Rewards within this distance of the best are treated as ties.
inline constexpr double kNbvTieTolerance = 1e-12;

/// Greedy one-step planner: argmax of the MI reward over feasible primitives, ties (including
/// the all-zero case) broken uniformly at random.
template <class Rng>
[[nodiscard]] ControlInput nbv_plan(const ParticleBelief& b, const TrackingModel& model, const RewardParams& reward,
                                    Rng& rng) {
    const auto primitives = motion_primitives(b.robot, model.robot, model.map);
    if (primitives.empty()) throw PlanningInfeasible("no collision-free motion primitive at the robot pose");
    std::vector<double> r;
    r.reserve(primitives.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : primitives) {
        r.push_back(model.reward(b, p.control, reward, &rng));
        best = std::max(best, r.back());
    }
    std::vector<std::size_t> winners;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] >= best - kNbvTieTolerance) winners.push_back(i);
    }
    std::uniform_int_distribution<std::size_t> pick(0, winners.size() - 1);
    return primitives[winners[pick(rng)]].control;
}

/// The adaptive tree with early termination disabled and a fixed horizon `depth`.
[[nodiscard]] inline PlannerParams fixed_rollout_params(PlannerParams params, int depth) {
    params.horizon = depth;
    params.delta_r = std::numeric_limits<double>::infinity();
    return params;
}

/// Rollout-d baseline.
[[nodiscard]] inline PlanResult fixed_rollout_plan(const ParticleBelief& b, const TrackingModel& model,
                                                   const PlannerParams& params, int depth,
                                                   AdaptiveParticleFilterTree::Rng& rng) {
    return AdaptiveParticleFilterTree(model, fixed_rollout_params(params, depth)).plan(b, rng);
}

}  // namespace aspire
