#pragma once
/**
 * @file   apft.hpp
 * @brief  Adaptive particle filter tree: UCB search over belief states with progressive
 *         widening on observations and reward-triggered rollout termination.
 *
 * Tree layout: the root and observation nodes hold action children (one per collision-free
 * motion primitive, created on first visit); action nodes hold observation children, added
 * while |C(n_a)| <= k_o W(n_a)^alpha_o. Beliefs are not cached in the tree; every Simulate
 * pass re-propagates the root belief along the visited history.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aspire/belief.hpp"
#include "aspire/dynamics.hpp"
#include "aspire/error.hpp"
#include "aspire/info.hpp"
#include "aspire/model.hpp"
#include "aspire/sensing.hpp"

namespace aspire {

enum class FinalSelection { ucb, max_q };
enum class ObservationSelection { uniform, visit_proportional };

struct PlannerParams {
    int iterations{300};
    int horizon{20};
    double discount{0.95};
    double ucb_c{2.0 * std::log(2.0)};
    double k_o{2.0};
    double alpha_o{0.5};
    /// Rollouts stop after the first step whose reward exceeds this (nats). +inf disables.
    double delta_r{0.6 * std::log(2.0)};
    RewardParams reward{};
    FinalSelection final_selection{FinalSelection::ucb};
    ObservationSelection observation_selection{ObservationSelection::uniform};
    bool resample_in_tree{true};
    double ess_fraction{0.5};
    /// Multiplies every reward; leaves the search unchanged when ucb_c and delta_r scale with it.
    double reward_scale{1.0};

    void validate() const {
        if (iterations < 1) throw InvalidInput("planner needs at least one iteration");
        if (horizon < 0) throw InvalidInput("planning horizon must be non-negative");
        if (!(discount > 0.0 && discount <= 1.0)) throw InvalidInput("discount must lie in (0, 1]");
        if (!(ucb_c >= 0.0)) throw InvalidInput("ucb constant must be non-negative");
        if (!(k_o > 0.0)) throw InvalidInput("k_o must be positive");
        if (!(alpha_o > 0.0 && alpha_o < 1.0)) throw InvalidInput("alpha_o must lie in (0, 1)");
        if (std::isnan(delta_r)) throw InvalidInput("delta_r must not be NaN");
        if (!(ess_fraction >= 0.0 && ess_fraction <= 1.0)) throw InvalidInput("ess fraction must lie in [0, 1]");
        if (!(reward_scale > 0.0)) throw InvalidInput("reward scale must be positive");
    }
};

/// Node n = <history, children, W, Q>. The history is implicit in the parent chain.
struct PolicyTreeNode {
    enum class Kind { root, action, observation };

    Kind kind{Kind::root};
    int parent{-1};
    int depth{0};
    std::vector<int> children;
    /// Action children have been generated (root / observation nodes).
    bool expanded{false};
    long visits{0};
    double value{0.0};
    /// Sum of all returns backed up through this action node; value == return_sum / visits.
    double return_sum{0.0};
    ControlInput action{};
    Measurement observation{};
};

struct PolicyTree {
    std::vector<PolicyTreeNode> nodes;

    [[nodiscard]] const PolicyTreeNode& root() const { return nodes.front(); }
    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

struct PlanStats {
    long iterations{0};
    long reward_evaluations{0};
    long rollout_calls{0};
    /// Rollout steps (reward evaluations inside rollouts) summed over all calls.
    long rollout_steps{0};
    long early_terminations{0};
    long degenerate_updates{0};
    int max_tree_depth{0};

    [[nodiscard]] double mean_rollout_depth() const noexcept {
        return rollout_calls > 0 ? static_cast<double>(rollout_steps) / static_cast<double>(rollout_calls) : 0.0;
    }
};

struct PlanResult {
    ControlInput control{};
    std::size_t root_child{0};
    PlanStats stats{};
    PolicyTree tree{};
};

/// Index maximising Q + c sqrt(log W_parent / W_child). Unvisited children score +inf; ties go
/// to the lowest index.
[[nodiscard]] inline std::size_t ucb_select(std::span<const double> q, std::span<const long> w, long w_parent,
                                            double c) {
    if (q.empty() || q.size() != w.size()) throw InvalidInput("ucb selection needs matching, non-empty inputs");
    const double log_parent = w_parent > 0 ? std::log(static_cast<double>(w_parent)) : 0.0;
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (w[i] == 0) return i;
        const double score = q[i] + c * std::sqrt(log_parent / static_cast<double>(w[i]));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

/// Draws a particle by weight and samples the sensor at it (empty when that particle is invisible).
template <class Rng>
[[nodiscard]] Measurement sample_new_observation(const ParticleBelief& b, const SensorFootprint& fp,
                                                 const ObstacleMap& map, const MeasurementNoise& noise, Rng& rng) {
    std::discrete_distribution<std::size_t> pick(b.weights.begin(), b.weights.end());
    const std::size_t j = pick(rng);
    return sample_measurement(b.robot, b.particles[j], fp, map, noise, rng);
}

/// Monte Carlo tree search over beliefs (Simulate / Rollout with adaptive termination).
class AdaptiveParticleFilterTree {
public:
    using Rng = std::mt19937_64;

    AdaptiveParticleFilterTree(const TrackingModel& model, PlannerParams params)
        : model_(model), params_(params), grid_(model.robot.control_grid()) {
        params_.validate();
    }

    [[nodiscard]] const PlannerParams& params() const noexcept { return params_; }

    /// Runs `iterations` Simulate passes from a fresh root and returns the chosen control.
    [[nodiscard]] PlanResult plan(const ParticleBelief& belief, Rng& rng) const {
        belief.validate();
        Search s{*this, rng, {}, {}};
        s.tree.nodes.emplace_back();
        expand(s.tree, 0, belief.robot);
        if (s.tree.nodes[0].children.empty()) {
            throw PlanningInfeasible("no collision-free motion primitive at the robot pose");
        }
        for (int i = 0; i < params_.iterations; ++i) {
            s.simulate(belief, 0, params_.horizon);
            ++s.tree.nodes[0].visits;
            ++s.stats.iterations;
        }

        const PolicyTreeNode& root = s.tree.nodes[0];
        std::vector<double> q;
        std::vector<long> w;
        for (int c : root.children) {
            q.push_back(s.tree.nodes[c].value);
            w.push_back(s.tree.nodes[c].visits);
        }
        std::size_t pick = 0;
        if (params_.final_selection == FinalSelection::ucb) {
            pick = ucb_select(q, w, root.visits, params_.ucb_c);
        } else {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < q.size(); ++i) {
                if (w[i] > 0 && q[i] > best) {
                    best = q[i];
                    pick = i;
                }
            }
        }
        PlanResult out;
        out.root_child = pick;
        out.control = s.tree.nodes[root.children[pick]].action;
        out.stats = s.stats;
        out.tree = std::move(s.tree);
        return out;
    }

    /// Adaptive rollout from `b` with `depth` remaining steps, using a uniformly random feasible
    /// primitive per step. Exposed for testing; `stats` may be null.
    [[nodiscard]] double rollout(ParticleBelief b, int depth, Rng& rng, PlanStats* stats = nullptr) const {
        PlanStats local;
        PlanStats& st = stats ? *stats : local;
        ++st.rollout_calls;
        double total = 0.0;
        double discount = 1.0;
        for (int d = depth; d > 0; --d) {
            const auto u = default_policy(b.robot, rng);
            if (!u) break;  // boxed in
            const double r = reward(b, *u, rng, st);
            ++st.rollout_steps;
            total += discount * r;
            if (r > params_.delta_r) {
                ++st.early_terminations;
                break;
            }
            if (d > 1) b = model_.predict(std::move(b), *u, rng);
            discount *= params_.discount;
        }
        return total;
    }

private:
    struct Search {
        const AdaptiveParticleFilterTree& self;
        Rng& rng;
        PolicyTree tree;
        PlanStats stats;

        double simulate(ParticleBelief b, int node, int d) {
            if (d == 0) return 0.0;
            const PlannerParams& p = self.params_;
            if (!tree.nodes[node].expanded) self.expand(tree, node, b.robot);
            if (tree.nodes[node].children.empty()) return 0.0;

            const int a_node = self.select_action(tree, node);
            const ControlInput a = tree.nodes[a_node].action;
            stats.max_tree_depth = std::max(stats.max_tree_depth, tree.nodes[a_node].depth);

            const double r = self.reward(b, a, rng, stats);
            b = self.model_.predict(std::move(b), a, rng);

            const auto& an = tree.nodes[a_node];
            const double limit = p.k_o * std::pow(static_cast<double>(an.visits), p.alpha_o);
            double ret = 0.0;
            int child = -1;
            if (static_cast<double>(an.children.size()) <= limit) {
                const Measurement z =
                    sample_new_observation(b, self.model_.footprint, self.model_.map, self.model_.noise, rng);
                child = static_cast<int>(tree.nodes.size());
                PolicyTreeNode o;
                o.kind = PolicyTreeNode::Kind::observation;
                o.parent = a_node;
                o.depth = tree.nodes[a_node].depth;
                o.observation = z;
                tree.nodes.push_back(std::move(o));
                tree.nodes[a_node].children.push_back(child);
                b = self.observe(std::move(b), z, rng, stats);
                ret = r + p.discount * self.rollout(std::move(b), d - 1, rng, &stats);
            } else {
                child = self.select_observation(tree, a_node, rng);
                b = self.observe(std::move(b), tree.nodes[child].observation, rng, stats);
                ret = r + p.discount * simulate(std::move(b), child, d - 1);
            }

            ++tree.nodes[child].visits;
            PolicyTreeNode& act = tree.nodes[a_node];
            ++act.visits;
            act.value += (ret - act.value) / static_cast<double>(act.visits);
            act.return_sum += ret;
            return ret;
        }
    };

    void expand(PolicyTree& tree, int node, const Pose2D& robot) const {
        tree.nodes[node].expanded = true;
        for (const ControlInput& u : grid_) {
            if (!primitive_feasible(robot, u, model_.robot, model_.map)) continue;
            PolicyTreeNode a;
            a.kind = PolicyTreeNode::Kind::action;
            a.parent = node;
            a.depth = tree.nodes[node].depth + 1;
            a.action = u;
            const int id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(std::move(a));
            tree.nodes[node].children.push_back(id);
        }
    }

    [[nodiscard]] int select_action(const PolicyTree& tree, int node) const {
        const auto& n = tree.nodes[node];
        std::vector<double> q(n.children.size());
        std::vector<long> w(n.children.size());
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            q[i] = tree.nodes[n.children[i]].value;
            w[i] = tree.nodes[n.children[i]].visits;
        }
        return n.children[ucb_select(q, w, n.visits, params_.ucb_c)];
    }

    [[nodiscard]] int select_observation(const PolicyTree& tree, int a_node, Rng& rng) const {
        const auto& kids = tree.nodes[a_node].children;
        if (params_.observation_selection == ObservationSelection::uniform) {
            std::uniform_int_distribution<std::size_t> pick(0, kids.size() - 1);
            return kids[pick(rng)];
        }
        std::vector<double> w;
        w.reserve(kids.size());
        for (int c : kids) w.push_back(static_cast<double>(std::max(1L, tree.nodes[c].visits)));
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        return kids[pick(rng)];
    }

    [[nodiscard]] double reward(const ParticleBelief& b, const ControlInput& u, Rng& rng, PlanStats& st) const {
        ++st.reward_evaluations;
        return params_.reward_scale * model_.reward(b, u, params_.reward, &rng);
    }

    ParticleBelief observe(ParticleBelief b, const Measurement& z, Rng& rng, PlanStats& st) const {
        auto r = model_.update(std::move(b), z);
        if (r.degenerate) ++st.degenerate_updates;
        if (params_.resample_in_tree) return resample_if_degenerate(std::move(r.belief), params_.ess_fraction, rng);
        return std::move(r.belief);
    }

    /// Uniformly random collision-free primitive (rejection over a random permutation).
    [[nodiscard]] std::optional<ControlInput> default_policy(const Pose2D& robot, Rng& rng) const {
        std::vector<std::size_t> idx(grid_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
            std::swap(idx[k], idx[pick(rng)]);
            const ControlInput& u = grid_[idx[k]];
            if (primitive_feasible(robot, u, model_.robot, model_.map)) return u;
        }
        return std::nullopt;
    }

    const TrackingModel& model_;
    PlannerParams params_;
    std::vector<ControlInput> grid_;
};

}  // namespace aspire
