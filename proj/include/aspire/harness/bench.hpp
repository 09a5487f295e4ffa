#pragma once
/**
 * @file   bench.hpp
 * @brief  Accuracy / cost comparison of the MI estimators against a Monte Carlo oracle.
 *
 * Each scenario places the robot at the configured standoff facing the target, then a
 * pursuit controller keeps following the true target while the filter runs on real
 * measurements. At every step the reward of the pursuit control is computed by each
 * estimator and by the oracle.
 */

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aspire/belief.hpp"
#include "aspire/dynamics.hpp"
#include "aspire/info.hpp"
#include "aspire/harness/config.hpp"
#include "aspire/harness/scenario.hpp"

namespace aspire::harness {

/// Proportional heading control toward `target`, closing the distance down to `standoff`.
[[nodiscard]] inline ControlInput pursuit_control(const Pose2D& robot, const Vec2& target, double standoff,
                                                  const RobotModel& model) {
    const Vec2 d = target - robot.position();
    const double heading_error = wrap_angle(std::atan2(d.y(), d.x()) - robot.theta());
    const double w = std::clamp(2.0 * heading_error / model.dt, -model.limits.w_max, model.limits.w_max);
    const double gap = d.norm() - standoff;
    const double v = std::clamp(gap / model.dt, 0.0, model.limits.v_max) * std::max(0.0, std::cos(heading_error));
    return {v, w};
}

struct BenchRow {
    std::string method;
    double abs_error{0.0};
    double rel_error{0.0};
    double seconds_per_call{0.0};
    long calls{0};
    long relative_calls{0};
};

struct BenchSample {
    std::uint64_t scenario{0};
    int step{0};
    double oracle{0.0};
    double oracle_se{0.0};
    std::array<double, 5> estimates{};
};

struct BenchResult {
    std::vector<BenchRow> rows;  // sp, sp+simplify, taylor0, taylor2, mc
    std::vector<BenchSample> samples;
};

inline constexpr std::array<MiEstimator, 5> kBenchMethods{MiEstimator::sigma_point, MiEstimator::sigma_point_simplified,
                                                          MiEstimator::taylor0, MiEstimator::taylor2,
                                                          MiEstimator::monte_carlo};

/// Runs `n_scenarios` scenarios with seeds seed_start, seed_start + 1, ... and `mc_samples`
/// oracle samples per evaluation. The "mc" row is an independent replicate of the oracle.
[[nodiscard]] inline BenchResult mi_benchmark(const ScenarioConfig& cfg, int n_scenarios, std::size_t mc_samples,
                                              std::uint64_t seed_start) {
    if (n_scenarios < 1) throw InvalidInput("benchmark needs at least one scenario");
    using clock = std::chrono::steady_clock;
    BenchResult out;
    std::array<double, 5> abs_sum{};
    std::array<double, 5> rel_sum{};
    std::array<double, 5> seconds{};
    long calls = 0;
    long rel_calls = 0;

    for (int s = 0; s < n_scenarios; ++s) {
        const std::uint64_t seed = seed_start + static_cast<std::uint64_t>(s);
        Scenario sc = instantiate(cfg, seed);
        const Pose2D target0 = sc.truth.poses.front();

        auto layout = make_stream(seed, Stream::layout);
        std::uniform_real_distribution<double> angle(-kPi, kPi);
        Pose2D robot;
        bool placed = false;
        for (int i = 0; i < 1000 && !placed; ++i) {
            const double a = angle(layout);
            robot = Pose2D(target0.x() + cfg.bench.standoff * std::cos(a), target0.y() + cfg.bench.standoff * std::sin(a),
                           a + kPi);
            placed = pose_in_free_space(robot, cfg.map, cfg.robot.radius);
        }
        if (!placed) throw ConfigError("no free standoff pose around the benchmark target");

        auto target_rng = make_stream(seed, Stream::target);
        const TargetTrack truth = generate_target_track(cfg, target0, cfg.bench.steps, target_rng);
        TrackingModel model = sc.model;
        if (cfg.target.kind == TargetModel::Kind::controlled) {
            model.target = TargetModel::controlled(truth.controls, cfg.robot.dt, MotionNoise(cfg.target.q));
        }
        auto prior_rng = make_stream(seed, Stream::prior);
        ParticleBelief belief = sample_prior({PriorComponent{1.0, target0, cfg.bench.prior_covariance}}, cfg.particles,
                                             cfg.map, robot, prior_rng);

        auto meas_rng = make_stream(seed, Stream::measurement);
        auto filter_rng = make_stream(seed, Stream::filter);
        auto oracle_rng = make_stream(seed, Stream::oracle);
        auto replicate_rng = make_stream(seed, Stream::replicate);

        for (int k = 1; k <= cfg.bench.steps; ++k) {
            ControlInput u = pursuit_control(belief.robot, truth.poses[static_cast<std::size_t>(k - 1)].position(),
                                             cfg.bench.standoff, cfg.robot);
            if (!primitive_feasible(belief.robot, u, cfg.robot, cfg.map)) u.v = 0.0;

            RewardParams p = cfg.planner.reward;
            p.mc_samples = mc_samples;
            p.estimator = MiEstimator::monte_carlo;
            const EntropyEstimate oracle = model.reward_estimate(belief, u, p, &oracle_rng);

            BenchSample sample{seed, k, oracle.value, oracle.standard_error, {}};
            for (std::size_t m = 0; m < kBenchMethods.size(); ++m) {
                p.estimator = kBenchMethods[m];
                const auto t0 = clock::now();
                const double v = model.reward_estimate(belief, u, p, &replicate_rng).value;
                seconds[m] += std::chrono::duration<double>(clock::now() - t0).count();
                sample.estimates[m] = v;
                abs_sum[m] += std::abs(v - oracle.value);
                if (oracle.value >= cfg.bench.min_information) rel_sum[m] += std::abs(v - oracle.value) / oracle.value;
            }
            ++calls;
            if (oracle.value >= cfg.bench.min_information) ++rel_calls;
            out.samples.push_back(sample);

            const Pose2D robot_next = unicycle_step(belief.robot, u, cfg.robot.dt);
            const Measurement z = sample_measurement(robot_next, truth.poses[static_cast<std::size_t>(k)],
                                                     model.footprint, model.map, model.noise, meas_rng);
            belief = model.predict(std::move(belief), u, filter_rng);
            belief = resample_if_degenerate(model.update(std::move(belief), z).belief, cfg.ess_fraction, filter_rng);
        }
    }

    for (std::size_t m = 0; m < kBenchMethods.size(); ++m) {
        BenchRow r;
        r.method = std::string(to_string(kBenchMethods[m]));
        r.calls = calls;
        r.relative_calls = rel_calls;
        r.abs_error = calls > 0 ? abs_sum[m] / static_cast<double>(calls) : 0.0;
        r.rel_error = rel_calls > 0 ? rel_sum[m] / static_cast<double>(rel_calls) : 0.0;
        r.seconds_per_call = calls > 0 ? seconds[m] / static_cast<double>(calls) : 0.0;
        out.rows.push_back(r);
    }
    return out;
}

[[nodiscard]] inline const BenchRow& bench_row(const BenchResult& r, MiEstimator e) {
    for (const auto& row : r.rows) {
        if (row.method == to_string(e)) return row;
    }
    throw InvalidInput("no benchmark row for " + std::string(to_string(e)));
}

}  // namespace aspire::harness
