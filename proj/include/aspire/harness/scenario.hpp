#pragma once
/**
 * @file   scenario.hpp
 * @brief  Turns a ScenarioConfig and a seed into a concrete episode setup: start poses,
 *         ground-truth target track, target model and prior particle belief.
 *
 * Randomness is split into independent streams per concern so that the planner's draws can
 * never perturb the ground truth or the prior.
 */

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Cholesky>

#include "aspire/belief.hpp"
#include "aspire/dynamics.hpp"
#include "aspire/error.hpp"
#include "aspire/harness/config.hpp"
#include "aspire/model.hpp"
#include "aspire/world.hpp"

namespace aspire::harness {

enum class Stream : std::uint32_t {
    layout = 1,
    prior = 2,
    target = 3,
    measurement = 4,
    filter = 5,
    planner = 6,
    oracle = 7,
    replicate = 8,
};

/// Generator for one concern of one seeded run.
[[nodiscard]] inline std::mt19937_64 make_stream(std::uint64_t seed, Stream s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), 0x41535052U};
    return std::mt19937_64(seq);
}

/// N particles from the Gaussian-mixture prior, rejecting samples outside free space.
/// Uniform weights. Throws ConfigError after 1000 * N rejected draws.
template <class Rng>
[[nodiscard]] ParticleBelief sample_prior(const std::vector<PriorComponent>& prior, std::size_t n,
                                          const ObstacleMap& map, const Pose2D& robot, Rng& rng) {
    if (prior.empty() || n == 0) throw ConfigError("prior sampling needs components and particles");
    std::vector<double> w;
    std::vector<MotionNoise> shapes;
    for (const auto& c : prior) {
        w.push_back(c.weight);
        shapes.emplace_back(c.covariance);
    }
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::vector<Pose2D> particles;
    particles.reserve(n);
    const std::size_t budget = 1000 * n;
    std::size_t draws = 0;
    while (particles.size() < n) {
        if (draws++ >= budget) throw ConfigError("prior sampling failed: too many samples fell outside free space");
        const std::size_t k = pick(rng);
        const Vec3 e = shapes[k].sample(rng);
        const Pose2D p(prior[k].mean.x() + e.x(), prior[k].mean.y() + e.y(), prior[k].mean.theta() + e.z());
        if (map.point_free(p.position())) particles.push_back(p);
    }
    return ParticleBelief::uniform(robot, std::move(particles));
}

/// Ground-truth target motion and the schedule the robot is told about.
struct TargetTrack {
    std::vector<ControlInput> controls;  // controls[k] drives k -> k+1
    std::vector<Pose2D> poses;           // poses[0] is the start
};

/// Rolls the true target forward for `steps` transitions. A controlled target without an
/// explicit schedule wanders with piecewise-constant random controls and turns in place when
/// its nominal next pose would hit an obstacle. Noise draws landing outside free space are
/// redrawn (up to 20 times, then the noiseless pose is kept).
template <class Rng>
[[nodiscard]] TargetTrack generate_target_track(const ScenarioConfig& cfg, const Pose2D& start, int steps,
                                                Rng& rng) {
    constexpr double kTargetRadius = 0.2;
    const MotionNoise noise(cfg.target.q);
    TargetModel model;
    model.kind = cfg.target.kind;
    model.dt = cfg.robot.dt;
    if (cfg.target.kind == TargetModel::Kind::autonomous) {
        model = TargetModel::constant_velocity(cfg.target.speed, cfg.robot.dt, MotionNoise(cfg.target.q));
    }

    TargetTrack track;
    track.poses.push_back(start);
    const WanderSpec& wander = cfg.target.wander;
    std::uniform_real_distribution<double> v_draw(wander.v_min, wander.v_max);
    std::uniform_real_distribution<double> w_draw(-wander.w_max, wander.w_max);
    ControlInput segment{};
    Pose2D x = start;
    for (int k = 0; k < steps; ++k) {
        Pose2D nominal;
        if (cfg.target.kind == TargetModel::Kind::controlled) {
            ControlInput u;
            if (!cfg.target.controls.empty()) {
                u = cfg.target.controls[static_cast<std::size_t>(k)];
            } else {
                if (k % wander.segment_steps == 0) segment = {v_draw(rng), w_draw(rng)};
                u = segment;
                if (!pose_in_free_space(unicycle_step(x, u, cfg.robot.dt), cfg.map, kTargetRadius)) {
                    const double turn = wander.w_max > 0.0 ? wander.w_max : 0.5;
                    u = {0.0, segment.w >= 0.0 ? turn : -turn};
                }
            }
            track.controls.push_back(u);
            nominal = unicycle_step(x, u, cfg.robot.dt);
        } else {
            nominal = target_drift(x, model, static_cast<std::size_t>(k));
        }
        Pose2D next = nominal;
        if (!noise.is_zero()) {
            for (int attempt = 0; attempt < 20; ++attempt) {
                const Vec3 e = noise.sample(rng);
                const Pose2D candidate(nominal.x() + e.x(), nominal.y() + e.y(), nominal.theta() + e.z());
                if (cfg.map.point_free(candidate.position())) {
                    next = candidate;
                    break;
                }
            }
        }
        if (!cfg.map.point_free(next.position())) next = x;  // autonomous drift into a wall: stay
        track.poses.push_back(next);
        x = next;
    }
    return track;
}

/// A fully instantiated episode.
struct Scenario {
    TrackingModel model;
    Pose2D robot_start;
    TargetTrack truth;
    std::vector<PriorComponent> prior;
    ParticleBelief belief;
};

namespace detail {

template <class Rng>
Vec2 free_point(const ObstacleMap& map, double clearance, Rng& rng) {
    const Bounds& b = map.bounds();
    std::uniform_real_distribution<double> ux(b.x_min, b.x_max);
    std::uniform_real_distribution<double> uy(b.y_min, b.y_max);
    for (int i = 0; i < 100000; ++i) {
        const Pose2D p(ux(rng), uy(rng), 0.0);
        if (pose_in_free_space(p, map, clearance)) return p.position();
    }
    throw ConfigError("could not find a free position in the map");
}

}  // namespace detail

/// Builds the episode for `seed`: applies randomisation when configured, generates the true
/// target track over t_max transitions and samples the prior.
[[nodiscard]] inline Scenario instantiate(const ScenarioConfig& cfg, std::uint64_t seed) {
    Scenario sc;
    Pose2D target_start = cfg.target.initial;
    sc.robot_start = cfg.robot_initial;
    sc.prior = cfg.prior;

    if (cfg.randomize) {
        const RandomizeSpec& r = *cfg.randomize;
        auto rng = make_stream(seed, Stream::layout);
        std::uniform_real_distribution<double> angle(-kPi, kPi);
        std::uniform_real_distribution<double> dist(r.min_distance, r.max_distance);
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            target_start = Pose2D(detail::free_point(cfg.map, 1.0, rng), angle(rng));
            for (int k = 0; k < 200 && !placed; ++k) {
                const double a = angle(rng);
                const double d = dist(rng);
                const Pose2D robot(target_start.x() + d * std::cos(a), target_start.y() + d * std::sin(a), angle(rng));
                if (pose_in_free_space(robot, cfg.map, cfg.robot.radius + 0.3)) {
                    sc.robot_start = robot;
                    placed = true;
                }
            }
        }
        if (!placed) throw ConfigError("could not place robot and target for the randomised scenario");

        sc.prior.clear();
        if (r.prior == PriorKind::unimodal) {
            sc.prior.push_back({1.0, target_start, r.covariance});
        } else {
            const double rest = (1.0 - r.true_weight) / r.distractors;
            sc.prior.push_back({r.true_weight, target_start, r.covariance});
            for (int i = 0; i < r.distractors; ++i) {
                sc.prior.push_back({rest, Pose2D(detail::free_point(cfg.map, 0.0, rng), angle(rng)), r.covariance});
            }
        }
    }

    auto target_rng = make_stream(seed, Stream::target);
    sc.truth = generate_target_track(cfg, target_start, cfg.t_max, target_rng);

    sc.model.map = cfg.map;
    sc.model.footprint = cfg.sensor;
    sc.model.noise = MeasurementNoise(cfg.sigma);
    sc.model.robot = cfg.robot;
    if (cfg.target.kind == TargetModel::Kind::controlled) {
        sc.model.target = TargetModel::controlled(sc.truth.controls, cfg.robot.dt, MotionNoise(cfg.target.q));
    } else {
        sc.model.target = TargetModel::constant_velocity(cfg.target.speed, cfg.robot.dt, MotionNoise(cfg.target.q));
    }

    auto prior_rng = make_stream(seed, Stream::prior);
    sc.belief = sample_prior(sc.prior, cfg.particles, cfg.map, sc.robot_start, prior_rng);
    return sc;
}

}  // namespace aspire::harness
