#pragma once

#include <random>

#include "aspire/belief.hpp"
#include "aspire/dynamics.hpp"
#include "aspire/info.hpp"
#include "aspire/sensing.hpp"
#include "aspire/world.hpp"

namespace aspire {

/// Everything a planner needs to know about the world: map, sensor, robot and target models.
struct TrackingModel {
    ObstacleMap map;
    SensorFootprint footprint;
    MeasurementNoise noise;
    RobotModel robot;
    TargetModel target;

    void validate() const {
        footprint.validate();
        robot.validate();
        target.validate();
    }

    /// Reward R(B, a) for the robot control u.
    template <class Rng = std::mt19937_64>
    [[nodiscard]] double reward(const ParticleBelief& b, const ControlInput& u, const RewardParams& params,
                                Rng* rng = nullptr) const {
        return reward_estimate(b, u, params, rng).value;
    }

    /// Reward with the standard error of a sampling estimator (zero otherwise).
    template <class Rng = std::mt19937_64>
    [[nodiscard]] EntropyEstimate reward_estimate(const ParticleBelief& b, const ControlInput& u,
                                                  const RewardParams& params, Rng* rng = nullptr) const {
        return mutual_information(b, u, robot.dt, target, footprint, map, noise, params, rng);
    }

    /// tau(B, a, empty): noisy prediction of particles and robot motion.
    template <class Rng>
    [[nodiscard]] ParticleBelief predict(ParticleBelief b, const ControlInput& u, Rng& rng) const {
        return aspire::predict(std::move(b), u, robot.dt, target, rng);
    }

    /// tau(B, empty, z): weight update, keeping prior weights on a zero-likelihood measurement.
    [[nodiscard]] UpdateResult update(ParticleBelief b, const Measurement& z) const {
        return update_or_keep(std::move(b), z, footprint, map, noise);
    }
};

}  // namespace aspire
