#pragma once
/**
 * @file   dynamics.hpp
 * @brief  Unicycle kinematics, motion primitives and the stochastic target transition.
 */

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <Eigen/Eigenvalues>

#include "aspire/error.hpp"
#include "aspire/pose.hpp"
#include "aspire/world.hpp"

namespace aspire {

/// Linear (m/s) and angular (rad/s) velocity.
struct ControlInput {
    double v{0.0};
    double w{0.0};

    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct ControlLimits {
    double v_max{2.0};
    double w_max{kPi / 2.0};

    [[nodiscard]] bool admits(const ControlInput& u) const noexcept {
        return std::abs(u.v) <= v_max && std::abs(u.w) <= w_max;
    }
};

/// Euler-discretised unicycle: x + [v cos(theta), v sin(theta), w] * dt.
[[nodiscard]] inline Pose2D unicycle_step(const Pose2D& x, const ControlInput& u, double dt) noexcept {
    return {x.x() + u.v * std::cos(x.theta()) * dt, x.y() + u.v * std::sin(x.theta()) * dt, x.theta() + u.w * dt};
}

/// Checked variant: rejects non-positive dt and controls outside the limits.
[[nodiscard]] inline Pose2D unicycle_step(const Pose2D& x, const ControlInput& u, double dt,
                                          const ControlLimits& limits) {
    if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
    if (!limits.admits(u)) throw InvalidInput("control input outside configured limits");
    return unicycle_step(x, u, dt);
}

/// Robot kinematic model together with the discrete primitive grid.
struct RobotModel {
    double dt{0.5};
    ControlLimits limits{};
    /// Primitive grid as fractions of v_max and w_max.
    std::vector<double> v_fractions{0.0, 0.5, 1.0};
    std::vector<double> w_fractions{-1.0, -0.5, 0.0, 0.5, 1.0};
    double radius{0.2};
    /// Interior collision checks along each primitive.
    int arc_samples{5};

    [[nodiscard]] std::vector<ControlInput> control_grid() const {
        std::vector<ControlInput> grid;
        grid.reserve(v_fractions.size() * w_fractions.size());
        for (double fv : v_fractions) {
            for (double fw : w_fractions) grid.push_back({fv * limits.v_max, fw * limits.w_max});
        }
        return grid;
    }

    void validate() const {
        if (!(dt > 0.0)) throw InvalidInput("robot dt must be positive");
        if (!(limits.v_max >= 0.0) || !(limits.w_max >= 0.0)) throw InvalidInput("velocity limits must be >= 0");
        if (v_fractions.empty() || w_fractions.empty()) throw InvalidInput("primitive grid must not be empty");
        for (double f : v_fractions) {
            if (std::abs(f) > 1.0) throw InvalidInput("primitive v fraction outside [-1, 1]");
        }
        for (double f : w_fractions) {
            if (std::abs(f) > 1.0) throw InvalidInput("primitive w fraction outside [-1, 1]");
        }
        if (radius < 0.0) throw InvalidInput("robot radius must be non-negative");
        if (arc_samples < 0) throw InvalidInput("arc_samples must be non-negative");
    }
};

struct MotionPrimitive {
    ControlInput control;
    Pose2D end;
};

/// True when the primitive from x under u stays collision free at its endpoint and all interior samples.
[[nodiscard]] inline bool primitive_feasible(const Pose2D& x, const ControlInput& u, const RobotModel& robot,
                                             const ObstacleMap& map) {
    const int segments = robot.arc_samples + 1;
    for (int i = 1; i <= segments; ++i) {
        const double frac = static_cast<double>(i) / segments;
        if (!pose_in_free_space(unicycle_step(x, u, robot.dt * frac), map, robot.radius)) return false;
    }
    return true;
}

/// Collision-free primitives from x, in grid order. May be empty when the robot is boxed in.
[[nodiscard]] inline std::vector<MotionPrimitive> motion_primitives(const Pose2D& x, const RobotModel& robot,
                                                                    const ObstacleMap& map) {
    std::vector<MotionPrimitive> out;
    for (const ControlInput& u : robot.control_grid()) {
        if (primitive_feasible(x, u, robot, map)) out.push_back({u, unicycle_step(x, u, robot.dt)});
    }
    return out;
}

/// Zero-mean Gaussian with a symmetric PSD 3x3 covariance; keeps a factor for sampling.
class MotionNoise {
public:
    MotionNoise() : MotionNoise(Mat3::Zero()) {}
    explicit MotionNoise(const Mat3& cov) : cov_(cov) {
        if (!cov.allFinite() || !cov.isApprox(cov.transpose(), 1e-12)) {
            throw InvalidInput("motion noise covariance must be finite and symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
        const Vec3 vals = eig.eigenvalues();
        if (vals.minCoeff() < -1e-12 * std::max(1.0, vals.maxCoeff())) {
            throw InvalidInput("motion noise covariance must be positive semi-definite");
        }
        factor_ = eig.eigenvectors() * vals.cwiseMax(0.0).cwiseSqrt().asDiagonal();
        zero_ = cov.isZero(0.0);
    }

    static MotionNoise diagonal(double sx, double sy, double st) { return MotionNoise(Vec3(sx, sy, st).asDiagonal()); }

    [[nodiscard]] const Mat3& covariance() const noexcept { return cov_; }
    [[nodiscard]] bool is_zero() const noexcept { return zero_; }

    template <class Rng>
    [[nodiscard]] Vec3 sample(Rng& rng) const {
        boost::random::normal_distribution<double> n01;
        const Vec3 e(n01(rng), n01(rng), n01(rng));
        return factor_ * e;
    }

private:
    Mat3 cov_;
    Mat3 factor_{Mat3::Zero()};
    bool zero_{true};
};

/// Target transition f^t: either a known control schedule on the unicycle, or an autonomous drift map.
struct TargetModel {
    enum class Kind { controlled, autonomous };

    Kind kind{Kind::autonomous};
    double dt{0.5};
    /// Controlled: control applied on transition k -> k+1. Beyond the schedule the target holds still.
    std::vector<ControlInput> controls;
    /// Autonomous drift; identity when empty.
    std::function<Pose2D(const Pose2D&)> drift;
    MotionNoise noise;

    static TargetModel controlled(std::vector<ControlInput> schedule, double dt, MotionNoise noise) {
        TargetModel m;
        m.kind = Kind::controlled;
        m.dt = dt;
        m.controls = std::move(schedule);
        m.noise = std::move(noise);
        return m;
    }

    /// Constant-speed unicycle continuing its current heading.
    static TargetModel constant_velocity(double speed, double dt, MotionNoise noise) {
        TargetModel m;
        m.kind = Kind::autonomous;
        m.dt = dt;
        m.drift = [speed, dt](const Pose2D& x) { return unicycle_step(x, {speed, 0.0}, dt); };
        m.noise = std::move(noise);
        return m;
    }

    [[nodiscard]] ControlInput control_at(std::size_t step) const noexcept {
        return step < controls.size() ? controls[step] : ControlInput{};
    }

    void validate(std::size_t episode_length = 0) const {
        if (!(dt > 0.0)) throw InvalidInput("target dt must be positive");
        if (kind == Kind::controlled && controls.size() < episode_length) {
            throw InvalidInput("controlled target needs a control schedule covering the episode");
        }
    }
};

/// Noiseless part of the target transition for the transition leaving time index `step`.
[[nodiscard]] inline Pose2D target_drift(const Pose2D& x, const TargetModel& model, std::size_t step) {
    if (model.kind == TargetModel::Kind::controlled) return unicycle_step(x, model.control_at(step), model.dt);
    return model.drift ? model.drift(x) : x;
}

/// x_{k+1} = f^t(x_k) + eta, eta ~ N(0, Q); heading re-wrapped.
template <class Rng>
[[nodiscard]] Pose2D target_step(const Pose2D& x, const TargetModel& model, std::size_t step, Rng& rng) {
    const Pose2D mean = target_drift(x, model, step);
    if (model.noise.is_zero()) return mean;
    const Vec3 e = model.noise.sample(rng);
    return {mean.x() + e.x(), mean.y() + e.y(), mean.theta() + e.z()};
}

}  // namespace aspire
