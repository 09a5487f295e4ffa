#pragma once
/**
 * @file   sensing.hpp
 * @brief  Range-bearing sensor with FOV-gated intermittent measurements.
 *
 * A measurement is either a detection (range, bearing) or the empty observation,
 * represented by std::nullopt. Inside the FOV the detection probability is 1; outside it is 0.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "aspire/error.hpp"
#include "aspire/pose.hpp"
#include "aspire/world.hpp"

namespace aspire {

struct Detection {
    double range{0.0};
    double bearing{0.0};

    [[nodiscard]] Vec2 to_vector() const noexcept { return {range, bearing}; }
    friend bool operator==(const Detection&, const Detection&) = default;
};

/// nullopt is the empty observation.
using Measurement = std::optional<Detection>;

/// Additive measurement noise N(0, Sigma) on (range, bearing). Sigma must be SPD.
class MeasurementNoise {
public:
    MeasurementNoise() : MeasurementNoise(Mat2::Identity()) {}
    explicit MeasurementNoise(const Mat2& sigma) : sigma_(sigma) {
        if (!sigma.allFinite() || sigma(0, 1) != sigma(1, 0)) {
            throw InvalidInput("measurement covariance must be finite and symmetric");
        }
        Eigen::LLT<Mat2> llt(sigma);
        if (llt.info() != Eigen::Success || !(sigma.determinant() > 0.0)) {
            throw InvalidInput("measurement covariance must be positive definite");
        }
        chol_ = llt.matrixL();
        precision_ = sigma.inverse();
        log_norm_ = -std::log(kTwoPi) - 0.5 * std::log(sigma.determinant());
    }

    static MeasurementNoise diagonal(double range_var, double bearing_var) {
        return MeasurementNoise(Vec2(range_var, bearing_var).asDiagonal());
    }

    [[nodiscard]] const Mat2& covariance() const noexcept { return sigma_; }
    [[nodiscard]] const Mat2& cholesky() const noexcept { return chol_; }
    [[nodiscard]] const Mat2& precision() const noexcept { return precision_; }
    /// log of (2 pi)^-1 |Sigma|^-1/2.
    [[nodiscard]] double log_normalizer() const noexcept { return log_norm_; }

    template <class Rng>
    [[nodiscard]] Vec2 sample(Rng& rng) const {
        boost::random::normal_distribution<double> n01;
        const Vec2 e(n01(rng), n01(rng));
        return chol_ * e;
    }

private:
    Mat2 sigma_;
    Mat2 chol_{Mat2::Identity()};
    Mat2 precision_{Mat2::Identity()};
    double log_norm_{0.0};
};

/// Noise-free observation function: range and bearing of the target relative to the robot heading.
[[nodiscard]] inline Vec2 observe(const Pose2D& robot, const Vec2& target) {
    const double dx = target.x() - robot.x();
    const double dy = target.y() - robot.y();
    const double range = std::hypot(dx, dy);
    if (range == 0.0) throw DegenerateGeometry("range-bearing undefined for coincident robot and target");
    return {range, wrap_angle(std::atan2(dy, dx) - robot.theta())};
}

[[nodiscard]] inline Vec2 observe(const Pose2D& robot, const Pose2D& target) {
    return observe(robot, target.position());
}

/// Detection h(robot, target) + noise when the target is visible, empty otherwise.
/// Noise is applied after gating, so a detection may carry a range outside [r_min, r_max].
template <class Rng>
[[nodiscard]] Measurement sample_measurement(const Pose2D& robot, const Pose2D& target, const SensorFootprint& fp,
                                             const ObstacleMap& map, const MeasurementNoise& noise, Rng& rng) {
    if (!in_fov(robot, target.position(), fp, map)) return std::nullopt;
    const Vec2 z = observe(robot, target) + noise.sample(rng);
    return Detection{z.x(), wrap_angle(z.y())};
}

/// log N(z; mu, Sigma) with the bearing residual wrapped into (-pi, pi].
[[nodiscard]] inline double gaussian_log_density(const Vec2& z, const Vec2& mu, const MeasurementNoise& noise) {
    const Vec2 r(z.x() - mu.x(), wrap_angle(z.y() - mu.y()));
    return noise.log_normalizer() - 0.5 * r.dot(noise.precision() * r);
}

/// log P(z | particle). Returns -inf for impossible combinations (detection of an invisible
/// particle, or an empty observation of a visible one) and 0 for an empty observation of an
/// invisible particle.
[[nodiscard]] inline double log_likelihood(const Measurement& z, const Pose2D& robot, const Pose2D& particle,
                                           const SensorFootprint& fp, const ObstacleMap& map,
                                           const MeasurementNoise& noise) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    const bool visible = in_fov(robot, particle.position(), fp, map);
    if (!z) return visible ? neg_inf : 0.0;
    if (!visible) return neg_inf;
    return gaussian_log_density(z->to_vector(), observe(robot, particle), noise);
}

}  // namespace aspire
