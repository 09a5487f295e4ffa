#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace aspire {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
[[nodiscard]] inline double wrap_angle(double a) noexcept {
    if (a > -kPi && a <= kPi) return a;
    double r = std::remainder(a, kTwoPi);  // [-pi, pi]
    if (r <= -kPi) r += kTwoPi;
    return r;
}

/// Planar pose. The heading is kept wrapped into (-pi, pi] by every constructor and setter.
class Pose2D {
public:
    constexpr Pose2D() = default;
    Pose2D(double x, double y, double theta) noexcept : x_(x), y_(y), theta_(wrap_angle(theta)) {}
    Pose2D(const Vec2& position, double theta) noexcept : Pose2D(position.x(), position.y(), theta) {}

    [[nodiscard]] double x() const noexcept { return x_; }
    [[nodiscard]] double y() const noexcept { return y_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] Vec2 position() const noexcept { return {x_, y_}; }
    [[nodiscard]] Vec3 to_vector() const noexcept { return {x_, y_, theta_}; }

    void set_position(double x, double y) noexcept {
        x_ = x;
        y_ = y;
    }
    void set_theta(double theta) noexcept { theta_ = wrap_angle(theta); }

    friend bool operator==(const Pose2D&, const Pose2D&) = default;

private:
    double x_{0.0};
    double y_{0.0};
    double theta_{0.0};
};

}  // namespace aspire
