#pragma once
/**
 * @file   world.hpp
 * @brief  Planar workspace with convex obstacles, line-of-sight queries and
 *         the fan-shaped field-of-view gate used by the sensor model.
 *
 * Boundary conventions:
 *  - a target exactly on the FOV boundary (range == r_max, |bearing| == half_angle) is visible;
 *  - a robot disc touching an obstacle boundary is in collision;
 *  - a sight line that only grazes an obstacle at its far endpoint is not blocked.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aspire/error.hpp"
#include "aspire/pose.hpp"

namespace aspire {

/// Axis-aligned workspace rectangle (meters).
struct Bounds {
    double x_min{0.0};
    double y_min{0.0};
    double x_max{0.0};
    double y_max{0.0};

    [[nodiscard]] bool contains(const Vec2& p) const noexcept {
        return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
    }
    [[nodiscard]] double width() const noexcept { return x_max - x_min; }
    [[nodiscard]] double height() const noexcept { return y_max - y_min; }
};

/// Convex polygon with counter-clockwise vertices. Validated on construction.
class ConvexPolygon {
public:
    explicit ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
        const std::size_t n = vertices_.size();
        if (n < 3) throw InvalidInput("obstacle polygon needs at least 3 vertices");
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = vertices_[i];
            const Vec2& b = vertices_[(i + 1) % n];
            const Vec2& c = vertices_[(i + 2) % n];
            if (!a.allFinite()) throw InvalidInput("obstacle vertex is not finite");
            const double turn = cross(b - a, c - b);
            if (!(turn > 0.0)) {
                throw InvalidInput("obstacle polygon must be strictly convex and counter-clockwise");
            }
        }
        // A convex CCW polygon turns through exactly 2*pi; more means it self-intersects.
        double winding = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 e0 = vertices_[(i + 1) % n] - vertices_[i];
            const Vec2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
            winding += std::atan2(cross(e0, e1), e0.dot(e1));
        }
        if (std::abs(winding - kTwoPi) > 1e-6) throw InvalidInput("obstacle polygon is not simple");

        lo_ = hi_ = vertices_.front();
        for (const Vec2& v : vertices_) {
            lo_ = lo_.cwiseMin(v);
            hi_ = hi_.cwiseMax(v);
        }
        normals_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 e = vertices_[(i + 1) % n] - vertices_[i];
            normals_.emplace_back(e.y(), -e.x());  // outward for CCW order
        }
    }

    /// Axis-aligned rectangle helper.
    static ConvexPolygon box(double x_min, double y_min, double x_max, double y_max) {
        return ConvexPolygon({{x_min, y_min}, {x_max, y_min}, {x_max, y_max}, {x_min, y_max}});
    }

    [[nodiscard]] const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const Vec2& bbox_min() const noexcept { return lo_; }
    [[nodiscard]] const Vec2& bbox_max() const noexcept { return hi_; }

    /// Closed containment (boundary counts as inside).
    [[nodiscard]] bool contains(const Vec2& p) const noexcept {
        if (p.x() < lo_.x() || p.x() > hi_.x() || p.y() < lo_.y() || p.y() > hi_.y()) return false;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (normals_[i].dot(p - vertices_[i]) > 0.0) return false;
        }
        return true;
    }

    /// Euclidean distance from p to the closed polygon (0 inside).
    [[nodiscard]] double distance(const Vec2& p) const noexcept {
        if (contains(p)) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = vertices_[i];
            const Vec2 e = vertices_[(i + 1) % n] - a;
            const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
            best = std::min(best, (a + t * e - p).norm());
        }
        return best;
    }

    /// Parameter interval [t_lo, t_hi] of p + t (q - p), t in [0, 1], inside the closed polygon.
    /// Returns false when the clipped interval is empty (Cyrus-Beck).
    [[nodiscard]] bool clip(const Vec2& p, const Vec2& q, double& t_lo, double& t_hi) const noexcept {
        const Vec2 d = q - p;
        t_lo = 0.0;
        t_hi = 1.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            const double num = normals_[i].dot(p - vertices_[i]);
            const double den = normals_[i].dot(d);
            if (den == 0.0) {
                if (num > 0.0) return false;
            } else if (den > 0.0) {
                t_hi = std::min(t_hi, -num / den);
            } else {
                t_lo = std::max(t_lo, -num / den);
            }
            if (t_lo > t_hi) return false;
        }
        return true;
    }

private:
    static double cross(const Vec2& a, const Vec2& b) noexcept { return a.x() * b.y() - a.y() * b.x(); }

    std::vector<Vec2> vertices_;
    std::vector<Vec2> normals_;
    Vec2 lo_{Vec2::Zero()};
    Vec2 hi_{Vec2::Zero()};
};

/// Known map: workspace bounds plus convex obstacles lying inside them.
class ObstacleMap {
public:
    ObstacleMap() = default;
    explicit ObstacleMap(Bounds bounds, std::vector<ConvexPolygon> obstacles = {})
        : bounds_(bounds), obstacles_(std::move(obstacles)) {
        if (!(bounds_.x_max > bounds_.x_min) || !(bounds_.y_max > bounds_.y_min)) {
            throw InvalidInput("map bounds must have positive extent");
        }
        for (const auto& poly : obstacles_) {
            for (const Vec2& v : poly.vertices()) {
                if (!bounds_.contains(v)) throw InvalidInput("obstacle vertex lies outside map bounds");
            }
        }
    }

    [[nodiscard]] const Bounds& bounds() const noexcept { return bounds_; }
    [[nodiscard]] std::span<const ConvexPolygon> obstacles() const noexcept { return obstacles_; }

    /// True when p lies inside the bounds and outside every obstacle.
    [[nodiscard]] bool point_free(const Vec2& p) const noexcept {
        if (!bounds_.contains(p)) return false;
        return std::none_of(obstacles_.begin(), obstacles_.end(),
                            [&](const ConvexPolygon& o) { return o.contains(p); });
    }

private:
    Bounds bounds_{0.0, 0.0, 1.0, 1.0};
    std::vector<ConvexPolygon> obstacles_;
};

/// Fan-shaped annular sensing sector.
struct SensorFootprint {
    double r_min{1.0};
    double r_max{6.0};
    double half_angle{kPi / 4.0};

    void validate() const {
        if (!(r_min >= 0.0) || !(r_max > r_min)) throw InvalidInput("sensor footprint needs 0 <= r_min < r_max");
        if (!(half_angle > 0.0) || half_angle > kPi) throw InvalidInput("sensor half angle must lie in (0, pi]");
    }
};

/// True iff the open segment pq touches any obstacle; a degenerate segment tests point containment.
[[nodiscard]] inline bool segment_intersects_obstacles(const Vec2& p, const Vec2& q, const ObstacleMap& map) {
    const Vec2 lo = p.cwiseMin(q);
    const Vec2 hi = p.cwiseMax(q);
    const bool degenerate = (p == q);
    for (const ConvexPolygon& poly : map.obstacles()) {
        if (hi.x() < poly.bbox_min().x() || lo.x() > poly.bbox_max().x() || hi.y() < poly.bbox_min().y() ||
            lo.y() > poly.bbox_max().y()) {
            continue;
        }
        if (degenerate) {
            if (poly.contains(p)) return true;
            continue;
        }
        double t_lo = 0.0;
        double t_hi = 0.0;
        if (poly.clip(p, q, t_lo, t_hi) && t_lo < 1.0 && t_hi > 0.0) return true;
    }
    return false;
}

/// Visibility flag gamma of a target position for a robot pose.
[[nodiscard]] inline bool in_fov(const Pose2D& robot, const Vec2& target, const SensorFootprint& fp,
                                 const ObstacleMap& map) {
    const double dx = target.x() - robot.x();
    const double dy = target.y() - robot.y();
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) return false;  // bearing undefined
    if (r2 < fp.r_min * fp.r_min || r2 > fp.r_max * fp.r_max) return false;
    const double bearing = wrap_angle(std::atan2(dy, dx) - robot.theta());
    if (std::abs(bearing) > fp.half_angle) return false;
    return !segment_intersects_obstacles(robot.position(), target, map);
}

/// True iff the disc of the given radius at the pose lies inside the bounds and touches no obstacle.
[[nodiscard]] inline bool pose_in_free_space(const Pose2D& p, const ObstacleMap& map, double robot_radius) {
    if (robot_radius < 0.0) throw InvalidInput("robot radius must be non-negative");
    const Bounds& b = map.bounds();
    if (p.x() - robot_radius < b.x_min || p.x() + robot_radius > b.x_max || p.y() - robot_radius < b.y_min ||
        p.y() + robot_radius > b.y_max) {
        return false;
    }
    const Vec2 c = p.position();
    for (const ConvexPolygon& poly : map.obstacles()) {
        if (c.x() + robot_radius < poly.bbox_min().x() || c.x() - robot_radius > poly.bbox_max().x() ||
            c.y() + robot_radius < poly.bbox_min().y() || c.y() - robot_radius > poly.bbox_max().y()) {
            continue;
        }
        if (poly.distance(c) <= robot_radius) return false;
    }
    return true;
}

}  // namespace aspire
