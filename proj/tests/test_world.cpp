#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "aspire/pose.hpp"
#include "aspire/world.hpp"

using namespace aspire;

namespace {

ObstacleMap empty_map(double size = 10.0) { return ObstacleMap(Bounds{-size, -size, size, size}); }

SensorFootprint default_fan() { return SensorFootprint{1.0, 6.0, kPi / 4.0}; }

}  // namespace

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
    EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
    EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
    EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
    EXPECT_NEAR(wrap_angle(kTwoPi), 0.0, 1e-15);
}

TEST(WrapAngle, PeriodicAndBounded) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> a(-10.0, 10.0);
    std::uniform_int_distribution<int> k(-50, 50);
    for (int i = 0; i < 2000; ++i) {
        const double theta = a(rng);
        const double w = wrap_angle(theta);
        EXPECT_LE(std::abs(w), kPi);
        EXPECT_GT(w, -kPi);
        const double shifted = wrap_angle(theta + kTwoPi * k(rng));
        // Compare on the circle so that values straddling the cut still agree.
        EXPECT_NEAR(std::abs(wrap_angle(shifted - w)), 0.0, 1e-9);
    }
}

TEST(Pose2D, ConstructorWrapsHeading) {
    const Pose2D p(1.0, 2.0, 3.0 * kPi);
    EXPECT_NEAR(p.theta(), kPi, 1e-12);
    Pose2D q;
    q.set_theta(-3.0 * kPi / 2.0);
    EXPECT_NEAR(q.theta(), kPi / 2.0, 1e-12);
}

TEST(ConvexPolygon, RejectsNonConvexAndClockwise) {
    EXPECT_THROW(ConvexPolygon({{0, 0}, {1, 0}}), InvalidInput);
    EXPECT_THROW(ConvexPolygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), InvalidInput);  // clockwise
    EXPECT_THROW(ConvexPolygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), InvalidInput);
    EXPECT_NO_THROW(ConvexPolygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
}

TEST(ConvexPolygon, ContainsIsClosedAndDistanceIsEuclidean) {
    const auto sq = ConvexPolygon::box(0, 0, 2, 2);
    EXPECT_TRUE(sq.contains({1, 1}));
    EXPECT_TRUE(sq.contains({0, 1}));
    EXPECT_TRUE(sq.contains({2, 2}));
    EXPECT_FALSE(sq.contains({2.001, 1}));
    EXPECT_DOUBLE_EQ(sq.distance({1, 1}), 0.0);
    EXPECT_NEAR(sq.distance({5, 1}), 3.0, 1e-12);
    EXPECT_NEAR(sq.distance({5, 6}), 5.0, 1e-12);
}

TEST(ObstacleMap, RejectsObstacleOutsideBounds) {
    EXPECT_THROW(ObstacleMap(Bounds{0, 0, 5, 5}, {ConvexPolygon::box(4, 4, 6, 6)}), InvalidInput);
}

TEST(SegmentIntersects, DegenerateSegmentOnEmptyMap) {
    EXPECT_FALSE(segment_intersects_obstacles({0, 0}, {0, 0}, empty_map()));
}

TEST(SegmentIntersects, PassesThroughSquare) {
    const ObstacleMap map(Bounds{-10, -10, 10, 10}, {ConvexPolygon::box(1.5, -0.5, 2.5, 0.5)});
    EXPECT_TRUE(segment_intersects_obstacles({0, 0}, {4, 0}, map));
}

TEST(SegmentIntersects, DisjointSquare) {
    const ObstacleMap map(Bounds{-20, -20, 20, 20}, {ConvexPolygon::box(9.5, 9.5, 10.5, 10.5)});
    EXPECT_FALSE(segment_intersects_obstacles({0, 0}, {4, 4}, map));
}

TEST(SegmentIntersects, SegmentInsideObstacleCounts) {
    const ObstacleMap map(Bounds{-10, -10, 10, 10}, {ConvexPolygon::box(0, 0, 4, 4)});
    EXPECT_TRUE(segment_intersects_obstacles({1, 1}, {2, 2}, map));
}

TEST(InFov, PointAheadWithinRange) {
    EXPECT_TRUE(in_fov(Pose2D(0, 0, 0), Vec2(3, 0), default_fan(), empty_map()));
}

TEST(InFov, BelowMinimumRange) {
    EXPECT_FALSE(in_fov(Pose2D(0, 0, 0), Vec2(0.5, 0), default_fan(), empty_map()));
}

TEST(InFov, BearingOutsideHalfAngle) {
    EXPECT_FALSE(in_fov(Pose2D(0, 0, 0), Vec2(3, 4), default_fan(), empty_map()));
}

TEST(InFov, BoundariesCountAsInside) {
    const auto fp = default_fan();
    EXPECT_TRUE(in_fov(Pose2D(0, 0, 0), Vec2(6, 0), fp, empty_map()));
    EXPECT_TRUE(in_fov(Pose2D(0, 0, 0), Vec2(1, 0), fp, empty_map()));
    EXPECT_FALSE(in_fov(Pose2D(0, 0, 0), Vec2(6.0001, 0), fp, empty_map()));
}

TEST(InFov, OccludedByObstacle) {
    const ObstacleMap map(Bounds{-10, -10, 10, 10}, {ConvexPolygon::box(1.5, -0.5, 2.5, 0.5)});
    EXPECT_FALSE(in_fov(Pose2D(0, 0, 0), Vec2(4, 0), default_fan(), map));
    EXPECT_TRUE(in_fov(Pose2D(0, 0, 0), Vec2(4, 2), default_fan(), map));
}

TEST(InFov, RobotPositionItselfIsNotVisible) {
    const SensorFootprint fp{0.0, 6.0, kPi / 4.0};
    EXPECT_FALSE(in_fov(Pose2D(1, 1, 0), Vec2(1, 1), fp, empty_map()));
}

TEST(InFov, InvariantUnderRigidMotion) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto fp = default_fan();
    const std::vector<Vec2> obstacle{{2, -1}, {3, -1}, {3, 1}, {2, 1}};
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const Pose2D robot(0, 0, u(rng) * kPi);
        const Vec2 target(8.0 * u(rng), 8.0 * u(rng));
        const double rot = u(rng) * kPi;
        const Vec2 shift(5.0 * u(rng), 5.0 * u(rng));
        const Eigen::Rotation2Dd r(rot);

        // Skip points within 1e-6 of a decision threshold.
        const Vec2 d = target - robot.position();
        const double range = d.norm();
        const double bearing = wrap_angle(std::atan2(d.y(), d.x()) - robot.theta());
        if (std::abs(range - fp.r_min) < 1e-6 || std::abs(range - fp.r_max) < 1e-6 ||
            std::abs(std::abs(bearing) - fp.half_angle) < 1e-6) {
            continue;
        }

        std::vector<Vec2> moved;
        for (const auto& v : obstacle) moved.push_back(r * v + shift);
        const ObstacleMap a(Bounds{-30, -30, 30, 30}, {ConvexPolygon(obstacle)});
        const ObstacleMap b(Bounds{-30, -30, 30, 30}, {ConvexPolygon(moved)});
        const Pose2D robot_b(r * robot.position() + shift, robot.theta() + rot);
        EXPECT_EQ(in_fov(robot, target, fp, a), in_fov(robot_b, r * target + shift, fp, b));
        ++checked;
    }
    EXPECT_GT(checked, 1900);
}

TEST(InFov, ImpliesClearLineOfSight) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    const ObstacleMap map(Bounds{0, 0, 20, 20}, {ConvexPolygon::box(5, 5, 8, 9), ConvexPolygon::box(12, 3, 14, 15)});
    const SensorFootprint fp{1.0, 6.0, kPi};
    for (int i = 0; i < 5000; ++i) {
        const Pose2D robot(u(rng), u(rng), u(rng));
        const Vec2 target(u(rng), u(rng));
        if (in_fov(robot, target, fp, map)) {
            EXPECT_FALSE(segment_intersects_obstacles(robot.position(), target, map));
        }
    }
}

TEST(PoseInFreeSpace, OpenSpace) {
    EXPECT_TRUE(pose_in_free_space(Pose2D(5, 5, 0), ObstacleMap(Bounds{0, 0, 10, 10}), 0.2));
}

TEST(PoseInFreeSpace, ObstacleVertexCollidesAtZeroRadius) {
    const ObstacleMap map(Bounds{0, 0, 10, 10}, {ConvexPolygon::box(4, 4, 6, 6)});
    EXPECT_FALSE(pose_in_free_space(Pose2D(4, 4, 0), map, 0.0));
    EXPECT_FALSE(pose_in_free_space(Pose2D(3.95, 5, 0), map, 0.1));
    EXPECT_TRUE(pose_in_free_space(Pose2D(3.5, 5, 0), map, 0.1));
}

TEST(PoseInFreeSpace, OutsideBounds) {
    const ObstacleMap map(Bounds{0, 0, 10, 10});
    EXPECT_FALSE(pose_in_free_space(Pose2D(11, 5, 0), map, 0.0));
    EXPECT_FALSE(pose_in_free_space(Pose2D(9.9, 5, 0), map, 0.2));
}

TEST(PoseInFreeSpace, NegativeRadiusRejected) {
    EXPECT_THROW((void)pose_in_free_space(Pose2D(1, 1, 0), ObstacleMap(Bounds{0, 0, 10, 10}), -0.1), InvalidInput);
}

TEST(SensorFootprint, ValidatesParameters) {
    EXPECT_THROW((SensorFootprint{6.0, 1.0, kPi / 4}.validate()), InvalidInput);
    EXPECT_THROW((SensorFootprint{1.0, 6.0, 0.0}.validate()), InvalidInput);
    EXPECT_THROW((SensorFootprint{1.0, 6.0, 4.0}.validate()), InvalidInput);
    EXPECT_NO_THROW((SensorFootprint{0.0, 6.0, kPi}.validate()));
}
