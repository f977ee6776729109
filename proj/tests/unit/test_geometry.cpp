#include <gtest/gtest.h>

#include <random>

#include "leadfollow/geometry.hpp"
#include "leadfollow/goal.hpp"

using namespace leadfollow;

namespace {

Polygon unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

}  // namespace

TEST(Geometry, NormalizeAngleRange) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double n = normalize_angle(a);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
    EXPECT_NEAR(std::remainder(a - n, 2.0 * kPi), 0.0, 1e-9);
  }
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(Pose(0, 0, 3.0 * kPi).theta, kPi);
}

TEST(Geometry, PoseFrameRoundTrip) {
  const Pose p(1.0, -2.0, 0.7);
  const Vec2 w(3.5, 4.0);
  EXPECT_TRUE(p.to_world(p.to_local(w)).isApprox(w, 1e-12));
  EXPECT_TRUE(p.to_world(Vec2(1, 0)).isApprox(p.position() + p.heading(), 1e-12));
}

TEST(Geometry, SegmentQueries) {
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 1}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 0}, {-1, 0}, {1, 0}), 2.0);
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  const auto t = ray_segment({0, 0}, {1, 0}, {2, -1}, {2, 1});
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 2.0, 1e-12);
  const auto c = ray_circle({0, 0}, {1, 0}, {5, 0}, 1.0);
  ASSERT_TRUE(c);
  EXPECT_NEAR(*c, 4.0, 1e-12);
  EXPECT_FALSE(ray_circle({0, 0}, {-1, 0}, {5, 0}, 1.0));
}

TEST(Geometry, PolygonBasics) {
  const auto sq = unit_square();
  EXPECT_DOUBLE_EQ(signed_area(sq), 1.0);
  EXPECT_TRUE(is_counterclockwise(sq));
  EXPECT_TRUE(polygon_centroid(sq).isApprox(Vec2(0.5, 0.5)));
  EXPECT_DOUBLE_EQ(perimeter(sq), 4.0);
  EXPECT_TRUE(point_in_polygon(sq, {0.5, 0.5}));
  EXPECT_TRUE(point_in_polygon(sq, {1.0, 0.5}));
  EXPECT_FALSE(point_in_polygon(sq, {1.5, 0.5}));
}

TEST(Geometry, ConvexHullContainsAllPoints) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 40; ++i) pts.emplace_back(n(rng), n(rng));
    const auto hull = convex_hull(pts);
    ASSERT_GE(hull.size(), 3u);
    EXPECT_TRUE(is_counterclockwise(hull));
    for (const auto& p : pts) EXPECT_LE(signed_distance(hull, p), 1e-9);
  }
}

TEST(Geometry, SignedDistanceMatchesFiniteDifference) {
  const auto sq = unit_square();
  EXPECT_NEAR(signed_distance(sq, {0.5, 0.5}), -0.5, 1e-12);
  EXPECT_NEAR(signed_distance(sq, {2.0, 0.5}), 1.0, 1e-12);
  EXPECT_NEAR(signed_distance(sq, {2.0, 2.0}), std::sqrt(2.0), 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p(u(rng), u(rng));
    Vec2 g;
    signed_distance(sq, p, &g);
    const double h = 1e-6;
    const Vec2 fd((signed_distance(sq, p + Vec2(h, 0)) - signed_distance(sq, p - Vec2(h, 0))) / (2 * h),
                  (signed_distance(sq, p + Vec2(0, h)) - signed_distance(sq, p - Vec2(0, h))) / (2 * h));
    // Skip the medial axis where the gradient jumps.
    if ((fd.norm() - 1.0) > 1e-3) continue;
    EXPECT_NEAR((g - fd).norm(), 0.0, 1e-4);
  }
}

TEST(Geometry, ClosestPointsBetweenDiscs) {
  const auto a = regular_polygon({0, 0}, 1.0, 64);
  const auto b = regular_polygon({4, 0}, 1.0, 64);
  const auto [pa, pb] = closest_points(a, b);
  EXPECT_NEAR((pb - pa).norm(), 2.0, 1e-9);
}

TEST(Geometry, SegmentCrossesInteriorIgnoresGrazing) {
  const auto sq = unit_square();
  EXPECT_TRUE(segment_crosses_interior(sq, {-1, 0.5}, {2, 0.5}));
  EXPECT_FALSE(segment_crosses_interior(sq, {-1, 0.0}, {2, 0.0}));
  EXPECT_FALSE(segment_crosses_interior(sq, {-1, 2.0}, {2, 2.0}));
}

TEST(Goal, NearestPointPerVariant) {
  const GoalConstraint line = LineSetGoal{{0, -1}, {0, 1}};
  EXPECT_TRUE(nearest_goal_point(line, {3, 0.5}).isApprox(Vec2(0, 0.5)));
  EXPECT_TRUE(nearest_goal_point(line, {3, 5}).isApprox(Vec2(0, 1)));
  ArcSetGoal arc;
  arc.center = {0, 0};
  arc.radius = 2.0;
  arc.start_angle = 0.0;
  arc.span = kPi / 2;
  EXPECT_TRUE(nearest_goal_point(arc, {5, 5}).isApprox(Vec2(std::sqrt(2.0), std::sqrt(2.0))));
  EXPECT_TRUE(nearest_goal_point(arc, {0, -5}).isApprox(Vec2(2, 0)));
  EXPECT_TRUE(arc.contains_angle(0.3));
  EXPECT_FALSE(arc.contains_angle(-0.3));
  const GoalConstraint pose = PointPoseGoal{Pose(1, 2, 0.5), 0.2, true};
  EXPECT_TRUE(nearest_goal_point(pose, {9, 9}).isApprox(Vec2(1, 2)));
}
