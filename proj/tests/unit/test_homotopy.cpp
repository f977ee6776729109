#include <gtest/gtest.h>

#include <map>
#include <random>

#include "leadfollow/errors.hpp"
#include "leadfollow/topo/homotopy.hpp"

using namespace leadfollow;
using namespace leadfollow::topo;

namespace {

ObstacleGroup point_group(const Vec2& c, int id) {
  ObstacleGroup g;
  g.id = id;
  g.centroid = c;
  g.boundary = regular_polygon(c, 0.1, 8);
  return g;
}

// Crossing-rule winding number of the loop closed by the return chord.
int crossing_winding(const std::vector<Vec2>& pts, const Vec2& c) {
  int wn = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % n];
    const double s = cross(b - a, c - a);
    if (a.y() <= c.y()) {
      if (b.y() > c.y() && s > 0) ++wn;
    } else if (b.y() <= c.y() && s < 0) {
      --wn;
    }
  }
  return wn;
}

double loop_distance(const std::vector<Vec2>& pts, const Vec2& c) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d = std::min(d, point_segment_distance(c, pts[i], pts[(i + 1) % pts.size()]));
  }
  return d;
}

Trajectory traj_of(const std::vector<Vec2>& pts, std::vector<int> sig, double tag = 0.0) {
  Trajectory t;
  for (const auto& p : pts) t.poses.emplace_back(p, 0.0);
  t.signature.values = std::move(sig);
  t.cost = tag;
  return t;
}

}  // namespace

TEST(Homotopy, MirrorPassesHaveOppositeSigns) {
  const std::vector<ObstacleGroup> groups{point_group({2, 0.3}, 0)};
  const std::vector<Vec2> above{{0, 0}, {2, 1}, {4, 0}};
  const std::vector<Vec2> below{{0, 0}, {2, -1}, {4, 0}};
  const auto a = signature(std::span<const Vec2>(above), groups);
  const auto b = signature(std::span<const Vec2>(below), groups);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.values[0], 1);
  EXPECT_EQ(b.values[0], -1);
  EXPECT_NEAR(loop_winding(above, {2, 0.3}), 2.0 * kPi, 1e-9);
  EXPECT_NEAR(loop_winding(below, {2, 0.3}), 0.0, 1e-9);
}

TEST(Homotopy, ChordSideDecidesWhenNotEnclosed) {
  const std::vector<Vec2> straight{{0, 0}, {4, 0}};
  EXPECT_EQ(side_value(straight, {2, 1}), -1);
  EXPECT_EQ(side_value(straight, {2, -1}), 1);
}

TEST(Homotopy, CoincidentCentroidThrows) {
  const std::vector<ObstacleGroup> groups{point_group({2, 0}, 0)};
  const std::vector<Vec2> through{{0, 0}, {2, 0}, {4, 0}};
  EXPECT_THROW(signature(std::span<const Vec2>(through), groups), DegenerateGeometry);
  const std::vector<Vec2> single{{0, 0}};
  EXPECT_THROW(signature(std::span<const Vec2>(single), groups), DegenerateGeometry);
}

TEST(Homotopy, SideMatchesCrossingWindingOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> jitter(-2.0, 2.0);
  std::uniform_real_distribution<double> cx(-1.0, 5.0);
  int enclosed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> pts{{0, 0}};
    for (int k = 1; k < 6; ++k) pts.emplace_back(0.8 * k + 0.3 * jitter(rng), jitter(rng));
    pts.emplace_back(4.8, 0.0);
    for (int q = 0; q < 10; ++q) {
      const Vec2 c(cx(rng), jitter(rng));
      if (loop_distance(pts, c) < 1e-3) continue;
      const int wn = crossing_winding(pts, c);
      EXPECT_NEAR(loop_winding(pts, c), -2.0 * kPi * wn, 1e-6);
      int want;
      if (wn != 0) {
        want = wn > 0 ? -1 : 1;
        ++enclosed;
      } else {
        want = cross(pts.back() - pts.front(), c - pts.front()) > 0 ? -1 : 1;
      }
      EXPECT_EQ(side_value(pts, c), want);
    }
  }
  EXPECT_GT(enclosed, 50);
}

TEST(Homotopy, DedupMatchesShortestPerSignatureOracle) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> sign(0, 1);
  std::uniform_real_distribution<double> len(1.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Trajectory> in;
    for (int i = 0; i < 12; ++i) {
      std::vector<int> sig{sign(rng) ? 1 : -1, sign(rng) ? 1 : -1};
      in.push_back(traj_of({{0, 0}, {len(rng), 0}}, sig, double(i)));
    }
    std::map<std::string, const Trajectory*> best;
    for (const auto& t : in) {
      auto& b = best[t.signature.key()];
      if (!b || t.length() < b->length()) b = &t;
    }
    const auto out = dedup_by_signature(in);
    ASSERT_EQ(out.size(), best.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out[i].cost, best[out[i].signature.key()]->cost);
      if (i > 0) EXPECT_LE(out[i - 1].length(), out[i].length());
    }
    const auto again = dedup_by_signature(out);
    ASSERT_EQ(again.size(), out.size());
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(again[i].cost, out[i].cost);
  }
}

TEST(Homotopy, DedupTieKeepsFirst) {
  std::vector<Trajectory> in{traj_of({{0, 0}, {2, 0}}, {1}, 7.0), traj_of({{0, 0}, {0, 2}}, {1}, 8.0)};
  const auto out = dedup_by_signature(in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cost, 7.0);
  EXPECT_TRUE(dedup_by_signature({}).empty());
}

TEST(Homotopy, SignatureInvariantUnderSmallPerturbations) {
  const std::vector<ObstacleGroup> groups{point_group({1.5, 0.5}, 0), point_group({3.0, -0.6}, 1),
                                          point_group({4.5, 0.7}, 2)};
  // Weaves between the groups with at least 0.5 m clearance.
  const std::vector<Vec2> base{{0, 0}, {1.5, -0.4}, {3.0, 0.4}, {4.5, -0.3}, {6, 0}};
  const auto ref = signature(std::span<const Vec2>(base), groups);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int k = 0; k < 100; ++k) {
    auto pts = base;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) pts[i] += Vec2(n(rng), n(rng));
    EXPECT_EQ(signature(std::span<const Vec2>(pts), groups), ref);
  }
}
