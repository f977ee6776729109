#include <gtest/gtest.h>

#include <random>

#include "leadfollow/adapt/adaptation.hpp"
#include "leadfollow/errors.hpp"

using namespace leadfollow;
using namespace leadfollow::adapt;

namespace {

topo::ObstacleGroup poly_group(const Polygon& p, int id) {
  topo::ObstacleGroup g;
  g.id = id;
  g.boundary = p;
  g.centroid = polygon_centroid(p);
  return g;
}

topo::ObstacleGroup box_group(double x0, double y0, double x1, double y1, int id) {
  return poly_group({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, id);
}

perception::Embedding embedding(double conf, double dist, double t) {
  perception::Embedding e;
  e.vector = Eigen::VectorXd::Unit(8, 0);
  e.confidence = conf;
  e.distance_at_capture = dist;
  e.timestamp = t;
  return e;
}

TransitionFlags flags(bool fov, bool id, bool map, bool approach = false, bool cmd = false) {
  TransitionFlags f;
  f.in_fov = fov;
  f.identified = id;
  f.in_costmap = map;
  f.leader_approaching = approach;
  f.new_leader_command = cmd;
  return f;
}

}  // namespace

TEST(Transition, TableExamples) {
  EXPECT_EQ(transition(FollowState::Following, flags(true, true, true)), FollowState::Following);
  EXPECT_EQ(transition(FollowState::Following, flags(true, true, false)), FollowState::Chasing);
  EXPECT_EQ(transition(FollowState::Following, flags(false, true, true)), FollowState::Planning);
  EXPECT_EQ(transition(FollowState::Following, flags(true, false, true)), FollowState::Planning);
  EXPECT_EQ(transition(FollowState::Following, flags(true, true, true, true)), FollowState::Retreating);
  EXPECT_EQ(transition(FollowState::Chasing, flags(false, false, false, false, true)), FollowState::Switching);
}

TEST(Transition, TotalOverAllFlagCombinations) {
  const FollowState all[] = {FollowState::Chasing, FollowState::Following, FollowState::Planning,
                             FollowState::Retreating, FollowState::Switching};
  for (auto prev : all) {
    for (int bits = 0; bits < 32; ++bits) {
      const auto f = flags(bits & 1, bits & 2, bits & 4, bits & 8, bits & 16);
      FollowState want;
      if (f.new_leader_command) want = FollowState::Switching;
      else if (!f.in_fov || !f.identified) want = FollowState::Planning;
      else if (!f.in_costmap) want = FollowState::Chasing;
      else if (f.leader_approaching) want = FollowState::Retreating;
      else want = FollowState::Following;
      EXPECT_EQ(transition(prev, f), want);
    }
  }
}

TEST(Transition, StateNamesRoundTrip) {
  for (auto s : {FollowState::Chasing, FollowState::Following, FollowState::Planning,
                 FollowState::Retreating, FollowState::Switching}) {
    EXPECT_EQ(follow_state_from_string(to_string(s)), s);
  }
  EXPECT_THROW(follow_state_from_string("idle"), ConfigError);
}

TEST(StateMachine, DwellTimeDebouncesFlicker) {
  StateMachine sm;
  std::vector<TransitionEvent> ev;
  EXPECT_EQ(sm.step(flags(true, true, true), 0.0, &ev), FollowState::Following);
  EXPECT_EQ(sm.step(flags(false, false, true), 0.1, &ev), FollowState::Following);
  EXPECT_EQ(sm.step(flags(true, true, true), 0.2, &ev), FollowState::Following);
  EXPECT_EQ(sm.step(flags(false, false, true), 0.35, &ev), FollowState::Planning);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[1].from, FollowState::Following);
  EXPECT_EQ(ev[1].to, FollowState::Planning);
  EXPECT_DOUBLE_EQ(ev[1].time, 0.35);
}

TEST(StateMachine, NewLeaderPassesThroughSwitching) {
  StateMachine sm(AdaptationParams{}, FollowState::Following);
  std::vector<TransitionEvent> ev;
  const auto s = sm.step(flags(true, true, false, false, true), 0.05, &ev);
  EXPECT_EQ(s, FollowState::Chasing);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].to, FollowState::Switching);
  EXPECT_EQ(ev[1].from, FollowState::Switching);
}

TEST(Adaptation, SafeDistanceClamps) {
  AdaptationParams p;
  EXPECT_DOUBLE_EQ(safe_distance(2.0, p), 1.0);
  EXPECT_DOUBLE_EQ(safe_distance(5.0, p), 1.5);
  EXPECT_DOUBLE_EQ(safe_distance(20.0, p), 3.0);
  EXPECT_DOUBLE_EQ(safe_distance(-1.0, p), 1.0);
}

TEST(Adaptation, GoalLineLength) {
  EXPECT_DOUBLE_EQ(goal_line_length({0, 0}, {10, 0}, 8.0, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(goal_line_length({0, 0}, {3, 0}, 8.0, 0.5), 0.0);
}

TEST(Adaptation, SpeedCap) {
  AdaptationParams p;
  EXPECT_DOUBLE_EQ(speed_cap({0.5, 0}, {5, 0}, {0, 0}, p, 1.5), 1.5);
  EXPECT_NEAR(speed_cap({0.3, 0.4}, {2, 0}, {0, 0}, p, 1.5), 0.5 + 0.6, 1e-12);
  EXPECT_NEAR(speed_cap({0, 0}, {2, 0}, {0, 0}, p, 1.5), 0.6, 1e-12);
}

TEST(Adaptation, LeaderApproaching) {
  AdaptationParams p;
  EXPECT_TRUE(leader_approaching({1, 0}, {0, 0}, {1.5, 0}, 1.5, p));
  EXPECT_FALSE(leader_approaching({-1, 0}, {0, 0}, {1.5, 0}, 1.5, p));
  EXPECT_FALSE(leader_approaching({1, 0}, {0, 0}, {5, 0}, 1.5, p));
  EXPECT_FALSE(leader_approaching({0.2, 0}, {0, 0}, {1.5, 0}, 1.5, p));
}

TEST(Adaptation, ParamsValidate) {
  AdaptationParams p;
  p.d_min = 4.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = AdaptationParams{};
  p.alpha_nis = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(AdaptationParams{}.validate());
}

TEST(ChasingGoal, LineSplitsAroundObstaclesLikeDenseOracle) {
  AdaptationParams p;
  const topo::Costmap map(Pose(), 8.0, 0.1);
  const Vec2 robot(0, 0), leader(10, 0);
  const std::vector<topo::ObstacleGroup> groups{
      poly_group(regular_polygon({map.x_min() + 8.0, 0.0}, 0.3, 32), 0)};
  const auto lines = chasing_goal(robot, leader, map, groups, p);
  ASSERT_EQ(lines.size(), 2u);
  // Oracle: 1 mm walk along the full edge segment.
  const double x = map.x_min() + map.width();
  const double half = 0.5 * goal_line_length(robot, leader, 8.0, p.alpha_goal_line);
  std::vector<std::pair<double, double>> free;
  bool open = false;
  for (double y = -half; y <= half + 1e-9; y += 0.001) {
    const bool ok = hull_clearance(groups, {x, y}) >= p.goal_margin;
    if (ok && !open) free.push_back({y, y});
    if (ok) free.back().second = y;
    open = ok;
  }
  ASSERT_EQ(free.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const double lo = std::min(lines[i].start.y(), lines[i].end.y());
    const double hi = std::max(lines[i].start.y(), lines[i].end.y());
    EXPECT_NEAR(lines[i].start.x(), x, 1e-9);
    EXPECT_NEAR(lo, free[i].first, 0.005);
    EXPECT_NEAR(hi, free[i].second, 0.005);
  }
}

TEST(ChasingGoal, LeaderInsideMapThrows) {
  const topo::Costmap map(Pose(), 8.0, 0.1);
  EXPECT_THROW(chasing_goal({0, 0}, {1, 0}, map, {}, AdaptationParams{}), LeaderInsideMap);
}

TEST(FollowingGoal, FreeSpaceGivesFullCircle) {
  AdaptationParams p;
  const auto arcs = following_goal({1, 1}, 1.5, {}, p);
  ASSERT_EQ(arcs.size(), 1u);
  EXPECT_TRUE(arcs[0].full_circle());
  EXPECT_DOUBLE_EQ(arcs[0].radius, 1.5);
  EXPECT_DOUBLE_EQ(arcs[0].epsilon, p.epsilon);
}

TEST(FollowingGoal, BlockedHalfLeavesSemicircle) {
  AdaptationParams p;
  const std::vector<topo::ObstacleGroup> groups{box_group(-5, -5, -0.1, 5, 0)};
  const auto arcs = following_goal({0, 0}, 2.0, groups, p, Vec2(3, 0));
  ASSERT_EQ(arcs.size(), 1u);
  int free_deg = 0;
  for (int k = 0; k < 360; ++k) {
    const double a = k * kPi / 180.0;
    free_deg += hull_clearance(groups, 2.0 * Vec2(std::cos(a), std::sin(a))) >= p.goal_margin;
  }
  EXPECT_NEAR(arcs[0].span, free_deg * kPi / 180.0, 2.0 * kPi / 180.0);
  EXPECT_NEAR(arcs[0].span, kPi, 0.03);
  EXPECT_TRUE(arcs[0].contains_angle(0.0));
}

TEST(FollowingGoal, ArcPointsKeepMargin) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  AdaptationParams p;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<topo::ObstacleGroup> groups;
    for (int k = 0; k < 4; ++k) {
      const Vec2 c(u(rng), u(rng));
      if (c.norm() < 0.8) continue;
      groups.push_back(poly_group(regular_polygon(c, 0.5, 16), int(groups.size())));
    }
    const double d = 1.0 + (trial % 5) * 0.4;
    std::vector<ArcSetGoal> arcs;
    try {
      arcs = following_goal({0, 0}, d, groups, p);
    } catch (const NoFreeArc&) {
      continue;
    }
    for (const auto& arc : arcs) {
      EXPECT_GE(arc.span, p.min_arc);
      for (int s = 0; s <= 50; ++s) {
        const Vec2 q = arc.point_at(arc.start_angle + arc.span * s / 50.0);
        EXPECT_NEAR(q.norm(), d, 1e-9);
        EXPECT_GE(hull_clearance(groups, q), p.goal_margin - 1e-6);
      }
    }
  }
}

TEST(FollowingGoal, FullyBlockedThrows) {
  const std::vector<topo::ObstacleGroup> groups{box_group(-5, -5, 5, 5, 0)};
  EXPECT_THROW(following_goal({0, 0}, 1.0, groups, AdaptationParams{}), NoFreeArc);
}

TEST(RetreatingGoal, PicksArcNearestRobot) {
  AdaptationParams p;
  const std::vector<topo::ObstacleGroup> groups{box_group(-0.5, 1.5, 0.5, 2.5, 0),
                                                box_group(-0.5, -2.5, 0.5, -1.5, 1)};
  const auto all = following_goal({0, 0}, 2.0, groups, p, Vec2(3, 0.5));
  ASSERT_EQ(all.size(), 2u);
  const auto arc = retreating_goal({0, 0}, 2.0, groups, {3, 0.5}, p);
  EXPECT_TRUE(arc.contains_angle(0.0));
  EXPECT_FALSE(arc.contains_angle(kPi));
}

TEST(PlanningGoal, PassesLastSeenPoseThrough) {
  AdaptationParams p;
  perception::LeaderTrack track;
  EXPECT_THROW(planning_goal(track, p), NeverSeen);
  track.last_seen_pose = Pose(2, 3, 0.5);
  const auto g = planning_goal(track, p);
  EXPECT_TRUE(g.pose.position().isApprox(Vec2(2, 3)));
  EXPECT_DOUBLE_EQ(g.pose.theta, 0.5);
  EXPECT_DOUBLE_EQ(g.epsilon, p.epsilon);
  EXPECT_TRUE(g.constrain_heading);
}

TEST(SwitchingReset, ReseedsBuffersAndReevaluates) {
  perception::TemporalBuffer tb;
  perception::DistanceFrameBuffer dfb;
  for (int i = 0; i < 8; ++i) {
    tb.insert(embedding(0.5 + 0.05 * i, 0.5 + i, i));
    dfb.insert(embedding(0.5 + 0.05 * i, 0.5 + i, i));
  }
  const auto first = embedding(0.9, 2.5, 10.0);
  const auto far = switching_reset(tb, dfb, first, flags(true, true, false, false, true));
  EXPECT_EQ(far.temporal.size(), 1u);
  EXPECT_EQ(far.distance.occupied(), 1u);
  EXPECT_EQ(far.temporal.capacity(), tb.capacity());
  EXPECT_EQ(far.distance.bin_count(), dfb.bin_count());
  EXPECT_EQ(far.next, FollowState::Chasing);
  const auto near = switching_reset(tb, dfb, first, flags(true, true, true, false, true));
  EXPECT_EQ(near.next, FollowState::Following);
  EXPECT_EQ(tb.size(), 8u);
}
