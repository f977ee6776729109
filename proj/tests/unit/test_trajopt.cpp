#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "leadfollow/errors.hpp"
#include "leadfollow/topo/homotopy.hpp"
#include "leadfollow/trajopt/optimizer.hpp"
#include "leadfollow/trajopt/select.hpp"

using namespace leadfollow;
using namespace leadfollow::trajopt;

namespace {

Trajectory straight(const Vec2& a, const Vec2& b, int m, double dt = 0.3) {
  Trajectory t;
  t.dt = dt;
  const double th = angle_of(b - a);
  for (int i = 0; i <= m; ++i) t.poses.emplace_back(a + (b - a) * (double(i) / m), th);
  t.poses.front().theta = 0.0;
  return t;
}

Trajectory with_cost(double cost, std::vector<int> sig) {
  Trajectory t;
  t.poses = {Pose(), Pose(1, 0, 0)};
  t.cost = cost;
  t.signature.values = std::move(sig);
  return t;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(TrajOpt, CostIsLengthOverSpeedCap) {
  EXPECT_DOUBLE_EQ(cost(straight({0, 0}, {1.5, 0}, 3), 1.5), 1.0);
  EXPECT_DOUBLE_EQ(cost(straight({0, 0}, {0, 0}, 3), 1.5), 0.0);
  Trajectory l;
  l.poses = {Pose(0, 0, 0), Pose(3, 0, 0), Pose(3, 4, 0), Pose(3, 4.5, 0)};
  EXPECT_DOUBLE_EQ(cost(l, 1.5), 7.5 / 1.5);
}

TEST(TrajOpt, FreeSpaceGoalTakesLengthOverSpeed) {
  ConstraintSet cs;
  cs.v_cap = 1.5;
  OptimizerConfig cfg;
  // Tight tolerance: travel time is distance over speed.
  cs.goal = PointPoseGoal{Pose(3, 0, 0), 0.05, true};
  const auto tight = optimize(straight({0, 0}, {3, 0}, 8), cs, cfg);
  EXPECT_NEAR(tight.cost, 2.0, 0.1);
  // Default tolerance: the endpoint parks where the goal hinge gradient
  // 2 w h balances the time gradient 1 / v_cap.
  cs.goal = PointPoseGoal{Pose(3, 0, 0), 0.2, true};
  const auto out = optimize(straight({0, 0}, {3, 0}, 8), cs, cfg);
  const double stop = 0.2 + 1.0 / (2.0 * cfg.weights.goal * cs.v_cap);
  EXPECT_NEAR(goal_error(out, cs.goal).position, stop, 0.01);
  EXPECT_NEAR(out.cost, (3.0 - stop) / cs.v_cap, 0.01);
  for (const auto& p : out.poses) EXPECT_NEAR(p.y, 0.0, 1e-6);
}

TEST(TrajOpt, LineGoalLetsEndpointSlide) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  OptimizerConfig cfg;
  for (int k = 0; k < 100; ++k) {
    LineSetGoal line{{3.0 + 0.5 * u(rng), u(rng)}, {3.0 + 0.5 * u(rng), u(rng)}};
    if ((line.end - line.start).norm() < 0.3) continue;
    ConstraintSet cs;
    cs.goal = line;
    const Vec2 target = nearest_goal_point(cs.goal, Vec2::Zero());
    const auto out = optimize(straight({0, 0}, target + Vec2(0.3 * u(rng), 0.3 * u(rng)), 8), cs, cfg);
    const auto ge = goal_error(out, cs.goal);
    EXPECT_LE(ge.position, 3.0 * cfg.epsilon);
    EXPECT_LE(out.cost, (target.norm() + 3.0 * cfg.epsilon) / cs.v_cap * 1.05);
  }
}

TEST(TrajOpt, ArcGoalEndsFacingCenter) {
  ArcSetGoal arc;
  arc.center = {4, 0};
  arc.radius = 1.5;
  ConstraintSet cs;
  cs.goal = arc;
  OptimizerConfig cfg;
  const auto out = optimize(straight({0, 0}, {2.5, 0}, 8), cs, cfg);
  const auto ge = goal_error(out, cs.goal);
  EXPECT_LE(ge.position, 3.0 * arc.epsilon);
  EXPECT_LE(ge.heading, 3.0 * arc.epsilon);
  const Vec2 to_c = arc.center - out.poses.back().position();
  EXPECT_LT(std::abs(normalize_angle(angle_of(to_c) - out.poses.back().theta)), 3.0 * arc.epsilon);
}

TEST(TrajOpt, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> n(0.0, 0.15);
  ConstraintSet cs;
  cs.static_groups.push_back(regular_polygon({1.5, 0.4}, 0.4, 16));
  cs.dynamic_obstacles.push_back({{2.5, -1.0}, {0.0, 0.5}, 0.5});
  cs.goal = ArcSetGoal{{4, 0}, 1.0, 0.0, 2.0 * kPi, 0.2};
  OptimizerConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    auto t = straight({0, 0}, {3, 0}, 10);
    for (std::size_t i = 1; i < t.poses.size(); ++i) {
      t.poses[i].x += n(rng);
      t.poses[i].y += n(rng);
      t.poses[i].theta += n(rng);
    }
    const auto jac = residual_jacobian(t, cs, cfg);
    const Eigen::VectorXd x = pack(t);
    Eigen::MatrixXd fd(jac.rows(), jac.cols());
    const double h = 1e-6;
    for (int j = 0; j < x.size(); ++j) {
      Trajectory tp = t, tm = t;
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      unpack(xp, tp);
      unpack(xm, tm);
      fd.col(j) = (residual_vector(tp, cs, cfg) - residual_vector(tm, cs, cfg)) / (2 * h);
    }
    EXPECT_LE(max_abs(jac - fd) / std::max(1.0, max_abs(jac)), 1e-4) << "trial " << trial;
  }
}

TEST(TrajOpt, AcceptedStepsNeverIncreaseObjective) {
  ConstraintSet cs;
  cs.static_groups.push_back(regular_polygon({2.0, 0.1}, 0.5, 16));
  cs.goal = PointPoseGoal{Pose(4, 0, 0), 0.2, false};
  OptimizerConfig cfg;
  auto seed = straight({0, 0}, {4, 0}, 12);
  for (std::size_t i = 1; i + 1 < seed.poses.size(); ++i) seed.poses[i].y = -0.9 * std::sin(kPi * i / 12.0);
  OptimizerTrace trace;
  const auto out = optimize_unchecked(seed, cs, cfg, &trace);
  ASSERT_FALSE(trace.records.empty());
  double last = std::numeric_limits<double>::infinity();
  for (const auto& r : trace.records) {
    if (!r.accepted) continue;
    EXPECT_LE(r.objective, last + 1e-12);
    last = r.objective;
  }
  EXPECT_LE(objective(out, cs, cfg), objective(seed, cs, cfg));
  EXPECT_GE(min_clearance(out, cs), -1e-6);
  EXPECT_NE(trace.to_jsonl().find("\"objective\""), std::string::npos);
}

TEST(TrajOpt, InfeasibleWhenGoalInsideObstacle) {
  ConstraintSet cs;
  cs.static_groups.push_back(regular_polygon({3.0, 0.0}, 1.0, 16));
  cs.goal = PointPoseGoal{Pose(3, 0, 0), 0.1, false};
  OptimizerConfig cfg;
  EXPECT_THROW(optimize(straight({0, 0}, {3, 0}, 8), cs, cfg), Infeasible);
}

TEST(Select, ZeroAlphaIsArgmin) {
  const std::vector<Trajectory> c{with_cost(3.0, {1}), with_cost(2.0, {-1}), with_cost(2.5, {1})};
  const HomotopySignature prev{{1}};
  EXPECT_EQ(select_index(c, prev, 0.0), 1u);
  EXPECT_EQ(select_index(c, std::nullopt, 0.5), 1u);
}

TEST(Select, HysteresisKeepsPreviousClass) {
  const std::vector<Trajectory> c{with_cost(2.2, {1}), with_cost(2.0, {-1})};
  const HomotopySignature prev{{1}};
  // f = 0.7 for the agreeing class, 1.0 otherwise.
  EXPECT_EQ(select_index(c, prev, 0.3), 0u);
  const std::vector<Trajectory> far{with_cost(3.0, {1}), with_cost(2.0, {-1})};
  EXPECT_EQ(select_index(far, prev, 0.3), 1u);
}

TEST(Select, MatchesBruteForceScores) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> cost_d(1.0, 4.0);
  std::uniform_int_distribution<int> v(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int l = 1 + trial % 4;
    HomotopySignature prev;
    for (int i = 0; i < l; ++i) prev.values.push_back(v(rng));
    std::vector<Trajectory> c;
    for (int k = 0; k < 6; ++k) {
      std::vector<int> sig;
      for (int i = 0; i < l; ++i) sig.push_back(v(rng) >= 0 ? 1 : -1);
      c.push_back(with_cost(cost_d(rng), sig));
    }
    std::size_t best = 0;
    double best_score = 1e300;
    for (std::size_t k = 0; k < c.size(); ++k) {
      int mismatch = 0;
      for (int i = 0; i < l; ++i) mismatch += prev.values[i] != 0 && prev.values[i] != c[k].signature.values[i];
      const double score = (0.7 + 0.3 * mismatch / double(l)) * c[k].cost;
      if (score < best_score) {
        best_score = score;
        best = k;
      }
    }
    EXPECT_EQ(select_index(c, prev, 0.3), best);
  }
}

TEST(Select, RejectsBadInput) {
  const std::vector<Trajectory> none;
  EXPECT_THROW(select(none, std::nullopt, 0.3), std::invalid_argument);
  const std::vector<Trajectory> one{with_cost(1.0, {1})};
  EXPECT_THROW(select(one, std::nullopt, 1.0), std::invalid_argument);
  EXPECT_THROW(select(one, std::nullopt, -0.1), std::invalid_argument);
}

TEST(Select, AlignSignatureByCentroid) {
  const HomotopySignature prev{{1, -1}};
  const std::vector<Vec2> prev_c{{0, 0}, {5, 0}};
  std::vector<topo::ObstacleGroup> cur(3);
  cur[0].centroid = {5.3, 0};
  cur[1].centroid = {10, 0};
  cur[2].centroid = {0.2, 0};
  const auto a = align_signature(prev, prev_c, cur, 1.0);
  EXPECT_EQ(a.values, (std::vector<int>{-1, 0, 1}));
}

TEST(Solver, BandedSolveMatchesDense) {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> n(0.0, 1.0);
  const int size = 30, band = 5;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = std::max(0, i - band); j <= i; ++j) {
      const double v = n(rng);
      a(i, j) += v;
      a(j, i) += i == j ? 0.0 : v;
    }
    a(i, i) = std::abs(a(i, i)) + 4.0 * band;
  }
  Eigen::VectorXd b(size);
  for (int i = 0; i < size; ++i) b[i] = n(rng);
  const Eigen::VectorXd want = a.ldlt().solve(b);
  Eigen::MatrixXd work = a;
  Eigen::VectorXd x = b;
  ASSERT_TRUE(solve_banded_spd(work, x, band));
  EXPECT_LE((x - want).cwiseAbs().maxCoeff(), 1e-9);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd r = Eigen::VectorXd::Ones(4);
  EXPECT_FALSE(solve_banded_spd(neg, r, 1));
}
