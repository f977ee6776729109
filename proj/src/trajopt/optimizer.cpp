#include "leadfollow/trajopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "leadfollow/errors.hpp"
#include "leadfollow/topo/homotopy.hpp"

namespace leadfollow::trajopt {

namespace {

// Keeps the length term twice differentiable at zero-length segments.
constexpr double kLengthSmoothing = 1e-3;
// Accel residuals span three consecutive poses.
constexpr int kBand = 8;

double smoothed_time(const Trajectory& traj, double v_cap) {
  double total = 0.0;
  for (int i = 1; i <= traj.segments(); ++i) {
    const Vec2 d = traj.poses[i].position() - traj.poses[i - 1].position();
    total += std::sqrt(d.squaredNorm() + kLengthSmoothing * kLengthSmoothing);
  }
  return total / v_cap;
}

double total_objective(const Trajectory& traj, const ConstraintSet& cs,
                       const OptimizerConfig& cfg,
                       std::array<double, kFamilyCount>* norms = nullptr) {
  const auto rs = evaluate_residuals(traj, cs, cfg);
  double sum = 0.0;
  for (const auto& r : rs) sum += r.value * r.value;
  if (norms) *norms = family_norms(rs);
  return smoothed_time(traj, cs.v_cap) + sum;
}

void add_block(Eigen::MatrixXd& h, int vi, int vj, const Eigen::Matrix2d& blk) {
  if (vi < 0 || vj < 0) return;
  h.block<2, 2>(vi, vj) += blk;
}

}  // namespace

double cost(const Trajectory& traj, double v_cap) {
  double total = 0.0;
  for (int i = 1; i <= traj.segments(); ++i) {
    total += (traj.poses[i].position() - traj.poses[i - 1].position()).norm();
  }
  return total / v_cap;
}

double objective(const Trajectory& traj, const ConstraintSet& cs,
                 const OptimizerConfig& cfg) {
  return total_objective(traj, cs, cfg);
}

GoalError goal_error(const Trajectory& traj, const GoalConstraint& goal) {
  const Pose& pm = traj.poses.back();
  const Vec2 p = pm.position();
  GoalError e;
  if (const auto* pp = std::get_if<PointPoseGoal>(&goal)) {
    e.position = (p - pp->pose.position()).norm();
    if (pp->constrain_heading) e.heading = std::abs(normalize_angle(pm.theta - pp->pose.theta));
  } else if (const auto* ls = std::get_if<LineSetGoal>(&goal)) {
    e.position = point_segment_distance(p, ls->start, ls->end);
  } else {
    const auto& arc = std::get<ArcSetGoal>(goal);
    e.position = (p - nearest_goal_point(goal, p)).norm();
    const Vec2 to_c = arc.center - p;
    if (to_c.squaredNorm() > 1e-24) {
      e.heading = std::abs(normalize_angle(pm.theta - angle_of(to_c)));
    }
  }
  return e;
}

double min_clearance(const Trajectory& traj, const ConstraintSet& cs) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= traj.segments(); ++i) {
    const Vec2 p = traj.poses[i].position();
    for (const auto& hull : cs.static_groups) best = std::min(best, signed_distance(hull, p));
    for (const auto& ob : cs.dynamic_obstacles) {
      best = std::min(best, (p - ob.at(i * traj.dt)).norm() - ob.radius);
    }
  }
  return best;
}

std::string OptimizerTrace::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["iteration"] = r.iteration;
    j["objective"] = r.objective;
    j["time_cost"] = r.time_cost;
    j["lambda"] = r.lambda;
    j["accepted"] = r.accepted;
    nlohmann::json res;
    for (int f = 0; f < kFamilyCount; ++f) {
      res[to_string(static_cast<Family>(f))] = r.residuals[f];
    }
    j["residuals"] = res;
    out += j.dump();
    out += '\n';
  }
  return out;
}

bool solve_banded_spd(Eigen::MatrixXd& a, Eigen::VectorXd& b, int band) {
  const int n = int(a.rows());
  for (int j = 0; j < n; ++j) {
    const int k0 = std::max(0, j - band);
    double d = a(j, j);
    for (int k = k0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (int i = j + 1; i <= std::min(n - 1, j + band); ++i) {
      double s = a(i, j);
      for (int k = std::max(0, i - band); k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = std::max(0, i - band); k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k <= std::min(n - 1, i + band); ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  return true;
}

Trajectory optimize_unchecked(const Trajectory& seed, const ConstraintSet& cs,
                              const OptimizerConfig& cfg, OptimizerTrace* trace) {
  cs.validate();
  cfg.validate();
  if (seed.segments() < 1) throw DegenerateGeometry("trajectory needs at least two poses");
  Trajectory traj = seed;
  const int m = traj.segments();
  const int n = 3 * m;
  Eigen::VectorXd x = pack(traj);

  std::array<double, kFamilyCount> norms{};
  double current = total_objective(traj, cs, cfg, &norms);
  double lambda = 1e-3;
  if (trace) trace->records.push_back({0, current, cost(traj, cs.v_cap), lambda, true, norms});

  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd g(n);
  for (int it = 1; it <= cfg.iterations; ++it) {
    h.setZero();
    g.setZero();
    for (const auto& r : evaluate_residuals(traj, cs, cfg)) {
      if (r.count == 0) continue;
      for (int a = 0; a < r.count; ++a) {
        g[r.index[a]] += 2.0 * r.value * r.grad[a];
        for (int c = 0; c < r.count; ++c) {
          h(r.index[a], r.index[c]) += 2.0 * r.grad[a] * r.grad[c];
        }
      }
    }
    for (int i = 1; i <= m; ++i) {
      const Vec2 d = traj.poses[i].position() - traj.poses[i - 1].position();
      const double len = std::sqrt(d.squaredNorm() + kLengthSmoothing * kLengthSmoothing);
      const Vec2 gd = d / (len * cs.v_cap);
      const Eigen::Matrix2d hd =
          (Eigen::Matrix2d::Identity() - d * d.transpose() / (len * len)) / (len * cs.v_cap);
      const int vi = 3 * (i - 1);
      const int vp = i > 1 ? 3 * (i - 2) : -1;
      g.segment<2>(vi) += gd;
      add_block(h, vi, vi, hd);
      if (vp >= 0) {
        g.segment<2>(vp) -= gd;
        add_block(h, vp, vp, hd);
        add_block(h, vi, vp, -hd);
        add_block(h, vp, vi, -hd);
      }
    }

    bool accepted = false;
    double next = current;
    Trajectory candidate = traj;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::MatrixXd a = h;
      for (int i = 0; i < n; ++i) a(i, i) += lambda * (h(i, i) + 1e-3);
      Eigen::VectorXd step = -g;
      if (!solve_banded_spd(a, step, kBand) || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      unpack(x + step, candidate);
      next = total_objective(candidate, cs, cfg, &norms);
      if (std::isfinite(next) && next < current) {
        accepted = true;
        x += step;
      } else {
        lambda *= 4.0;
      }
    }
    if (trace) {
      trace->records.push_back(
          {it, accepted ? next : current, cost(accepted ? candidate : traj, cs.v_cap), lambda,
           accepted, norms});
    }
    if (!accepted) break;
    const double decrease = current - next;
    traj = candidate;
    current = next;
    lambda = std::max(lambda / 3.0, 1e-9);
    if (decrease < cfg.tol) break;
  }

  for (auto& p : traj.poses) p.theta = normalize_angle(p.theta);
  traj.cost = cost(traj, cs.v_cap);
  return traj;
}

Trajectory optimize(const Trajectory& seed, const ConstraintSet& cs,
                    const OptimizerConfig& cfg,
                    std::span<const topo::ObstacleGroup> groups, OptimizerTrace* trace) {
  Trajectory traj = optimize_unchecked(seed, cs, cfg, trace);
  const double clearance = min_clearance(traj, cs);
  if (clearance < -1e-6) {
    throw Infeasible("pose inside an obstacle (clearance " + std::to_string(clearance) + " m)");
  }
  const GoalError ge = goal_error(traj, cs.goal);
  double eps = cfg.epsilon;
  if (const auto* pp = std::get_if<PointPoseGoal>(&cs.goal)) eps = pp->epsilon;
  if (const auto* arc = std::get_if<ArcSetGoal>(&cs.goal)) eps = arc->epsilon;
  if (ge.position > 3.0 * eps || ge.heading > 3.0 * eps) {
    throw Infeasible("goal error " + std::to_string(ge.position) + " m / " +
                     std::to_string(ge.heading) + " rad exceeds 3 epsilon");
  }
  if (!groups.empty()) traj.signature = topo::signature(traj, groups);
  return traj;
}

}  // namespace leadfollow::trajopt
