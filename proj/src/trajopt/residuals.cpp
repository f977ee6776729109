#include "leadfollow/trajopt/residuals.hpp"

#include <cmath>

#include "leadfollow/errors.hpp"

namespace leadfollow::trajopt {

void ConstraintSet::validate() const {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(v_cap > 0.0)) throw ConfigError("v_cap must be positive");
  if (v_cap > v_max_physical * (1.0 + 1e-9)) {
    throw ConfigError("v_cap exceeds the physical speed limit");
  }
  if (!(a_max > 0.0)) throw ConfigError("a_max must be positive");
  if (const auto* ls = std::get_if<LineSetGoal>(&goal)) {
    if ((ls->end - ls->start).norm() <= 1e-12) throw ConfigError("line set endpoints coincide");
  }
  if (const auto* arc = std::get_if<ArcSetGoal>(&goal)) {
    if (!(arc->radius > 0.0)) throw ConfigError("arc set radius must be positive");
  }
}

void OptimizerConfig::validate() const {
  const Weights& w = weights;
  if (!(w.obstacle > 0 && w.dynamic > 0 && w.kinematic > 0 && w.accel > 0 && w.goal > 0 &&
        w.velocity > 0)) {
    throw ConfigError("optimizer weights must be positive");
  }
  if (iterations <= 0) throw ConfigError("iterations must be positive");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

const char* to_string(Family f) {
  switch (f) {
    case Family::Obstacle: return "obstacle";
    case Family::Dynamic: return "dynamic";
    case Family::Kinematic: return "kinematic";
    case Family::Velocity: return "velocity";
    case Family::Accel: return "accel";
    case Family::Goal: return "goal";
  }
  return "unknown";
}

Eigen::VectorXd pack(const Trajectory& traj) {
  const int m = traj.segments();
  Eigen::VectorXd x(3 * m);
  for (int i = 1; i <= m; ++i) {
    x[3 * (i - 1)] = traj.poses[i].x;
    x[3 * (i - 1) + 1] = traj.poses[i].y;
    x[3 * (i - 1) + 2] = traj.poses[i].theta;
  }
  return x;
}

void unpack(const Eigen::VectorXd& x, Trajectory& traj) {
  const int m = traj.segments();
  for (int i = 1; i <= m; ++i) {
    traj.poses[i].x = x[3 * (i - 1)];
    traj.poses[i].y = x[3 * (i - 1) + 1];
    traj.poses[i].theta = x[3 * (i - 1) + 2];
  }
}

namespace {

// Variable offset of pose i, or -1 for the fixed start pose.
inline int var(int i) { return i == 0 ? -1 : 3 * (i - 1); }

struct Builder {
  std::vector<Residual>& out;
  Residual cur;

  void begin(Family f) {
    cur = Residual{};
    cur.family = f;
  }
  void grad_xy(int pose, const Vec2& g) {
    const int v = var(pose);
    if (v < 0) return;
    cur.add(v, g.x());
    cur.add(v + 1, g.y());
  }
  void grad_theta(int pose, double g) {
    const int v = var(pose);
    if (v < 0) return;
    cur.add(v + 2, g);
  }
  void end(double value) {
    cur.value = value;
    out.push_back(cur);
  }
  void zero(Family f) {
    begin(f);
    end(0.0);
  }
};

void static_residuals(const Trajectory& traj, const ConstraintSet& cs, double s,
                      Builder& b) {
  const int m = traj.segments();
  std::vector<BoundingCircle> circles;
  circles.reserve(cs.static_groups.size());
  for (const auto& h : cs.static_groups) circles.push_back(bounding_circle(h));
  auto point = [&](const Vec2& p, int pose_a, int pose_b, double share) {
    for (std::size_t k = 0; k < cs.static_groups.size(); ++k) {
      b.begin(Family::Obstacle);
      if ((p - circles[k].center).norm() - circles[k].radius >= cs.margin) {
        b.end(0.0);
        continue;
      }
      Vec2 g;
      const double sd = signed_distance(cs.static_groups[k], p, &g);
      const double h = cs.margin - sd;
      if (h <= 0.0) {
        b.end(0.0);
        continue;
      }
      b.grad_xy(pose_a, -s * share * g);
      if (pose_b >= 0) b.grad_xy(pose_b, -s * share * g);
      b.end(s * h);
    }
  };
  for (int i = 1; i <= m; ++i) point(traj.poses[i].position(), i, -1, 1.0);
  for (int i = 1; i <= m; ++i) {
    const Vec2 mid = 0.5 * (traj.poses[i - 1].position() + traj.poses[i].position());
    point(mid, i, i - 1, 0.5);
  }
}

void dynamic_residuals(const Trajectory& traj, const ConstraintSet& cs, double s,
                       Builder& b) {
  const int m = traj.segments();
  for (int i = 1; i <= m; ++i) {
    const Vec2 p = traj.poses[i].position();
    for (const auto& ob : cs.dynamic_obstacles) {
      b.begin(Family::Dynamic);
      const Vec2 d = p - ob.at(i * traj.dt);
      const double dist = d.norm();
      const double h = ob.radius + cs.margin - dist;
      if (h <= 0.0 || dist < 1e-12) {
        b.end(h > 0.0 ? s * h : 0.0);
        continue;
      }
      b.grad_xy(i, -s * d / dist);
      b.end(s * h);
    }
  }
}

void kinematic_residuals(const Trajectory& traj, double s, Builder& b) {
  const int m = traj.segments();
  for (int i = 0; i < m; ++i) {
    const Pose& a = traj.poses[i];
    const Pose& c = traj.poses[i + 1];
    const Vec2 d = c.position() - a.position();
    const double ca = std::cos(a.theta), sa = std::sin(a.theta);
    const double cc = std::cos(c.theta), sc = std::sin(c.theta);
    const double cs_ = ca + cc, sn = sa + sc;
    b.begin(Family::Kinematic);
    b.grad_xy(i + 1, s * Vec2(-sn, cs_));
    b.grad_xy(i, s * Vec2(sn, -cs_));
    b.grad_theta(i, s * (-sa * d.y() - ca * d.x()));
    b.grad_theta(i + 1, s * (-sc * d.y() - cc * d.x()));
    b.end(s * (cs_ * d.y() - sn * d.x()));
  }
}

void velocity_residuals(const Trajectory& traj, const ConstraintSet& cs,
                        const OptimizerConfig& cfg, double s, Builder& b) {
  const int m = traj.segments();
  const double limit = cfg.velocity_buffer * cs.v_cap;
  for (int i = 0; i < m; ++i) {
    const Vec2 d = traj.poses[i + 1].position() - traj.poses[i].position();
    const double len = d.norm();
    const double h = len / traj.dt - limit;
    b.begin(Family::Velocity);
    if (h <= 0.0 || len < 1e-12) {
      b.end(0.0);
      continue;
    }
    const Vec2 g = s * d / (len * traj.dt);
    b.grad_xy(i + 1, g);
    b.grad_xy(i, -g);
    b.end(s * h);
  }
}

void accel_residuals(const Trajectory& traj, const ConstraintSet& cs, double s,
                     Builder& b) {
  const int m = traj.segments();
  const double dt = traj.dt;
  std::vector<Vec2> dir(m);
  std::vector<double> speed(m);
  for (int i = 0; i < m; ++i) {
    const Vec2 d = traj.poses[i + 1].position() - traj.poses[i].position();
    const double len = d.norm();
    speed[i] = len / dt;
    dir[i] = len > 1e-12 ? Vec2(d / len) : Vec2::Zero();
  }
  for (int i = 0; i < m; ++i) {
    const double prev = i == 0 ? cs.initial_speed : speed[i - 1];
    const double a = (speed[i] - prev) / dt;
    const double h = std::abs(a) - cs.a_max;
    b.begin(Family::Accel);
    if (h <= 0.0) {
      b.end(0.0);
      continue;
    }
    const double k = s * (a > 0 ? 1.0 : -1.0) / (dt * dt);
    // d speed_i / d p_{i+1} = dir_i, d speed_i / d p_i = -dir_i (times 1/dt).
    if (i == 0) {
      b.grad_xy(1, k * dir[0]);
    } else {
      b.grad_xy(i + 1, k * dir[i]);
      b.grad_xy(i, -k * dir[i] - k * dir[i - 1]);
      b.grad_xy(i - 1, k * dir[i - 1]);
    }
    b.end(s * h);
  }
}

void goal_residuals(const Trajectory& traj, const ConstraintSet& cs,
                    const OptimizerConfig& cfg, double s, Builder& b) {
  const int m = traj.segments();
  const Pose& pm = traj.poses[m];
  const Vec2 p = pm.position();

  if (const auto* pp = std::get_if<PointPoseGoal>(&cs.goal)) {
    const Vec2 d = p - pp->pose.position();
    const double dist = d.norm();
    b.begin(Family::Goal);
    if (dist - pp->epsilon > 0.0) {
      b.grad_xy(m, s * d / dist);
      b.end(s * (dist - pp->epsilon));
    } else {
      b.end(0.0);
    }
    b.begin(Family::Goal);
    const double e = normalize_angle(pm.theta - pp->pose.theta);
    if (pp->constrain_heading && std::abs(e) - pp->epsilon > 0.0) {
      b.grad_theta(m, s * (e > 0 ? 1.0 : -1.0));
      b.end(s * (std::abs(e) - pp->epsilon));
    } else {
      b.end(0.0);
    }
    return;
  }

  if (const auto* ls = std::get_if<LineSetGoal>(&cs.goal)) {
    const Vec2 u = ls->end - ls->start;
    const double len = u.norm();
    const Vec2 w = p - ls->start;
    b.begin(Family::Goal);
    b.grad_xy(m, s * Vec2(-u.y(), u.x()) / len);
    b.end(s * cross(u, w) / len);
    const double proj = u.dot(w) / len;
    b.begin(Family::Goal);
    if (proj < 0.0) {
      b.grad_xy(m, -s * u / len);
      b.end(-s * proj);
    } else if (proj > len) {
      b.grad_xy(m, s * u / len);
      b.end(s * (proj - len));
    } else {
      b.end(0.0);
    }
    return;
  }

  const auto& arc = std::get<ArcSetGoal>(cs.goal);
  const Vec2 q = p - arc.center;
  const double r = q.norm();
  b.begin(Family::Goal);
  if (r > 1e-12) b.grad_xy(m, s * q / r);
  b.end(s * (r - arc.radius));

  // Angular membership: q must lie counterclockwise of a and clockwise of b.
  const Vec2 a(std::cos(arc.start_angle), std::sin(arc.start_angle));
  const Vec2 e(std::cos(arc.start_angle + arc.span), std::sin(arc.start_angle + arc.span));
  const double h1 = std::max(0.0, -cross(a, q));
  const double h2 = std::max(0.0, -cross(q, e));
  const Vec2 g1 = -Vec2(-a.y(), a.x());
  const Vec2 g2 = -Vec2(e.y(), -e.x());
  if (arc.full_circle()) {
    b.zero(Family::Goal);
    b.zero(Family::Goal);
  } else if (arc.span <= kPi) {
    b.begin(Family::Goal);
    if (h1 > 0) b.grad_xy(m, s * g1);
    b.end(s * h1);
    b.begin(Family::Goal);
    if (h2 > 0) b.grad_xy(m, s * g2);
    b.end(s * h2);
  } else {
    b.begin(Family::Goal);
    if (h1 > 0 && h2 > 0) {
      if (h1 <= h2) {
        b.grad_xy(m, s * g1);
        b.end(s * h1);
      } else {
        b.grad_xy(m, s * g2);
        b.end(s * h2);
      }
    } else {
      b.end(0.0);
    }
    b.zero(Family::Goal);
  }

  // Facing the center.
  const Vec2 to_c = arc.center - p;
  const double r2 = to_c.squaredNorm();
  const double facing = r2 > 1e-24 ? angle_of(to_c) : pm.theta;
  const double err = normalize_angle(pm.theta - facing);
  const double eps = arc.epsilon > 0 ? arc.epsilon : cfg.epsilon;
  b.begin(Family::Goal);
  if (std::abs(err) - eps > 0.0 && r2 > 1e-24) {
    const double sg = err > 0 ? 1.0 : -1.0;
    b.grad_theta(m, s * sg);
    // d facing / d p = (to_c.y, -to_c.x) / |to_c|^2
    b.grad_xy(m, -s * sg * Vec2(to_c.y(), -to_c.x()) / r2);
    b.end(s * (std::abs(err) - eps));
  } else {
    b.end(0.0);
  }
}

}  // namespace

std::vector<Residual> evaluate_residuals(const Trajectory& traj,
                                         const ConstraintSet& cs,
                                         const OptimizerConfig& cfg) {
  std::vector<Residual> out;
  const int m = traj.segments();
  out.reserve(static_cast<std::size_t>(m) *
                  (2 * cs.static_groups.size() + cs.dynamic_obstacles.size() + 3) +
              4);
  Builder b{out, {}};
  const Weights& w = cfg.weights;
  static_residuals(traj, cs, std::sqrt(w.obstacle), b);
  dynamic_residuals(traj, cs, std::sqrt(w.dynamic), b);
  kinematic_residuals(traj, std::sqrt(w.kinematic), b);
  velocity_residuals(traj, cs, cfg, std::sqrt(w.velocity), b);
  accel_residuals(traj, cs, std::sqrt(w.accel), b);
  goal_residuals(traj, cs, cfg, std::sqrt(w.goal), b);
  return out;
}

Eigen::VectorXd residual_vector(const Trajectory& traj, const ConstraintSet& cs,
                                const OptimizerConfig& cfg) {
  const auto rs = evaluate_residuals(traj, cs, cfg);
  Eigen::VectorXd r(rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) r[k] = rs[k].value;
  return r;
}

Eigen::MatrixXd residual_jacobian(const Trajectory& traj, const ConstraintSet& cs,
                                  const OptimizerConfig& cfg) {
  const auto rs = evaluate_residuals(traj, cs, cfg);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rs.size(), 3 * traj.segments());
  for (std::size_t k = 0; k < rs.size(); ++k) {
    for (int j = 0; j < rs[k].count; ++j) jac(k, rs[k].index[j]) += rs[k].grad[j];
  }
  return jac;
}

std::array<double, kFamilyCount> family_norms(const std::vector<Residual>& rs) {
  std::array<double, kFamilyCount> out{};
  for (const auto& r : rs) out[static_cast<int>(r.family)] += r.value * r.value;
  return out;
}

}  // namespace leadfollow::trajopt
