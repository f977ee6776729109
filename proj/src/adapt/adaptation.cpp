#include "leadfollow/adapt/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "leadfollow/errors.hpp"

namespace leadfollow::adapt {

const char* to_string(FollowState s) {
  switch (s) {
    case FollowState::Chasing: return "chasing";
    case FollowState::Following: return "following";
    case FollowState::Planning: return "planning";
    case FollowState::Retreating: return "retreating";
    case FollowState::Switching: return "switching";
  }
  return "unknown";
}

FollowState follow_state_from_string(const std::string& s) {
  for (auto st : {FollowState::Chasing, FollowState::Following, FollowState::Planning,
                  FollowState::Retreating, FollowState::Switching}) {
    if (s == to_string(st)) return st;
  }
  throw ConfigError("unknown follow state '" + s + "'");
}

void AdaptationParams::validate() const {
  if (!(d_min > 0.0 && d_min < d_max)) throw ConfigError("need 0 < d_min < d_max");
  if (!(alpha_goal_line > 0 && alpha_nis > 0 && alpha_1 > 0 && alpha_2 > 0)) {
    throw ConfigError("adaptation gains must be positive");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (hysteresis_time < 0.0) throw ConfigError("hysteresis_time must be non-negative");
  if (!(goal_margin >= 0.0)) throw ConfigError("goal_margin must be non-negative");
}

FollowState transition(FollowState /*prev*/, const TransitionFlags& f) {
  if (f.new_leader_command) return FollowState::Switching;
  if (!(f.in_fov && f.identified)) return FollowState::Planning;
  if (!f.in_costmap) return FollowState::Chasing;
  if (f.leader_approaching) return FollowState::Retreating;
  return FollowState::Following;
}

StateMachine::StateMachine(AdaptationParams params, FollowState initial)
    : params_(params), state_(initial), entered_at_(-std::numeric_limits<double>::infinity()) {}

FollowState StateMachine::step(const TransitionFlags& flags, double time,
                               std::vector<TransitionEvent>* events) {
  auto move = [&](FollowState to, const TransitionFlags& why) {
    if (events) events->push_back({time, state_, to, why});
    state_ = to;
    entered_at_ = time;
  };
  FollowState proposed = transition(state_, flags);
  if (proposed == FollowState::Switching) {
    move(FollowState::Switching, flags);
    TransitionFlags after = flags;
    after.new_leader_command = false;
    move(transition(FollowState::Switching, after), after);
    return state_;
  }
  if (proposed != state_ && time - entered_at_ >= params_.hysteresis_time - 1e-9) {
    move(proposed, flags);
  }
  return state_;
}

bool leader_approaching(const Vec2& leader_velocity, const Vec2& leader,
                        const Vec2& robot, double safe_dist,
                        const AdaptationParams& params) {
  const Vec2 d = robot - leader;
  const double dist = d.norm();
  if (dist < 1e-12) return true;
  return leader_velocity.dot(d / dist) > params.retreat_trigger_speed &&
         dist < 1.5 * safe_dist;
}

double safe_distance(double nis, const AdaptationParams& params) {
  return std::clamp(params.alpha_nis * std::max(0.0, nis), params.d_min, params.d_max);
}

double goal_line_length(const Vec2& robot, const Vec2& leader, double map_width,
                        double alpha) {
  return std::max(0.0, alpha * ((robot - leader).norm() - 0.5 * map_width));
}

double hull_clearance(std::span<const topo::ObstacleGroup> groups, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : groups) best = std::min(best, signed_distance(g.boundary, p));
  return best;
}

namespace {

// Boundary between a free parameter a and a blocked parameter b.
template <typename Blocked>
double refine(double free_at, double blocked_at, Blocked&& blocked) {
  for (int k = 0; k < 30; ++k) {
    const double mid = 0.5 * (free_at + blocked_at);
    if (blocked(mid)) {
      blocked_at = mid;
    } else {
      free_at = mid;
    }
  }
  return free_at;
}

}  // namespace

std::vector<LineSetGoal> chasing_goal(const Vec2& robot, const Vec2& leader,
                                      const topo::Costmap& map,
                                      std::span<const topo::ObstacleGroup> groups,
                                      const AdaptationParams& params) {
  if (map.contains(leader)) throw LeaderInsideMap("leader lies inside the costmap");
  const double x0 = map.x_min(), x1 = map.x_min() + map.width();
  const double y1 = map.y_max(), y0 = map.y_max() - map.width();
  const Vec2 d = leader - robot;

  // Exit parameter of robot + t d through the square.
  double t_exit = 1.0;
  bool vertical_side = true;  // side x = const
  if (d.x() > 0) t_exit = (x1 - robot.x()) / d.x();
  if (d.x() < 0) t_exit = (x0 - robot.x()) / d.x();
  if (d.x() == 0) t_exit = std::numeric_limits<double>::infinity();
  double ty = std::numeric_limits<double>::infinity();
  if (d.y() > 0) ty = (y1 - robot.y()) / d.y();
  if (d.y() < 0) ty = (y0 - robot.y()) / d.y();
  if (ty < t_exit) {
    t_exit = ty;
    vertical_side = false;
  }
  t_exit = std::clamp(t_exit, 0.0, 1.0);
  const Vec2 base = robot + t_exit * d;

  const double length = std::max(goal_line_length(robot, leader, map.width(),
                                                  params.alpha_goal_line),
                                 map.resolution());
  Vec2 a, b;
  if (vertical_side) {
    const double lo = std::max(y0, base.y() - 0.5 * length);
    const double hi = std::min(y1, base.y() + 0.5 * length);
    a = Vec2(base.x(), lo);
    b = Vec2(base.x(), hi);
  } else {
    const double lo = std::max(x0, base.x() - 0.5 * length);
    const double hi = std::min(x1, base.x() + 0.5 * length);
    a = Vec2(lo, base.y());
    b = Vec2(hi, base.y());
  }

  const double total = (b - a).norm();
  auto point = [&](double s) { return a + (total > 0 ? s / total : 0.0) * (b - a); };
  auto blocked = [&](double s) { return hull_clearance(groups, point(s)) < params.goal_margin; };

  std::vector<LineSetGoal> out;
  const double step = 0.25 * map.resolution();
  const int n = std::max(1, int(std::ceil(total / step)));
  double start = 0.0;
  bool open = false;
  double prev_s = 0.0;
  bool prev_blocked = true;
  const double min_len = 0.5 * map.resolution();
  for (int k = 0; k <= n; ++k) {
    const double s = total * k / n;
    const bool bl = blocked(s);
    if (!bl && prev_blocked) {
      start = k == 0 ? 0.0 : refine(s, prev_s, blocked);
      open = true;
    }
    if (bl && !prev_blocked && open) {
      const double end = refine(prev_s, s, blocked);
      if (end - start >= min_len) out.push_back({point(start), point(end)});
      open = false;
    }
    prev_blocked = bl;
    prev_s = s;
  }
  if (open && total - start >= min_len) out.push_back({point(start), point(total)});
  return out;
}

std::vector<ArcSetGoal> following_goal(const Vec2& leader, double safe_dist,
                                       std::span<const topo::ObstacleGroup> groups,
                                       const AdaptationParams& params,
                                       const std::optional<Vec2>& robot) {
  const double phi0 =
      robot && (*robot - leader).norm() > 1e-12 ? angle_of(*robot - leader) : 0.0;
  auto point = [&](double ang) {
    return Vec2(leader + safe_dist * Vec2(std::cos(ang), std::sin(ang)));
  };
  auto blocked = [&](double ang) {
    return hull_clearance(groups, point(ang)) < params.goal_margin;
  };
  auto make_arc = [&](double start, double span) {
    ArcSetGoal arc;
    arc.center = leader;
    arc.radius = safe_dist;
    arc.start_angle = normalize_angle(start);
    arc.span = span;
    arc.epsilon = params.epsilon;
    return arc;
  };

  constexpr int kSamples = 360;
  const double step = 2.0 * kPi / kSamples;
  // Start the sweep opposite the robot so the robot-side arc is rarely cut.
  const double base = phi0 + kPi;
  std::vector<char> bl(kSamples);
  int blocked_count = 0;
  for (int k = 0; k < kSamples; ++k) {
    bl[k] = blocked(base + k * step) ? 1 : 0;
    blocked_count += bl[k];
  }
  if (blocked_count == 0) return {make_arc(phi0 - kPi, 2.0 * kPi)};
  if (blocked_count == kSamples) throw NoFreeArc("circle around the leader is fully blocked");

  // Rotate so that the walk starts on a blocked sample.
  int first_blocked = 0;
  while (!bl[first_blocked]) ++first_blocked;
  std::vector<ArcSetGoal> out;
  for (int k = 1; k <= kSamples; ++k) {
    const int idx = (first_blocked + k) % kSamples;
    if (bl[idx]) continue;
    const int start_idx = idx;
    int len = 0;
    while (!bl[(start_idx + len) % kSamples]) ++len;
    const double a_free = base + (first_blocked + k) * step;
    const double start = refine(a_free, a_free - step, blocked);
    const double b_free = a_free + (len - 1) * step;
    const double end = refine(b_free, b_free + step, blocked);
    if (end - start >= params.min_arc) out.push_back(make_arc(start, end - start));
    k += len - 1;
  }
  if (out.empty()) throw NoFreeArc("no free arc wider than the minimum");
  return out;
}

double speed_cap(const Vec2& leader_velocity, const Vec2& leader, const Vec2& robot,
                 const AdaptationParams& params, double v_max_physical) {
  const double raw =
      params.alpha_1 * leader_velocity.norm() + params.alpha_2 * (leader - robot).norm();
  return std::clamp(raw, 0.0, v_max_physical);
}

PointPoseGoal planning_goal(const perception::LeaderTrack& track,
                            const AdaptationParams& params) {
  if (!track.last_seen_pose) throw NeverSeen("leader was never identified");
  return PointPoseGoal{*track.last_seen_pose, params.epsilon, true};
}

ArcSetGoal retreating_goal(const Vec2& leader, double safe_dist,
                           std::span<const topo::ObstacleGroup> groups,
                           const Vec2& robot, const AdaptationParams& params) {
  const auto arcs = following_goal(leader, safe_dist, groups, params, robot);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const GoalConstraint g = arcs[k];
    const double d = (nearest_goal_point(g, robot) - robot).norm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return arcs[best];
}

SwitchResult switching_reset(const perception::TemporalBuffer& temporal,
                             const perception::DistanceFrameBuffer& distance,
                             const perception::Embedding& first,
                             TransitionFlags flags) {
  SwitchResult r{perception::TemporalBuffer(temporal.capacity()),
                 perception::DistanceFrameBuffer(distance.bin_width(), distance.bin_count()),
                 FollowState::Planning};
  r.temporal.insert(first);
  r.distance.insert(first);
  flags.new_leader_command = false;
  r.next = transition(FollowState::Switching, flags);
  return r;
}

}  // namespace leadfollow::adapt
