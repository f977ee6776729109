#include "leadfollow/goal.hpp"

namespace leadfollow {

bool ArcSetGoal::contains_angle(double angle) const {
  if (full_circle()) return true;
  double rel = angle - start_angle;
  rel = std::fmod(rel, 2.0 * kPi);
  if (rel < 0) rel += 2.0 * kPi;
  return rel <= span + 1e-12;
}

double ArcSetGoal::clamp_angle(double angle) const {
  if (contains_angle(angle)) return angle;
  const double to_start = std::abs(normalize_angle(angle - start_angle));
  const double to_end = std::abs(normalize_angle(angle - (start_angle + span)));
  return to_start <= to_end ? start_angle : start_angle + span;
}

const char* goal_kind(const GoalConstraint& g) {
  if (std::holds_alternative<PointPoseGoal>(g)) return "point_pose";
  if (std::holds_alternative<LineSetGoal>(g)) return "line_set";
  return "arc_set";
}

Vec2 nearest_goal_point(const GoalConstraint& g, const Vec2& p) {
  if (const auto* pp = std::get_if<PointPoseGoal>(&g)) {
    return pp->pose.position();
  }
  if (const auto* ls = std::get_if<LineSetGoal>(&g)) {
    return closest_point_on_segment(p, ls->start, ls->end);
  }
  const auto& arc = std::get<ArcSetGoal>(g);
  const Vec2 d = p - arc.center;
  const double a = d.squaredNorm() > 0 ? angle_of(d) : arc.start_angle;
  return arc.point_at(arc.clamp_angle(a));
}

double goal_heading(const GoalConstraint& g, const Vec2& endpoint,
                    const Vec2& approach) {
  const double travel =
      approach.squaredNorm() > 0 ? angle_of(approach) : 0.0;
  if (const auto* pp = std::get_if<PointPoseGoal>(&g)) {
    return pp->constrain_heading ? pp->pose.theta : travel;
  }
  if (const auto* arc = std::get_if<ArcSetGoal>(&g)) {
    const Vec2 d = arc->center - endpoint;
    return d.squaredNorm() > 0 ? angle_of(d) : travel;
  }
  return travel;
}

}  // namespace leadfollow
