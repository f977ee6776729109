#pragma once

#include <variant>

#include "leadfollow/geometry.hpp"

namespace leadfollow {

/// Reach a pose: |p_m - position| <= epsilon and, if constrained,
/// |theta_m - heading| <= epsilon.
struct PointPoseGoal {
  Pose pose;
  double epsilon = 0.2;
  bool constrain_heading = true;
};

/// Endpoint may slide anywhere on the segment [start, end].
struct LineSetGoal {
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();
};

/// Endpoint may slide on the arc of the circle (center, radius) that starts
/// at start_angle and runs counterclockwise for span radians, while facing
/// the center within epsilon.
struct ArcSetGoal {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double start_angle = 0.0;
  double span = 2.0 * kPi;
  double epsilon = 0.2;

  Vec2 point_at(double angle) const {
    return center + radius * Vec2(std::cos(angle), std::sin(angle));
  }
  Vec2 first_point() const { return point_at(start_angle); }
  Vec2 last_point() const { return point_at(start_angle + span); }
  bool full_circle() const { return span >= 2.0 * kPi - 1e-9; }
  /// Whether the polar angle of p (about center) lies inside the arc.
  bool contains_angle(double angle) const;
  /// Arc angle closest to the polar angle of p.
  double clamp_angle(double angle) const;
};

using GoalConstraint = std::variant<PointPoseGoal, LineSetGoal, ArcSetGoal>;

const char* goal_kind(const GoalConstraint& g);

/// Point of the goal set nearest to p.
Vec2 nearest_goal_point(const GoalConstraint& g, const Vec2& p);

/// Terminal heading for a trajectory ending at endpoint, arriving along
/// approach (unit direction of travel).
double goal_heading(const GoalConstraint& g, const Vec2& endpoint,
                    const Vec2& approach);

}  // namespace leadfollow
