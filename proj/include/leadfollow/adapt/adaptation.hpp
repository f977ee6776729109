#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leadfollow/goal.hpp"
#include "leadfollow/perception/buffers.hpp"
#include "leadfollow/perception/kalman.hpp"
#include "leadfollow/topo/costmap.hpp"

namespace leadfollow::adapt {

enum class FollowState { Chasing, Following, Planning, Retreating, Switching };

const char* to_string(FollowState s);
FollowState follow_state_from_string(const std::string& s);

struct AdaptationParams {
  double alpha_goal_line = 0.5;  // goal-line length per meter beyond the map edge
  double alpha_nis = 0.3;        // meters per NIS unit
  double d_min = 1.0;
  double d_max = 3.0;
  double alpha_1 = 1.0;          // speed cap gain on leader speed
  double alpha_2 = 0.3;          // speed cap gain on distance, 1/s
  double epsilon = 0.2;
  double retreat_trigger_speed = 0.3;
  double hysteresis_time = 0.3;
  /// Goal sets keep this clearance from every hull.
  double goal_margin = 0.1;
  /// Arcs narrower than this (radians) are discarded.
  double min_arc = 0.2;

  void validate() const;
};

struct TickDecision {
  FollowState state = FollowState::Planning;
  std::vector<GoalConstraint> goals;
  double v_cap = 0.0;
  double safe_distance = 1.0;
};

struct TransitionFlags {
  bool in_fov = false;
  bool identified = false;
  bool in_costmap = false;
  double distance = 0.0;
  bool leader_approaching = false;
  bool new_leader_command = false;

  bool operator==(const TransitionFlags&) const = default;
};

/// Undebounced transition table. Total over all flag combinations.
FollowState transition(FollowState prev, const TransitionFlags& flags);

struct TransitionEvent {
  double time = 0.0;
  FollowState from = FollowState::Planning;
  FollowState to = FollowState::Planning;
  TransitionFlags flags;

  bool operator==(const TransitionEvent&) const = default;
};

/// Applies the transition table with a dwell time: a state must be held for
/// hysteresis_time before it can be left. A new-leader command passes
/// through Switching and immediately re-evaluates.
class StateMachine {
 public:
  explicit StateMachine(AdaptationParams params = {},
                        FollowState initial = FollowState::Planning);

  FollowState state() const { return state_; }
  /// Advances to time and returns the active state; appends to events.
  FollowState step(const TransitionFlags& flags, double time,
                   std::vector<TransitionEvent>* events = nullptr);

 private:
  AdaptationParams params_;
  FollowState state_;
  double entered_at_;
};

/// Component of the leader velocity toward the robot exceeds the trigger
/// speed while the leader is closer than 1.5 safe distances.
bool leader_approaching(const Vec2& leader_velocity, const Vec2& leader,
                        const Vec2& robot, double safe_distance,
                        const AdaptationParams& params);

/// D_t = clamp(alpha_nis * nis, d_min, d_max).
double safe_distance(double nis, const AdaptationParams& params);

/// L_t = alpha * (|p_r - p_l| - W_map / 2), floored at zero.
double goal_line_length(const Vec2& robot, const Vec2& leader, double map_width,
                        double alpha);

/// Goal line on the map edge where robot->leader exits, split into free
/// sub-segments. Throws LeaderInsideMap if the leader is inside the map.
std::vector<LineSetGoal> chasing_goal(const Vec2& robot, const Vec2& leader,
                                      const topo::Costmap& map,
                                      std::span<const topo::ObstacleGroup> groups,
                                      const AdaptationParams& params);

/// Free arcs of the circle of radius D_t around the leader, each facing the
/// leader within epsilon. Throws NoFreeArc if nothing is free.
std::vector<ArcSetGoal> following_goal(const Vec2& leader, double safe_dist,
                                       std::span<const topo::ObstacleGroup> groups,
                                       const AdaptationParams& params,
                                       const std::optional<Vec2>& robot = std::nullopt);

/// V_t = clamp(alpha_1 |v_l| + alpha_2 |p_l - p_r|, 0, v_max_physical).
double speed_cap(const Vec2& leader_velocity, const Vec2& leader, const Vec2& robot,
                 const AdaptationParams& params, double v_max_physical);

/// Last seen pose with tolerance epsilon. Throws NeverSeen.
PointPoseGoal planning_goal(const perception::LeaderTrack& track,
                            const AdaptationParams& params);

/// The free arc closest to the robot. Throws NoFreeArc.
ArcSetGoal retreating_goal(const Vec2& leader, double safe_dist,
                           std::span<const topo::ObstacleGroup> groups,
                           const Vec2& robot, const AdaptationParams& params);

struct SwitchResult {
  perception::TemporalBuffer temporal;
  perception::DistanceFrameBuffer distance;
  FollowState next = FollowState::Planning;
};

/// Empties both buffers, seeds them with the new leader's first embedding
/// and re-runs the transition table on the current flags.
SwitchResult switching_reset(const perception::TemporalBuffer& temporal,
                             const perception::DistanceFrameBuffer& distance,
                             const perception::Embedding& first,
                             TransitionFlags flags);

/// Clearance of p from the nearest hull (infinite without hulls).
double hull_clearance(std::span<const topo::ObstacleGroup> groups, const Vec2& p);

}  // namespace leadfollow::adapt
