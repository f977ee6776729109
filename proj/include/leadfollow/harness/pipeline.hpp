#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "leadfollow/adapt/adaptation.hpp"
#include "leadfollow/harness/scenario.hpp"
#include "leadfollow/perception/buffers.hpp"
#include "leadfollow/perception/embedding.hpp"
#include "leadfollow/perception/kalman.hpp"
#include "leadfollow/sim/world.hpp"
#include "leadfollow/trajectory.hpp"

namespace leadfollow::harness {

/// Planner state captured for rendering.
struct PlannerSnapshot {
  double time = 0.0;
  std::vector<Polygon> hulls;
  /// Sampled outline of each goal set (a single point for pose goals).
  std::vector<std::vector<Vec2>> goal_shapes;
  /// Seed polylines that survived signature deduplication.
  std::vector<std::vector<Vec2>> candidates;
  /// Optimized trajectory that was executed (empty if none).
  std::vector<Vec2> selected;

  bool operator==(const PlannerSnapshot&) const = default;
};

struct TickOutput {
  adapt::FollowState state = adapt::FollowState::Planning;
  HomotopySignature signature;
  double safe_distance = 0.0;
  double v_cap = 0.0;
  bool visible = false;
  bool identified = false;
  double score = 0.0;
  /// Unicycle command held for the whole tick.
  double v = 0.0;
  double omega = 0.0;
  std::optional<PlannerSnapshot> snapshot;
};

/// Perception, adaptation and planning for one follower. One instance per
/// episode; the variant only changes which code paths run.
class FollowerStack {
 public:
  FollowerStack(const ScenarioConfig& cfg, Variant variant, std::uint64_t seed,
                const std::vector<sim::LeaderScript>& leaders);

  /// Assigns a new target leader and seeds the buffers with its prompt. The
  /// next tick passes through Switching.
  void command_switch(const sim::World& world, std::size_t leader, const Pose& robot,
                      double time);

  /// Runs one control tick at world.time; speed is the current forward speed.
  TickOutput tick(const sim::World& world, const Pose& robot, double speed,
                  bool want_snapshot);

  std::size_t target() const { return target_; }
  const std::vector<adapt::TransitionEvent>& events() const { return events_; }
  const perception::TemporalBuffer& temporal_buffer() const { return tb_; }
  const perception::DistanceFrameBuffer& distance_buffer() const { return dfb_; }

 private:
  struct Plan {
    Trajectory traj;
    double created = 0.0;
  };

  bool uses_dfb() const { return variant_ == Variant::Full || variant_ == Variant::NoGraph; }
  void plan_full(const Pose& robot, double speed, const std::vector<topo::ObstacleGroup>& groups,
                 const std::vector<GoalConstraint>& goals, trajopt::ConstraintSet cs,
                 double time, PlannerSnapshot* snap, TickOutput& out);
  void plan_straight(const Pose& robot, double speed, const GoalConstraint& goal,
                     trajopt::ConstraintSet cs, double time);
  void pursuit_command(const Pose& robot, bool identified, const Vec2& leader, double safe_dist,
                       TickOutput& out) const;

  const ScenarioConfig& cfg_;
  Variant variant_;
  std::mt19937_64 rng_;
  std::vector<perception::AppearanceModel> appearance_;
  std::size_t target_ = 0;

  perception::TemporalBuffer tb_;
  perception::DistanceFrameBuffer dfb_;
  perception::LeaderTrack track_;
  std::optional<perception::Embedding> last_embedding_;
  bool tracking_ = false;
  std::vector<sim::TimedObservation> history_;

  adapt::StateMachine machine_;
  bool pending_switch_ = false;
  std::vector<adapt::TransitionEvent> events_;

  std::optional<Plan> plan_;
  int ticks_since_plan_ = 0;
  std::optional<HomotopySignature> prev_signature_;
  std::vector<Vec2> prev_centroids_;
};

/// Unicycle command (v, omega) held for duration that moves from along a
/// circular arc tangent to its heading onto the position of to. Reverses
/// when the target lies behind.
std::pair<double, double> arc_to(const Pose& from, const Pose& to, double duration);

/// Point goal shapes for rendering.
std::vector<Vec2> goal_shape(const GoalConstraint& g);

/// Moves p out of every hull so that it keeps clearance from each.
Vec2 push_out_of_hulls(Vec2 p, std::span<const topo::ObstacleGroup> groups, double clearance);

}  // namespace leadfollow::harness
