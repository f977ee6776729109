#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "leadfollow/geometry.hpp"

namespace leadfollow::sim {

struct Disc {
  Vec2 center = Vec2::Zero();
  double radius = 0.5;
};

enum class ObstacleKind { Static, Dynamic, Overflyable };

const char* to_string(ObstacleKind kind);
ObstacleKind obstacle_kind_from_string(const std::string& s);

/// Static, dynamic or overflyable obstacle. Overflyable obstacles block the
/// follower but not a leader that flies over them, and they do not occlude
/// the camera's view of the leader.
struct Obstacle {
  int id = 0;
  std::variant<Polygon, Disc> shape;
  ObstacleKind kind = ObstacleKind::Static;

  // Dynamic obstacles only.
  Vec2 velocity = Vec2::Zero();
  double resample_period = 3.0;
  double speed_min = 0.2;
  double speed_max = 0.6;
  std::uint64_t seed = 0;

  // Runtime state of a dynamic obstacle.
  std::mt19937_64 rng;
  double next_resample = 0.0;
  int resample_count = 0;

  bool is_disc() const { return std::holds_alternative<Disc>(shape); }
  Vec2 center() const;
  /// Polygonal outline (discs are approximated by a 24-gon).
  Polygon outline() const;
  double distance_to(const Vec2& p) const;
  std::optional<double> raycast(const Vec2& origin, const Vec2& dir) const;
  bool blocks_segment(const Vec2& a, const Vec2& b) const;
  void translate(const Vec2& delta);
};

/// Builds a dynamic obstacle whose velocity generator is seeded once.
Obstacle make_dynamic_disc(int id, Vec2 center, double radius,
                           std::uint64_t seed, double speed_min,
                           double speed_max, double resample_period);

struct Waypoint {
  double time = 0.0;
  Pose pose;
};

/// Replayable leader motion: linear interpolation between timed waypoints.
struct LeaderScript {
  std::vector<Waypoint> waypoints;
  std::string identity = "leader";
  std::uint64_t appearance_seed = 1;
  bool flies_over = false;
  double radius = 0.3;

  /// Throws ConfigError unless times strictly increase and the list is
  /// nonempty.
  void validate() const;
  Pose pose_at(double t) const;
  Vec2 velocity_at(double t) const;
  double end_time() const;
};

struct RobotModel {
  double v_max_physical = 1.5;
  double omega_max = 2.0;
  double a_max = 2.0;
  double footprint_radius = 0.3;

  void validate() const;
};

struct SensorModel {
  double fov_half_angle = 0.76;  // camera half field of view (rad)
  double range = 12.0;
  int ray_count = 720;
  double scan_noise_sigma = 0.01;
  /// Half field of view of the range scanner that feeds the costmap.
  double scan_fov_half_angle = kPi;

  void validate() const;
};

struct Arena {
  double x_min = -20.0, y_min = -20.0, x_max = 20.0, y_max = 20.0;
  bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min &&
           p.y() <= y_max;
  }
  bool operator==(const Arena&) const = default;
};

struct World {
  Arena arena;
  std::vector<Obstacle> obstacles;
  std::vector<LeaderScript> leaders;
  double time = 0.0;
  std::uint64_t tick = 0;
  std::uint64_t noise_seed = 0;

  Pose leader_pose(std::size_t index) const;
};

/// Advances leaders along their scripts and dynamic obstacles along their
/// velocities. Dynamic obstacles redraw a velocity every resample_period.
World step_world(World world, double dt);

/// Which body a scan point came from.
enum class HitKind { Obstacle, Leader };

struct ScanPoint {
  Vec2 point;  // world frame
  HitKind kind = HitKind::Obstacle;
  int index = -1;  // obstacle id or leader index
};

struct LeaderObservation {
  bool visible = false;
  double visible_fraction = 0.0;
  bool in_fov = false;
  std::vector<Vec2> point_set;  // world frame
  std::optional<int> occluder_id;
};

struct SenseResult {
  std::vector<ScanPoint> scan;
  LeaderObservation observation;
};

/// Number of outline samples used for the visible fraction.
inline constexpr int kLeaderOutlineSamples = 16;

/// Range scan plus camera observation of the target leader. Scan points are
/// reported in the world frame; target-leader hits inside the camera field of
/// view go to observation.point_set instead of the scan. The noise stream is a
/// pure function of (world.noise_seed, world.tick).
SenseResult sense(const World& world, const Pose& robot,
                  const SensorModel& sensor, std::size_t target_leader,
                  int outline_samples = kLeaderOutlineSamples);

/// Fraction of leader outline samples seen from the robot without occlusion.
double visible_fraction(const World& world, const Pose& robot,
                        const SensorModel& sensor, std::size_t target_leader,
                        int outline_samples, std::optional<int>* occluder);

struct TimedObservation {
  double time = 0.0;
  LeaderObservation observation;
};

struct LeaderMeanState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

/// Mean leader position from the newest visible point set, and velocity from
/// the positional difference across the window. Throws NoVisibleLeader.
LeaderMeanState leader_mean_state(std::span<const TimedObservation> history,
                                  double window);

Vec2 mean_point(std::span<const Vec2> pts);

/// Leader body overlaps an obstacle that it cannot pass.
bool leader_collides(const World& world, std::size_t leader);

/// Follower footprint overlaps any obstacle (overflyable included) or any
/// ground leader.
bool robot_collides(const World& world, const Pose& robot,
                    double footprint_radius);

}  // namespace leadfollow::sim
