#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadfollow/adapt/adaptation.hpp"
#include "leadfollow/perception/embedding.hpp"
#include "leadfollow/perception/kalman.hpp"
#include "leadfollow/sim/world.hpp"
#include "leadfollow/topo/costmap.hpp"
#include "leadfollow/topo/graph.hpp"
#include "leadfollow/trajopt/residuals.hpp"
#include "leadfollow/trajopt/select.hpp"

namespace leadfollow::harness {

enum class Variant { Full, NoDfb, NoGraph, Pursuit };

inline constexpr Variant kAllVariants[] = {Variant::Full, Variant::NoDfb, Variant::NoGraph,
                                           Variant::Pursuit};

const char* to_string(Variant v);
/// Accepts underscore and dash spellings plus the long ablation names.
Variant variant_from_string(const std::string& s);

struct PerceptionConfig {
  int dimension = 32;
  double noise_sigma = 0.03;
  double scale_drift = 0.35;        // rad per meter of capture-distance change
  double reference_distance = 1.5;  // m
  double match_threshold = 0.8;
  int temporal_capacity = 8;
  int distance_bins = 10;
  double bin_width = 1.0;
  /// Track continues while the new mean lies this close to the prediction.
  double gate_distance = 1.0;
  /// Velocity finite-difference window (s).
  double velocity_window = 0.4;
  perception::KalmanNoise kalman;
};

struct PlannerConfig {
  /// Inflation carries 5 cm of slack over the footprint for tracking error.
  topo::CostmapConfig costmap{8.0, 0.1, 0.35};
  /// Groups whose cells cover less than this fraction of their hull are split.
  double min_fill = 0.4;
  int depth_limit = 3;
  topo::EnumerateOptions enumerate{2.0, 2.0, 64};
  std::size_t candidate_cap = 16;
  /// Candidates actually optimized per tick (shortest seeds first).
  std::size_t optimize_cap = 4;
  double trajectory_dt = 0.3;
  int m_max = 40;
  double margin = 0.1;
  trajopt::OptimizerConfig optimizer;
  double select_alpha = 0.5;
  trajopt::SimilarityForm similarity = trajopt::SimilarityForm::Agreement;
  /// Replan every this many ticks; in between the previous plan is tracked.
  int replan_every = 1;
  /// Pursuit baseline gains.
  double pursuit_kv = 1.0;
  double pursuit_kw = 2.0;
};

struct EpisodeConfig {
  double tick = 0.2;
  double substep = 0.05;
  double settle_time = 5.0;
  /// Planner snapshot every this many ticks (0 disables).
  int snapshot_every = 10;
};

struct SwitchCommand {
  double time = 0.0;
  /// Index into the scenario's leader list (0 is the scripted target).
  std::size_t leader = 1;
};

struct ScriptVariation {
  int count = 10;
  double jitter = 0.3;  // meters, uniform per interior waypoint
  std::uint64_t seed = 1;
};

struct ScenarioConfig {
  std::string name = "scenario";
  sim::Arena arena;
  std::vector<sim::Obstacle> obstacles;
  /// Replayed target-leader scripts; episode k uses scripts[k].
  std::vector<sim::LeaderScript> scripts;
  /// Additional leaders present in every episode (switch targets, bystanders).
  std::vector<sim::LeaderScript> extra_leaders;
  std::vector<perception::LightingRegion> lighting;
  std::optional<SwitchCommand> switch_command;
  Pose robot_start;
  sim::RobotModel robot;
  sim::SensorModel sensor;
  int repeats = 4;
  std::vector<std::uint64_t> seeds;  // one per repeat; defaults to 1..repeats
  Variant variant = Variant::Full;
  PerceptionConfig perception;
  PlannerConfig planner;
  adapt::AdaptationParams adaptation;
  EpisodeConfig episode;

  /// Throws ConfigError.
  void validate() const;
  std::uint64_t seed_for(int repeat) const;
};

/// Parses a scenario document; throws ConfigError with a path-like context.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Jittered copies of a base script. Interior waypoints move by up to jitter
/// in each axis; moves that would put a ground leader inside or through a
/// solid obstacle are rejected. Variation 0 is the base script itself.
std::vector<sim::LeaderScript> vary_script(const sim::LeaderScript& base,
                                           const std::vector<sim::Obstacle>& obstacles,
                                           const ScriptVariation& variation);

/// Seeded random discs in a rectangle keeping clear of the given points.
std::vector<sim::Obstacle> random_discs(int count, const Vec2& lo, const Vec2& hi,
                                        double r_min, double r_max, std::uint64_t seed,
                                        const std::vector<Vec2>& keep_clear,
                                        double clearance, int first_id,
                                        sim::ObstacleKind kind = sim::ObstacleKind::Static);

}  // namespace leadfollow::harness
