#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leadfollow/adapt/adaptation.hpp"
#include "leadfollow/harness/pipeline.hpp"
#include "leadfollow/harness/scenario.hpp"

namespace leadfollow::harness {

struct TickRecord {
  double time = 0.0;
  Pose robot;
  Pose leader;  // ground truth of the current target
  adapt::FollowState state = adapt::FollowState::Planning;
  HomotopySignature signature;
  double safe_distance = 0.0;
  double v_cap = 0.0;
  bool visible = false;
  bool identified = false;
  double score = 0.0;
  double distance = 0.0;  // true robot-leader distance

  bool operator==(const TickRecord&) const = default;
};

struct RunRecord {
  std::string scenario;
  Variant variant = Variant::Full;
  int script_index = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  double tick = 0.2;
  double d_max = 3.0;
  sim::Arena arena;
  /// Obstacle outlines at t = 0.
  std::vector<Polygon> obstacles;
  std::vector<TickRecord> ticks;
  std::vector<adapt::TransitionEvent> events;
  std::vector<PlannerSnapshot> snapshots;

  // Terminal summary, recomputable from ticks.
  bool success = false;
  bool collision = false;
  double loss_time = 0.0;
  double identified_time = 0.0;
  double distance_integral = 0.0;
  double duration = 0.0;

  bool operator==(const RunRecord&) const = default;
};

/// Fills the terminal fields from the tick list (collision is left as is).
void summarize(RunRecord& record);

/// One deterministic episode: scripts[script_index] drives the target leader
/// until it finishes plus the settling window.
RunRecord run_episode(const ScenarioConfig& cfg, int script_index, int repeat, Variant variant);

/// repeats x scripts episodes for the given variant, run concurrently and
/// returned in (repeat, script) order. threads = 0 uses the hardware count.
std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg, Variant variant,
                                    unsigned threads = 0);
/// Same with the scenario's own variant.
std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg);

}  // namespace leadfollow::harness
