#pragma once

#include <span>
#include <string>
#include <vector>

#include "leadfollow/harness/episode.hpp"

namespace leadfollow::harness {

struct MetricsSummary {
  std::size_t episodes = 0;
  double follow_success_rate = 0.0;
  double avg_leader_loss_ratio = 0.0;
  double collision_rate = 0.0;
  /// Time-weighted over identified ticks of all episodes (meters).
  double avg_distance = 0.0;
};

/// Pure function of the records. Throws std::invalid_argument when empty.
MetricsSummary compute_metrics(std::span<const RunRecord> records);

struct AblationRow {
  Variant variant = Variant::Full;
  MetricsSummary metrics;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  /// Text table with one row per variant and the four metric columns.
  std::string format() const;
  const MetricsSummary& at(Variant v) const;
};

/// Runs every variant over the same scenarios and seeds.
AblationTable run_ablation_suite(std::span<const ScenarioConfig> scenarios,
                                 std::span<const Variant> variants = kAllVariants,
                                 unsigned threads = 0);

}  // namespace leadfollow::harness
