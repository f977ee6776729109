#include "leadfollow/harness/metrics.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace leadfollow::harness {

MetricsSummary compute_metrics(std::span<const RunRecord> records) {
  if (records.empty()) throw std::invalid_argument("compute_metrics: no records");
  MetricsSummary m;
  m.episodes = records.size();
  double identified_time = 0.0, distance_integral = 0.0;
  for (const auto& r : records) {
    RunRecord copy;
    copy.tick = r.tick;
    copy.d_max = r.d_max;
    copy.ticks = r.ticks;
    summarize(copy);
    m.follow_success_rate += copy.success ? 1.0 : 0.0;
    m.collision_rate += r.collision ? 1.0 : 0.0;
    if (copy.duration > 0) m.avg_leader_loss_ratio += copy.loss_time / copy.duration;
    identified_time += copy.identified_time;
    distance_integral += copy.distance_integral;
  }
  const double n = double(records.size());
  m.follow_success_rate /= n;
  m.collision_rate /= n;
  m.avg_leader_loss_ratio /= n;
  m.avg_distance = identified_time > 0 ? distance_integral / identified_time : 0.0;
  return m;
}

const MetricsSummary& AblationTable::at(Variant v) const {
  for (const auto& r : rows) {
    if (r.variant == v) return r.metrics;
  }
  throw std::out_of_range(std::string("variant not in table: ") + to_string(v));
}

std::string AblationTable::format() const {
  std::string s = fmt::format("{:<10} {:>8} {:>9} {:>10} {:>9} {:>12}\n", "variant", "episodes",
                              "success", "loss_ratio", "collision", "avg_dist_m");
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    s += fmt::format("{:<10} {:>8} {:>8.1f}% {:>9.1f}% {:>8.1f}% {:>12.2f}\n", to_string(r.variant),
                     m.episodes, 100 * m.follow_success_rate, 100 * m.avg_leader_loss_ratio,
                     100 * m.collision_rate, m.avg_distance);
  }
  return s;
}

AblationTable run_ablation_suite(std::span<const ScenarioConfig> scenarios,
                                 std::span<const Variant> variants, unsigned threads) {
  AblationTable table;
  for (const auto v : variants) {
    std::vector<RunRecord> all;
    for (const auto& cfg : scenarios) {
      auto recs = run_scenario(cfg, v, threads);
      all.insert(all.end(), std::make_move_iterator(recs.begin()),
                 std::make_move_iterator(recs.end()));
    }
    table.rows.push_back({v, compute_metrics(all)});
  }
  return table;
}

}  // namespace leadfollow::harness
