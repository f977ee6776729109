#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "leadfollow/errors.hpp"
#include "leadfollow/harness/episode.hpp"
#include "leadfollow/harness/metrics.hpp"
#include "leadfollow/harness/render.hpp"
#include "leadfollow/harness/trace.hpp"

using namespace leadfollow;
using namespace leadfollow::harness;
using nlohmann::json;

namespace {

// Short open-field run: leader walks 2 m ahead of the robot.
json short_doc() {
  return json::parse(R"({
    "name": "short",
    "arena": [-3, -4, 8, 4],
    "robot_start": [0, 0, 0],
    "obstacles": [{"kind": "static", "disc": [3.0, 2.2, 0.4]}],
    "leader": {"identity": "walker", "appearance_seed": 3,
               "waypoints": [[0, 2, 0], [2, 3, 0], [3, 3.5, 0]]},
    "variation": {"count": 10, "jitter": 0.2, "seed": 9},
    "repeats": 4,
    "episode": {"settle_time": 0.4, "snapshot_every": 2}
  })");
}

RunRecord synthetic(std::vector<std::pair<bool, double>> ticks, double tick = 0.2) {
  RunRecord r;
  r.tick = tick;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    TickRecord t;
    t.time = tick * double(i);
    t.identified = ticks[i].first;
    t.distance = ticks[i].second;
    r.ticks.push_back(t);
  }
  summarize(r);
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("leadfollow_test_" + name)).string();
}

}  // namespace

TEST(Scenario, ParsesAndValidates) {
  const auto cfg = parse_scenario(short_doc());
  EXPECT_EQ(cfg.name, "short");
  EXPECT_EQ(cfg.scripts.size(), 10u);
  EXPECT_EQ(cfg.repeats, 4);
  EXPECT_EQ(cfg.obstacles.size(), 1u);
  EXPECT_DOUBLE_EQ(cfg.episode.settle_time, 0.4);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Scenario, RejectsBadDocuments) {
  auto doc = short_doc();
  doc["arena"] = {1, 2};
  EXPECT_THROW(parse_scenario(doc), ConfigError);
  doc = short_doc();
  doc["obstacles"][0]["kind"] = "lava";
  EXPECT_THROW(parse_scenario(doc), ConfigError);
  doc = short_doc();
  doc.erase("leader");
  EXPECT_THROW(parse_scenario(doc), ConfigError);
  doc = short_doc();
  doc["robot_start"] = {50, 0, 0};
  EXPECT_THROW(parse_scenario(doc), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), std::exception);
}

TEST(Scenario, BundledScenariosLoad) {
  for (const char* name : {"playground", "forest", "factory", "dynamic", "reappear"}) {
    const auto cfg = load_scenario(std::filesystem::path(LEADFOLLOW_SCENARIO_DIR) / (std::string(name) + ".json"));
    EXPECT_NO_THROW(cfg.validate()) << name;
    EXPECT_FALSE(cfg.scripts.empty()) << name;
  }
}

TEST(Scenario, VariationKeepsBaseAndJitterBound) {
  const auto cfg = parse_scenario(short_doc());
  const auto& base = cfg.scripts[0];
  for (const auto& s : cfg.scripts) {
    ASSERT_EQ(s.waypoints.size(), base.waypoints.size());
    EXPECT_TRUE(s.waypoints.front().pose.position().isApprox(base.waypoints.front().pose.position()));
    for (std::size_t i = 0; i < s.waypoints.size(); ++i) {
      const Vec2 d = s.waypoints[i].pose.position() - base.waypoints[i].pose.position();
      EXPECT_LE(std::abs(d.x()), 0.2 + 1e-12);
      EXPECT_LE(std::abs(d.y()), 0.2 + 1e-12);
    }
  }
}

TEST(Episode, ScenarioYieldsOneRecordPerScriptAndRepeat) {
  const auto cfg = parse_scenario(short_doc());
  const auto recs = run_scenario(cfg, Variant::Full, 1);
  ASSERT_EQ(recs.size(), 40u);
  for (int r = 0; r < 4; ++r) {
    for (int s = 0; s < 10; ++s) {
      EXPECT_EQ(recs[std::size_t(r * 10 + s)].repeat, r);
      EXPECT_EQ(recs[std::size_t(r * 10 + s)].script_index, s);
    }
  }
  const auto m = compute_metrics(recs);
  EXPECT_EQ(m.episodes, 40u);
  EXPECT_GE(m.follow_success_rate, 0.0);
  EXPECT_LE(m.follow_success_rate, 1.0);
}

TEST(Episode, Deterministic) {
  const auto cfg = parse_scenario(short_doc());
  const auto a = run_episode(cfg, 3, 1, Variant::Full);
  const auto b = run_episode(cfg, 3, 1, Variant::Full);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.ticks.empty());
}

TEST(Episode, SummaryIsRecomputable) {
  const auto cfg = parse_scenario(short_doc());
  auto rec = run_episode(cfg, 0, 0, Variant::Full);
  const auto before = rec;
  summarize(rec);
  EXPECT_EQ(rec.success, before.success);
  EXPECT_DOUBLE_EQ(rec.loss_time, before.loss_time);
  EXPECT_DOUBLE_EQ(rec.distance_integral, before.distance_integral);
}

TEST(Episode, DistanceBufferIrrelevantWhileLeaderStaysInView) {
  const auto cfg = parse_scenario(short_doc());
  const auto full = run_episode(cfg, 0, 0, Variant::Full);
  const auto no_dfb = run_episode(cfg, 0, 0, Variant::NoDfb);
  bool always_seen = true;
  for (const auto& t : full.ticks) always_seen &= t.identified;
  ASSERT_TRUE(always_seen);
  ASSERT_EQ(full.ticks.size(), no_dfb.ticks.size());
  for (std::size_t i = 0; i < full.ticks.size(); ++i) {
    EXPECT_EQ(full.ticks[i].robot, no_dfb.ticks[i].robot) << "tick " << i;
    EXPECT_EQ(full.ticks[i].state, no_dfb.ticks[i].state) << "tick " << i;
  }
}

TEST(Metrics, Examples) {
  const std::vector<RunRecord> one{synthetic({{true, 1.0}, {true, 3.0}})};
  EXPECT_DOUBLE_EQ(compute_metrics(one).avg_distance, 2.0);
  std::vector<std::pair<bool, double>> ticks(40, {true, 1.0});
  ticks[5] = {false, 0.0};
  const std::vector<RunRecord> lossy{synthetic(ticks)};
  const auto m = compute_metrics(lossy);
  EXPECT_NEAR(m.avg_leader_loss_ratio, 0.025, 1e-12);
  EXPECT_DOUBLE_EQ(m.follow_success_rate, 1.0);
  EXPECT_THROW(compute_metrics(std::vector<RunRecord>{}), std::invalid_argument);
}

TEST(Metrics, SuccessNeedsFinalIdentificationWithinRange) {
  auto far = synthetic({{true, 1.0}, {true, 3.5}});
  EXPECT_FALSE(far.success);
  auto lost = synthetic({{true, 1.0}, {false, 1.0}});
  EXPECT_FALSE(lost.success);
  far.collision = true;
  const std::vector<RunRecord> recs{far, lost};
  const auto m = compute_metrics(recs);
  EXPECT_DOUBLE_EQ(m.collision_rate, 0.5);
  EXPECT_DOUBLE_EQ(m.follow_success_rate, 0.0);
}

TEST(Metrics, AblationTableFormat) {
  AblationTable t;
  MetricsSummary m;
  m.episodes = 40;
  m.follow_success_rate = 0.75;
  m.avg_leader_loss_ratio = 0.1;
  m.collision_rate = 0.05;
  m.avg_distance = 2.19;
  t.rows.push_back({Variant::Full, m});
  t.rows.push_back({Variant::Pursuit, m});
  const auto s = t.format();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
  EXPECT_NE(s.find("75.0%"), std::string::npos);
  EXPECT_NE(s.find("2.19"), std::string::npos);
  EXPECT_EQ(t.at(Variant::Pursuit).episodes, 40u);
  EXPECT_THROW(t.at(Variant::NoGraph), std::out_of_range);
}

TEST(Trace, EmptyTraceIsHeaderOnly) {
  const auto s = trace_to_string({});
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1);
  EXPECT_TRUE(trace_from_string(s).empty());
  EXPECT_THROW(trace_from_string("{\"type\":\"tick\"}\n"), ConfigError);
}

TEST(Trace, RoundTripsExactly) {
  const auto cfg = parse_scenario(short_doc());
  std::vector<RunRecord> recs{run_episode(cfg, 1, 0, Variant::Full), run_episode(cfg, 2, 1, Variant::Pursuit)};
  EXPECT_EQ(trace_from_string(trace_to_string(recs)), recs);
  const auto path = temp_path("trace.jsonl");
  emit_trace(recs, path);
  EXPECT_EQ(parse_trace(path), recs);
  std::filesystem::remove(path);
}

TEST(Render, CandidateCountMatchesSnapshot) {
  const auto cfg = parse_scenario(short_doc());
  const auto rec = run_episode(cfg, 0, 0, Variant::Full);
  ASSERT_FALSE(rec.snapshots.empty());
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const auto svg = render_svg(rec, k);
    const std::regex cand("class=\"candidate\"");
    const auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), cand), std::sregex_iterator());
    EXPECT_EQ(std::size_t(n), rec.snapshots[k].candidates.size());
  }
}

TEST(Cli, BadConfigExitsWithTwo) {
#ifdef LEADFOLLOW_CLI_PATH
  const auto bad = temp_path("bad.json");
  std::ofstream(bad) << R"({"name": "bad", "arena": "nowhere"})";
  const std::string cmd = std::string(LEADFOLLOW_CLI_PATH) + " run --scenario " + bad + " --out " +
                          temp_path("out") + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  std::filesystem::remove(bad);
#else
  GTEST_SKIP() << "command-line tool not built";
#endif
}
