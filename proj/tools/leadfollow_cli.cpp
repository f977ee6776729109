#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "leadfollow/errors.hpp"
#include "leadfollow/harness/episode.hpp"
#include "leadfollow/harness/metrics.hpp"
#include "leadfollow/harness/render.hpp"
#include "leadfollow/harness/scenario.hpp"
#include "leadfollow/harness/trace.hpp"

namespace fs = std::filesystem;
using namespace leadfollow;
using namespace leadfollow::harness;

namespace {

void configure_logging() {
  if (const char* level = std::getenv("LEADFOLLOW_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

std::string table_for(const std::vector<RunRecord>& records) {
  std::map<Variant, std::vector<RunRecord>> by_variant;
  for (const auto& r : records) by_variant[r.variant].push_back(r);
  AblationTable table;
  for (const auto& [v, recs] : by_variant) table.rows.push_back({v, compute_metrics(recs)});
  return table.format();
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Leader-following simulation harness"};
  app.require_subcommand(1);

  std::string scenario_path, variant_name, out_dir = "traces";
  std::optional<std::uint64_t> seed;
  int repeats = 0;
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write its trace");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--variant", variant_name, "full | no-dfb | no-graph | pursuit");
  run->add_option("--seed", seed, "Run a single repeat with this seed");
  run->add_option("--repeats", repeats, "Override the repeat count");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads (0 = hardware)");

  std::string traces_dir;
  auto* metrics = app.add_subcommand("metrics", "Summarize traces in a directory");
  metrics->add_option("--traces", traces_dir, "Directory of .jsonl traces")->required();

  std::string trace_path, svg_path;
  std::size_t episode = 0;
  std::optional<std::size_t> snapshot;
  auto* render = app.add_subcommand("render", "Render one episode of a trace as SVG");
  render->add_option("--trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  render->add_option("--out", svg_path, "SVG file")->required();
  render->add_option("--episode", episode, "Episode index within the trace");
  render->add_option("--snapshot", snapshot, "Planner snapshot index");

  std::vector<std::string> suite;
  auto* ablate = app.add_subcommand("ablate", "Run every variant over scenarios");
  ablate->add_option("--scenario", suite, "Scenario JSON files")->required()->check(CLI::ExistingFile);
  ablate->add_option("--threads", threads, "Worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto cfg = load_scenario(scenario_path);
      const Variant variant = variant_name.empty() ? cfg.variant : variant_from_string(variant_name);
      if (seed) {
        cfg.seeds = {*seed};
        cfg.repeats = 1;
      }
      if (repeats > 0) {
        cfg.repeats = repeats;
        if (int(cfg.seeds.size()) < repeats) cfg.seeds.clear();
      }
      cfg.validate();
      spdlog::info("running {} ({} scripts x {} repeats, variant {})", cfg.name, cfg.scripts.size(),
                   cfg.repeats, to_string(variant));
      const auto records = run_scenario(cfg, variant, threads);
      fs::create_directories(out_dir);
      const fs::path path = fs::path(out_dir) / (cfg.name + "_" + to_string(variant) + ".jsonl");
      emit_trace(records, path);
      spdlog::info("wrote {}", path.string());
      std::cout << table_for(records);
    } else if (*metrics) {
      const auto records = load_traces(traces_dir);
      if (records.empty()) {
        spdlog::error("no episodes found in {}", traces_dir);
        return 1;
      }
      std::cout << table_for(records);
    } else if (*render) {
      const auto records = parse_trace(trace_path);
      if (episode >= records.size()) throw ConfigError("episode index out of range");
      render_svg(records[episode], svg_path, snapshot);
      spdlog::info("wrote {}", svg_path);
    } else if (*ablate) {
      std::vector<ScenarioConfig> cfgs;
      for (const auto& p : suite) cfgs.push_back(load_scenario(p));
      std::cout << run_ablation_suite(cfgs, kAllVariants, threads).format();
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
