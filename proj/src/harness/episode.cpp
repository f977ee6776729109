#include "leadfollow/harness/episode.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "leadfollow/errors.hpp"

namespace leadfollow::harness {

void summarize(RunRecord& r) {
  r.loss_time = 0.0;
  r.identified_time = 0.0;
  r.distance_integral = 0.0;
  r.duration = double(r.ticks.size()) * r.tick;
  for (const auto& t : r.ticks) {
    if (t.identified) {
      r.identified_time += r.tick;
      r.distance_integral += t.distance * r.tick;
    } else {
      r.loss_time += r.tick;
    }
  }
  r.success = !r.ticks.empty() && r.ticks.back().identified &&
              r.ticks.back().distance <= r.d_max;
}

RunRecord run_episode(const ScenarioConfig& cfg, int script_index, int repeat, Variant variant) {
  if (script_index < 0 || script_index >= int(cfg.scripts.size())) {
    throw ConfigError("script index out of range");
  }
  const std::uint64_t seed = cfg.seed_for(repeat) * 1000003ULL + std::uint64_t(script_index);

  sim::World world;
  world.arena = cfg.arena;
  world.obstacles = cfg.obstacles;
  // Dynamic obstacles draw a fresh velocity stream per episode.
  for (auto& o : world.obstacles) {
    if (o.kind != sim::ObstacleKind::Dynamic) continue;
    const auto& d = std::get<sim::Disc>(o.shape);
    o = sim::make_dynamic_disc(o.id, d.center, d.radius, o.seed * 6364136223846793005ULL + seed,
                               o.speed_min, o.speed_max, o.resample_period);
  }
  world.leaders.push_back(cfg.scripts[std::size_t(script_index)]);
  for (const auto& l : cfg.extra_leaders) world.leaders.push_back(l);
  world.noise_seed = seed;

  double end = world.leaders.front().end_time();
  if (cfg.switch_command) {
    end = std::max(end, world.leaders[cfg.switch_command->leader].end_time());
  }
  end += cfg.episode.settle_time;

  RunRecord rec;
  rec.scenario = cfg.name;
  rec.variant = variant;
  rec.script_index = script_index;
  rec.repeat = repeat;
  rec.seed = seed;
  rec.tick = cfg.episode.tick;
  rec.d_max = cfg.adaptation.d_max;
  rec.arena = cfg.arena;
  for (const auto& o : cfg.obstacles) rec.obstacles.push_back(o.outline());

  FollowerStack stack(cfg, variant, seed, world.leaders);
  Pose robot = cfg.robot_start;
  double speed = 0.0;
  stack.command_switch(world, 0, robot, 0.0);
  bool switched = false;
  rec.collision = sim::robot_collides(world, robot, cfg.robot.footprint_radius);

  const double tick = cfg.episode.tick;
  const int substeps = std::max(1, int(std::lround(tick / cfg.episode.substep)));
  const double h = tick / substeps;
  const auto& rm = cfg.robot;
  for (int i = 0;; ++i) {
    const double t = i * tick;
    if (t > end + 1e-9) break;
    if (cfg.switch_command && !switched && t >= cfg.switch_command->time - 1e-9) {
      stack.command_switch(world, cfg.switch_command->leader, robot, t);
      switched = true;
    }
    const bool snap = cfg.episode.snapshot_every > 0 && i % cfg.episode.snapshot_every == 0;
    auto out = stack.tick(world, robot, speed, snap);

    TickRecord tr;
    tr.time = t;
    tr.robot = robot;
    tr.leader = world.leader_pose(stack.target());
    tr.state = out.state;
    tr.signature = out.signature;
    tr.safe_distance = out.safe_distance;
    tr.v_cap = out.v_cap;
    tr.visible = out.visible;
    tr.identified = out.identified;
    tr.score = out.score;
    tr.distance = (tr.leader.position() - robot.position()).norm();
    rec.ticks.push_back(std::move(tr));
    if (out.snapshot) rec.snapshots.push_back(std::move(*out.snapshot));

    // Actuation limits, then unicycle integration.
    double v = std::clamp(out.v, -rm.v_max_physical, rm.v_max_physical);
    v = std::clamp(v, speed - rm.a_max * tick, speed + rm.a_max * tick);
    const double w = std::clamp(out.omega, -rm.omega_max, rm.omega_max);
    for (int s = 0; s < substeps; ++s) {
      const double mid = robot.theta + 0.5 * w * h;
      robot = Pose(robot.x + v * h * std::cos(mid), robot.y + v * h * std::sin(mid),
                   robot.theta + w * h);
      world = sim::step_world(std::move(world), h);
      if (!rec.collision && sim::robot_collides(world, robot, rm.footprint_radius)) {
        rec.collision = true;
      }
    }
    speed = v;
  }
  rec.events = stack.events();
  summarize(rec);
  return rec;
}

std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg, Variant variant,
                                    unsigned threads) {
  cfg.validate();
  const int n_scripts = int(cfg.scripts.size());
  const int total = cfg.repeats * n_scripts;
  std::vector<RunRecord> out(static_cast<std::size_t>(total));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, unsigned(total));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int k = next++; k < total; k = next++) {
      try {
        out[std::size_t(k)] = run_episode(cfg, k % n_scripts, k / n_scripts, variant);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg) {
  return run_scenario(cfg, cfg.variant);
}

}  // namespace leadfollow::harness
