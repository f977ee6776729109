#include "leadfollow/harness/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "leadfollow/errors.hpp"

namespace leadfollow::harness {

using nlohmann::json;

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoDfb: return "no_dfb";
    case Variant::NoGraph: return "no_graph";
    case Variant::Pursuit: return "pursuit";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& raw) {
  std::string s = raw;
  for (auto& c : s) c = c == '-' ? '_' : c;
  if (s == "full") return Variant::Full;
  if (s == "no_dfb") return Variant::NoDfb;
  if (s == "no_graph" || s == "no_graph_planner") return Variant::NoGraph;
  if (s == "pursuit" || s == "baseline_pursuit") return Variant::Pursuit;
  throw ConfigError("unknown variant '" + raw + "'");
}

void ScenarioConfig::validate() const {
  if (scripts.empty()) throw ConfigError(name + ": no leader scripts");
  for (const auto& s : scripts) s.validate();
  for (const auto& s : extra_leaders) s.validate();
  if (repeats < 1) throw ConfigError(name + ": repeats must be at least 1");
  if (!seeds.empty() && int(seeds.size()) < repeats) {
    throw ConfigError(name + ": fewer seeds than repeats");
  }
  if (switch_command && switch_command->leader > extra_leaders.size()) {
    throw ConfigError(name + ": switch target does not exist");
  }
  robot.validate();
  sensor.validate();
  adaptation.validate();
  planner.optimizer.validate();
  if (!(episode.tick > 0 && episode.substep > 0 && episode.substep <= episode.tick)) {
    throw ConfigError(name + ": need 0 < substep <= tick");
  }
  if (planner.depth_limit < 1) throw ConfigError(name + ": depth_limit must be >= 1");
  if (planner.replan_every < 1) throw ConfigError(name + ": replan_every must be >= 1");
  if (!(planner.costmap.width > 0 && planner.costmap.resolution > 0)) {
    throw ConfigError(name + ": costmap width and resolution must be positive");
  }
  if (!(perception.match_threshold > 0 && perception.match_threshold < 1)) {
    throw ConfigError(name + ": match_threshold must lie in (0, 1)");
  }
  if (!arena.contains(robot_start.position())) throw ConfigError(name + ": robot starts outside arena");
}

std::uint64_t ScenarioConfig::seed_for(int repeat) const {
  if (repeat < int(seeds.size())) return seeds[repeat];
  return std::uint64_t(repeat + 1);
}

namespace {

Vec2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Polygon polygon(const json& j) {
  Polygon p;
  for (const auto& v : j) p.push_back(vec2(v));
  if (p.size() < 3) throw ConfigError("polygon needs at least three vertices");
  if (!is_counterclockwise(p)) std::reverse(p.begin(), p.end());
  return p;
}

Polygon box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("box must be [x0, y0, x1, y1]");
  const double x0 = j[0], y0 = j[1], x1 = j[2], y1 = j[3];
  if (!(x1 > x0 && y1 > y0)) throw ConfigError("box must have positive extent");
  return {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

sim::Obstacle obstacle(const json& j, int id) {
  const auto kind = sim::obstacle_kind_from_string(j.value("kind", "static"));
  if (j.contains("disc")) {
    const auto& d = j.at("disc");
    if (!d.is_array() || d.size() != 3) throw ConfigError("disc must be [cx, cy, r]");
    const Vec2 c(d[0].get<double>(), d[1].get<double>());
    const double r = d[2];
    if (!(r > 0)) throw ConfigError("disc radius must be positive");
    if (kind == sim::ObstacleKind::Dynamic) {
      double smin = 0.2, smax = 0.6;
      if (j.contains("speed")) {
        smin = j.at("speed")[0];
        smax = j.at("speed")[1];
      }
      return sim::make_dynamic_disc(id, c, r, j.value("seed", std::uint64_t(id) + 1), smin, smax,
                                    j.value("resample_period", 3.0));
    }
    sim::Obstacle o;
    o.id = id;
    o.shape = sim::Disc{c, r};
    o.kind = kind;
    return o;
  }
  sim::Obstacle o;
  o.id = id;
  o.kind = kind;
  if (j.contains("polygon")) {
    o.shape = polygon(j.at("polygon"));
  } else if (j.contains("box")) {
    o.shape = box(j.at("box"));
  } else {
    throw ConfigError("obstacle needs one of disc, polygon, box");
  }
  if (kind == sim::ObstacleKind::Dynamic) throw ConfigError("dynamic obstacles must be discs");
  return o;
}

sim::LeaderScript leader(const json& j) {
  sim::LeaderScript s;
  read(j, "identity", s.identity);
  read(j, "appearance_seed", s.appearance_seed);
  read(j, "flies_over", s.flies_over);
  read(j, "radius", s.radius);
  const auto& wps = j.at("waypoints");
  std::vector<std::array<double, 4>> raw;
  std::vector<bool> has_heading;
  for (const auto& w : wps) {
    if (!w.is_array() || (w.size() != 3 && w.size() != 4)) {
      throw ConfigError("waypoint must be [t, x, y] or [t, x, y, theta]");
    }
    raw.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>(),
                   w.size() == 4 ? w[3].get<double>() : 0.0});
    has_heading.push_back(w.size() == 4);
  }
  // Missing headings follow the direction of travel.
  double last = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    double theta = raw[k][3];
    if (!has_heading[k]) {
      theta = last;
      for (std::size_t n = k + 1; n < raw.size(); ++n) {
        const Vec2 d(raw[n][1] - raw[k][1], raw[n][2] - raw[k][2]);
        if (d.norm() > 1e-9) {
          theta = angle_of(d);
          break;
        }
      }
      if (k + 1 == raw.size() && k > 0) {
        const Vec2 d(raw[k][1] - raw[k - 1][1], raw[k][2] - raw[k - 1][2]);
        if (d.norm() > 1e-9) theta = angle_of(d);
      }
    }
    s.waypoints.push_back({raw[k][0], Pose(raw[k][1], raw[k][2], theta)});
    last = theta;
  }
  s.validate();
  return s;
}

void parse_perception(const json& j, PerceptionConfig& p) {
  read(j, "dimension", p.dimension);
  read(j, "noise_sigma", p.noise_sigma);
  read(j, "scale_drift", p.scale_drift);
  read(j, "reference_distance", p.reference_distance);
  read(j, "match_threshold", p.match_threshold);
  read(j, "temporal_capacity", p.temporal_capacity);
  read(j, "distance_bins", p.distance_bins);
  read(j, "bin_width", p.bin_width);
  read(j, "gate_distance", p.gate_distance);
  read(j, "velocity_window", p.velocity_window);
  read(j, "accel_psd", p.kalman.accel_psd);
  if (j.contains("measurement_sigma")) {
    const double s = j.at("measurement_sigma");
    p.kalman.measurement_cov = s * s * Eigen::Matrix2d::Identity();
  }
}

void parse_planner(const json& j, PlannerConfig& p) {
  read(j, "costmap_width", p.costmap.width);
  read(j, "costmap_resolution", p.costmap.resolution);
  read(j, "inflation", p.costmap.inflation);
  read(j, "min_fill", p.min_fill);
  read(j, "depth_limit", p.depth_limit);
  read(j, "candidate_cap", p.candidate_cap);
  read(j, "optimize_cap", p.optimize_cap);
  read(j, "trajectory_dt", p.trajectory_dt);
  read(j, "m_max", p.m_max);
  read(j, "margin", p.margin);
  read(j, "select_alpha", p.select_alpha);
  read(j, "replan_every", p.replan_every);
  read(j, "iterations", p.optimizer.iterations);
  read(j, "tol", p.optimizer.tol);
  read(j, "epsilon", p.optimizer.epsilon);
  read(j, "pursuit_kv", p.pursuit_kv);
  read(j, "pursuit_kw", p.pursuit_kw);
  if (j.contains("similarity")) {
    const std::string s = j.at("similarity");
    if (s == "agreement") {
      p.similarity = trajopt::SimilarityForm::Agreement;
    } else if (s == "literal") {
      p.similarity = trajopt::SimilarityForm::Literal;
    } else {
      throw ConfigError("similarity must be agreement or literal");
    }
  }
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    auto& ws = p.optimizer.weights;
    read(w, "obstacle", ws.obstacle);
    read(w, "dynamic", ws.dynamic);
    read(w, "kinematic", ws.kinematic);
    read(w, "accel", ws.accel);
    read(w, "goal", ws.goal);
    read(w, "velocity", ws.velocity);
  }
}

void parse_adaptation(const json& j, adapt::AdaptationParams& a) {
  read(j, "alpha_goal_line", a.alpha_goal_line);
  read(j, "alpha_nis", a.alpha_nis);
  read(j, "d_min", a.d_min);
  read(j, "d_max", a.d_max);
  read(j, "alpha_1", a.alpha_1);
  read(j, "alpha_2", a.alpha_2);
  read(j, "epsilon", a.epsilon);
  read(j, "retreat_trigger_speed", a.retreat_trigger_speed);
  read(j, "hysteresis_time", a.hysteresis_time);
  read(j, "goal_margin", a.goal_margin);
}

std::vector<Vec2> sample_path(const sim::LeaderScript& s, double spacing) {
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k + 1 < s.waypoints.size(); ++k) {
    const Vec2 a = s.waypoints[k].pose.position();
    const Vec2 b = s.waypoints[k + 1].pose.position();
    const int n = std::max(1, int(std::ceil((b - a).norm() / spacing)));
    for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * (double(i) / n));
  }
  pts.push_back(s.waypoints.back().pose.position());
  return pts;
}

ScenarioConfig parse_impl(const json& doc) {
  ScenarioConfig cfg;
  read(doc, "name", cfg.name);
  if (doc.contains("arena")) {
    const auto& a = doc.at("arena");
    cfg.arena = {a[0], a[1], a[2], a[3]};
  }
  if (doc.contains("robot_start")) {
    const auto& r = doc.at("robot_start");
    cfg.robot_start = Pose(r[0].get<double>(), r[1].get<double>(), r.size() > 2 ? r[2].get<double>() : 0.0);
  }
  if (doc.contains("robot")) {
    const auto& r = doc.at("robot");
    read(r, "v_max", cfg.robot.v_max_physical);
    read(r, "omega_max", cfg.robot.omega_max);
    read(r, "a_max", cfg.robot.a_max);
    read(r, "footprint_radius", cfg.robot.footprint_radius);
  }
  if (doc.contains("sensor")) {
    const auto& s = doc.at("sensor");
    read(s, "fov_half_angle", cfg.sensor.fov_half_angle);
    read(s, "range", cfg.sensor.range);
    read(s, "ray_count", cfg.sensor.ray_count);
    read(s, "scan_noise_sigma", cfg.sensor.scan_noise_sigma);
    read(s, "scan_fov_half_angle", cfg.sensor.scan_fov_half_angle);
  }
  int next_id = 0;
  if (doc.contains("obstacles")) {
    for (const auto& o : doc.at("obstacles")) cfg.obstacles.push_back(obstacle(o, next_id++));
  }

  const sim::LeaderScript base = leader(doc.at("leader"));
  if (doc.contains("random_discs")) {
    const auto& r = doc.at("random_discs");
    const auto& region = r.at("region");
    std::vector<Vec2> keep = sample_path(base, 0.25);
    keep.push_back(cfg.robot_start.position());
    const auto kind = sim::obstacle_kind_from_string(r.value("kind", "static"));
    auto discs = random_discs(r.at("count"), Vec2(region[0], region[1]), Vec2(region[2], region[3]),
                              r.at("radius")[0], r.at("radius")[1], r.value("seed", std::uint64_t(1)),
                              keep, r.value("clearance", 1.0), next_id, kind);
    next_id += int(discs.size());
    for (auto& d : discs) cfg.obstacles.push_back(std::move(d));
  }
  ScriptVariation variation;
  if (doc.contains("variation")) {
    const auto& v = doc.at("variation");
    read(v, "count", variation.count);
    read(v, "jitter", variation.jitter);
    read(v, "seed", variation.seed);
  }
  cfg.scripts = vary_script(base, cfg.obstacles, variation);
  if (doc.contains("extra_leaders")) {
    for (const auto& l : doc.at("extra_leaders")) cfg.extra_leaders.push_back(leader(l));
  }
  if (doc.contains("lighting")) {
    for (const auto& l : doc.at("lighting")) {
      const auto& r = l.at("region");
      cfg.lighting.push_back({r[0], r[1], r[2], r[3], l.at("factor")});
    }
  }
  if (doc.contains("switch")) {
    const auto& s = doc.at("switch");
    cfg.switch_command = SwitchCommand{s.at("time"), s.value("leader", std::size_t(1))};
  }
  read(doc, "repeats", cfg.repeats);
  read(doc, "seeds", cfg.seeds);
  if (doc.contains("variant")) cfg.variant = variant_from_string(doc.at("variant"));
  if (doc.contains("perception")) parse_perception(doc.at("perception"), cfg.perception);
  if (doc.contains("planner")) parse_planner(doc.at("planner"), cfg.planner);
  if (doc.contains("adaptation")) parse_adaptation(doc.at("adaptation"), cfg.adaptation);
  if (doc.contains("episode")) {
    const auto& e = doc.at("episode");
    read(e, "tick", cfg.episode.tick);
    read(e, "substep", cfg.episode.substep);
    read(e, "settle_time", cfg.episode.settle_time);
    read(e, "snapshot_every", cfg.episode.snapshot_every);
  }
  if (cfg.robot.v_max_physical < cfg.planner.optimizer.epsilon) {
    // Nothing to check; kept for symmetry with validate().
  }
  cfg.validate();
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  try {
    return parse_impl(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

std::vector<sim::LeaderScript> vary_script(const sim::LeaderScript& base,
                                           const std::vector<sim::Obstacle>& obstacles,
                                           const ScriptVariation& variation) {
  base.validate();
  std::vector<sim::LeaderScript> out{base};
  auto blocked = [&](const Vec2& a, const Vec2& b) {
    if (base.flies_over) return false;
    for (const auto& o : obstacles) {
      if (o.kind != sim::ObstacleKind::Static) continue;
      if (o.blocks_segment(a, b)) return true;
      if (o.distance_to(b) < base.radius + 0.1) return true;
    }
    return false;
  };
  for (int k = 1; k < variation.count; ++k) {
    std::mt19937_64 rng(variation.seed * 1000003ULL + std::uint64_t(k));
    std::uniform_real_distribution<double> u(-variation.jitter, variation.jitter);
    sim::LeaderScript s = base;
    s.identity = base.identity;
    for (std::size_t i = 1; i + 1 < s.waypoints.size(); ++i) {
      const Vec2 prev = s.waypoints[i - 1].pose.position();
      const Vec2 orig = base.waypoints[i].pose.position();
      const Vec2 next = base.waypoints[i + 1].pose.position();
      for (int attempt = 0; attempt < 8; ++attempt) {
        const Vec2 cand = orig + Vec2(u(rng), u(rng));
        if (!blocked(prev, cand) && !blocked(cand, next)) {
          s.waypoints[i].pose = Pose(cand, s.waypoints[i].pose.theta);
          break;
        }
      }
    }
    // Headings follow the perturbed direction of travel where they moved.
    for (std::size_t i = 0; i + 1 < s.waypoints.size(); ++i) {
      const Vec2 d = s.waypoints[i + 1].pose.position() - s.waypoints[i].pose.position();
      const Vec2 bd = base.waypoints[i + 1].pose.position() - base.waypoints[i].pose.position();
      if (d.norm() > 1e-6 && bd.norm() > 1e-6) {
        s.waypoints[i].pose.theta = normalize_angle(angle_of(d));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<sim::Obstacle> random_discs(int count, const Vec2& lo, const Vec2& hi,
                                        double r_min, double r_max, std::uint64_t seed,
                                        const std::vector<Vec2>& keep_clear,
                                        double clearance, int first_id, sim::ObstacleKind kind) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), ur(r_min, r_max);
  std::vector<sim::Obstacle> out;
  for (int attempt = 0; attempt < count * 50 && int(out.size()) < count; ++attempt) {
    const Vec2 c(ux(rng), uy(rng));
    const double r = ur(rng);
    bool ok = true;
    for (const auto& p : keep_clear) {
      if ((p - c).norm() < r + clearance) {
        ok = false;
        break;
      }
    }
    for (const auto& o : out) {
      const auto& d = std::get<sim::Disc>(o.shape);
      if ((d.center - c).norm() < d.radius + r + 0.2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    sim::Obstacle o;
    o.id = first_id + int(out.size());
    o.shape = sim::Disc{c, r};
    o.kind = kind;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace leadfollow::harness
