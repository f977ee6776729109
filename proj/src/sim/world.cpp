#include "leadfollow/sim/world.hpp"

#include <algorithm>
#include <limits>

#include "leadfollow/errors.hpp"

namespace leadfollow::sim {

const char* to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Static: return "static";
    case ObstacleKind::Dynamic: return "dynamic";
    case ObstacleKind::Overflyable: return "overflyable";
  }
  return "static";
}

ObstacleKind obstacle_kind_from_string(const std::string& s) {
  if (s == "static") return ObstacleKind::Static;
  if (s == "dynamic") return ObstacleKind::Dynamic;
  if (s == "overflyable") return ObstacleKind::Overflyable;
  throw ConfigError("unknown obstacle kind '" + s + "'");
}

Vec2 Obstacle::center() const {
  if (const auto* d = std::get_if<Disc>(&shape)) return d->center;
  return polygon_centroid(std::get<Polygon>(shape));
}

Polygon Obstacle::outline() const {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    return regular_polygon(d->center, d->radius, 24);
  }
  return std::get<Polygon>(shape);
}

double Obstacle::distance_to(const Vec2& p) const {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    return std::max(0.0, (p - d->center).norm() - d->radius);
  }
  const auto& poly = std::get<Polygon>(shape);
  if (point_in_polygon(poly, p)) return 0.0;
  return closest_boundary_point(poly, p).distance;
}

std::optional<double> Obstacle::raycast(const Vec2& origin,
                                        const Vec2& dir) const {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    return ray_circle(origin, dir, d->center, d->radius);
  }
  return ray_polygon(origin, dir, std::get<Polygon>(shape));
}

bool Obstacle::blocks_segment(const Vec2& a, const Vec2& b) const {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    return point_segment_distance(d->center, a, b) < d->radius;
  }
  const auto& poly = std::get<Polygon>(shape);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    if (segments_intersect(a, b, poly[k], poly[(k + 1) % poly.size()])) {
      return true;
    }
  }
  return point_in_polygon(poly, a);
}

void Obstacle::translate(const Vec2& delta) {
  if (auto* d = std::get_if<Disc>(&shape)) {
    d->center += delta;
    return;
  }
  for (auto& v : std::get<Polygon>(shape)) v += delta;
}

namespace {

void resample_velocity(Obstacle& ob) {
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  std::uniform_real_distribution<double> speed(ob.speed_min, ob.speed_max);
  const double a = heading(ob.rng);
  const double s = speed(ob.rng);
  ob.velocity = s * Vec2(std::cos(a), std::sin(a));
  ++ob.resample_count;
}

double bounding_radius(const Obstacle& ob) {
  if (const auto* d = std::get_if<Disc>(&ob.shape)) return d->radius;
  return bounding_circle(std::get<Polygon>(ob.shape)).radius;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Obstacle make_dynamic_disc(int id, Vec2 center, double radius,
                           std::uint64_t seed, double speed_min,
                           double speed_max, double resample_period) {
  Obstacle ob;
  ob.id = id;
  ob.shape = Disc{center, radius};
  ob.kind = ObstacleKind::Dynamic;
  ob.seed = seed;
  ob.speed_min = speed_min;
  ob.speed_max = speed_max;
  ob.resample_period = resample_period;
  ob.rng.seed(seed);
  resample_velocity(ob);
  ob.resample_count = 0;
  ob.next_resample = resample_period;
  return ob;
}

void LeaderScript::validate() const {
  if (waypoints.empty()) throw ConfigError("leader script has no waypoints");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].time > waypoints[i - 1].time)) {
      throw ConfigError("leader script times must strictly increase");
    }
  }
  if (!(radius > 0.0)) throw ConfigError("leader radius must be positive");
}

Pose LeaderScript::pose_at(double t) const {
  if (t <= waypoints.front().time) return waypoints.front().pose;
  if (t >= waypoints.back().time) return waypoints.back().pose;
  auto it = std::upper_bound(
      waypoints.begin(), waypoints.end(), t,
      [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double s = (t - a.time) / (b.time - a.time);
  const Vec2 p = a.pose.position() + s * (b.pose.position() - a.pose.position());
  const double dth = normalize_angle(b.pose.theta - a.pose.theta);
  return Pose(p, a.pose.theta + s * dth);
}

Vec2 LeaderScript::velocity_at(double t) const {
  if (t < waypoints.front().time || t >= waypoints.back().time) {
    return Vec2::Zero();
  }
  auto it = std::upper_bound(
      waypoints.begin(), waypoints.end(), t,
      [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  return (b.pose.position() - a.pose.position()) / (b.time - a.time);
}

double LeaderScript::end_time() const { return waypoints.back().time; }

void RobotModel::validate() const {
  if (!(v_max_physical > 0 && omega_max > 0 && a_max > 0 &&
        footprint_radius > 0)) {
    throw ConfigError("robot limits must be strictly positive");
  }
}

void SensorModel::validate() const {
  if (!(fov_half_angle > 0 && fov_half_angle <= kPi)) {
    throw ConfigError("fov_half_angle must lie in (0, pi]");
  }
  if (!(scan_fov_half_angle > 0 && scan_fov_half_angle <= kPi)) {
    throw ConfigError("scan_fov_half_angle must lie in (0, pi]");
  }
  if (!(range > 0)) throw ConfigError("sensor range must be positive");
  if (ray_count <= 0) throw ConfigError("ray_count must be positive");
  if (scan_noise_sigma < 0) throw ConfigError("scan noise must be >= 0");
}

Pose World::leader_pose(std::size_t index) const {
  return leaders.at(index).pose_at(time);
}

World step_world(World world, double dt) {
  world.time += dt;
  ++world.tick;
  for (auto& ob : world.obstacles) {
    if (ob.kind != ObstacleKind::Dynamic) continue;
    while (world.time >= ob.next_resample) {
      resample_velocity(ob);
      ob.next_resample += ob.resample_period;
    }
    ob.translate(ob.velocity * dt);
    // Keep the body inside the arena by reflecting off its walls.
    const double r = bounding_radius(ob);
    const Vec2 c = ob.center();
    Vec2 shift = Vec2::Zero();
    if (c.x() - r < world.arena.x_min) {
      shift.x() = world.arena.x_min - (c.x() - r);
      ob.velocity.x() = std::abs(ob.velocity.x());
    } else if (c.x() + r > world.arena.x_max) {
      shift.x() = world.arena.x_max - (c.x() + r);
      ob.velocity.x() = -std::abs(ob.velocity.x());
    }
    if (c.y() - r < world.arena.y_min) {
      shift.y() = world.arena.y_min - (c.y() - r);
      ob.velocity.y() = std::abs(ob.velocity.y());
    } else if (c.y() + r > world.arena.y_max) {
      shift.y() = world.arena.y_max - (c.y() + r);
      ob.velocity.y() = -std::abs(ob.velocity.y());
    }
    if (shift.squaredNorm() > 0) ob.translate(shift);
  }
  return world;
}

namespace {

bool within_fov(const Pose& robot, const Vec2& p, double half_angle) {
  const Vec2 d = p - robot.position();
  if (d.squaredNorm() == 0.0) return true;
  return std::abs(normalize_angle(angle_of(d) - robot.theta)) <=
         half_angle + 1e-12;
}

}  // namespace

double visible_fraction(const World& world, const Pose& robot,
                        const SensorModel& sensor, std::size_t target,
                        int samples, std::optional<int>* occluder) {
  const LeaderScript& script = world.leaders.at(target);
  const Pose lp = script.pose_at(world.time);
  const Vec2 origin = robot.position();
  int seen = 0;
  for (int k = 0; k < samples; ++k) {
    const double a = 2.0 * kPi * k / samples;
    const Vec2 s = lp.position() + script.radius * Vec2(std::cos(a), std::sin(a));
    if (!within_fov(robot, s, sensor.fov_half_angle)) continue;
    if ((s - origin).norm() > sensor.range) continue;
    bool blocked = false;
    for (const auto& ob : world.obstacles) {
      if (ob.kind == ObstacleKind::Overflyable) continue;
      if (ob.blocks_segment(origin, s)) {
        blocked = true;
        if (occluder && !occluder->has_value()) *occluder = ob.id;
        break;
      }
    }
    if (!blocked) {
      for (std::size_t j = 0; j < world.leaders.size() && !blocked; ++j) {
        if (j == target) continue;
        const Vec2 c = world.leaders[j].pose_at(world.time).position();
        if (point_segment_distance(c, origin, s) < world.leaders[j].radius) {
          blocked = true;
        }
      }
    }
    if (!blocked) ++seen;
  }
  return double(seen) / double(samples);
}

SenseResult sense(const World& world, const Pose& robot,
                  const SensorModel& sensor, std::size_t target,
                  int outline_samples) {
  SenseResult out;
  const Vec2 origin = robot.position();
  std::mt19937_64 rng(mix_seed(world.noise_seed, world.tick));
  std::normal_distribution<double> noise(0.0, 1.0);
  const bool have_target = target < world.leaders.size();

  std::vector<Vec2> leader_centers;
  for (const auto& l : world.leaders) {
    leader_centers.push_back(l.pose_at(world.time).position());
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (int k = 0; k < sensor.ray_count; ++k) {
    const double rel = -sensor.scan_fov_half_angle +
                       2.0 * sensor.scan_fov_half_angle * (k + 0.5) /
                           sensor.ray_count;
    const double ang = robot.theta + rel;
    const Vec2 dir(std::cos(ang), std::sin(ang));

    double t_block = inf, t_over = inf, t_target = inf;
    int id_block = -1, id_over = -1;
    HitKind kind_block = HitKind::Obstacle;
    for (const auto& ob : world.obstacles) {
      auto t = ob.raycast(origin, dir);
      if (!t) continue;
      if (ob.kind == ObstacleKind::Overflyable) {
        if (*t < t_over) { t_over = *t; id_over = ob.id; }
      } else if (*t < t_block) {
        t_block = *t;
        id_block = ob.id;
        kind_block = HitKind::Obstacle;
      }
    }
    for (std::size_t j = 0; j < world.leaders.size(); ++j) {
      auto t = ray_circle(origin, dir, leader_centers[j], world.leaders[j].radius);
      if (!t) continue;
      if (have_target && j == target) {
        t_target = *t;
      } else if (*t < t_block) {
        t_block = *t;
        id_block = static_cast<int>(j);
        kind_block = HitKind::Leader;
      }
    }
    // Environment return (nearest of solid and short obstacles).
    const bool over_first = t_over < t_block;
    const double t_env = over_first ? t_over : t_block;
    const int id_env = over_first ? id_over : id_block;
    const HitKind kind_env = over_first ? HitKind::Obstacle : kind_block;
    // Short obstacles never hide the leader.
    const bool target_hit = t_target < t_block && t_target <= sensor.range;

    auto noisy = [&](double t) {
      return Vec2(origin + (t + sensor.scan_noise_sigma * noise(rng)) * dir);
    };
    if (t_env <= sensor.range && t_env < t_target) {
      out.scan.push_back({noisy(t_env), kind_env, id_env});
    }
    if (target_hit) {
      const Vec2 p = noisy(t_target);
      if (std::abs(rel) <= sensor.fov_half_angle + 1e-12) {
        out.observation.point_set.push_back(p);
      } else {
        out.scan.push_back({p, HitKind::Leader, static_cast<int>(target)});
      }
    }
  }

  if (!have_target) return out;
  auto& obs = out.observation;
  const Vec2 lc = leader_centers[target];
  obs.in_fov = (lc - origin).norm() <= sensor.range &&
               within_fov(robot, lc, sensor.fov_half_angle);
  obs.visible_fraction = visible_fraction(world, robot, sensor, target,
                                          outline_samples, &obs.occluder_id);
  obs.visible = obs.in_fov && obs.visible_fraction > 0.0 &&
                !obs.point_set.empty();
  if (!obs.in_fov) {
    // Hits on a leader outside the camera cone cannot be segmented.
    for (const auto& p : obs.point_set) {
      out.scan.push_back({p, HitKind::Leader, static_cast<int>(target)});
    }
    obs.point_set.clear();
    obs.visible = false;
  }
  return out;
}

Vec2 mean_point(std::span<const Vec2> pts) {
  Vec2 m = Vec2::Zero();
  for (const auto& p : pts) m += p;
  return pts.empty() ? m : Vec2(m / double(pts.size()));
}

LeaderMeanState leader_mean_state(std::span<const TimedObservation> history,
                                  double window) {
  if (history.empty()) throw NoVisibleLeader("empty observation history");
  const double now = history.back().time;
  const TimedObservation* latest = nullptr;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (it->time < now - window - 1e-9) break;
    if (it->observation.visible && !it->observation.point_set.empty()) {
      latest = &*it;
      break;
    }
  }
  if (!latest) throw NoVisibleLeader("no visible observation in window");

  LeaderMeanState st;
  st.position = mean_point(latest->observation.point_set);
  const TimedObservation* ref = nullptr;
  for (const auto& h : history) {
    if (h.time < latest->time - window - 1e-9) continue;
    if (h.observation.visible && !h.observation.point_set.empty()) {
      ref = &h;
      break;
    }
  }
  if (ref && ref->time < latest->time) {
    st.velocity = (st.position - mean_point(ref->observation.point_set)) /
                  (latest->time - ref->time);
  }
  return st;
}

bool leader_collides(const World& world, std::size_t leader) {
  const auto& script = world.leaders.at(leader);
  const Vec2 c = script.pose_at(world.time).position();
  for (const auto& ob : world.obstacles) {
    if (script.flies_over && ob.kind == ObstacleKind::Overflyable) continue;
    if (ob.distance_to(c) < script.radius) return true;
  }
  return false;
}

bool robot_collides(const World& world, const Pose& robot, double radius) {
  const Vec2 p = robot.position();
  for (const auto& ob : world.obstacles) {
    if (ob.distance_to(p) < radius) return true;
  }
  for (const auto& l : world.leaders) {
    if (l.flies_over) continue;
    if ((l.pose_at(world.time).position() - p).norm() < radius + l.radius) {
      return true;
    }
  }
  return false;
}

}  // namespace leadfollow::sim
