#include "leadfollow/harness/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "leadfollow/errors.hpp"
#include "leadfollow/topo/graph.hpp"
#include "leadfollow/topo/homotopy.hpp"
#include "leadfollow/trajopt/optimizer.hpp"
#include "leadfollow/trajopt/select.hpp"

namespace leadfollow::harness {

namespace {

// Previous-tick groups match current ones within this centroid distance.
constexpr double kAlignTolerance = 1.0;
// Speed caps below this would make seed resampling degenerate.
constexpr double kMinPlanSpeed = 0.1;

double goal_epsilon(const GoalConstraint& g, double fallback) {
  if (const auto* pp = std::get_if<PointPoseGoal>(&g)) return pp->epsilon;
  if (const auto* arc = std::get_if<ArcSetGoal>(&g)) return arc->epsilon;
  return fallback;
}

}  // namespace

std::pair<double, double> arc_to(const Pose& from, const Pose& to, double duration) {
  const Vec2 local = from.to_local(to.position());
  const double chord = local.norm();
  if (chord < 1e-3) return {0.0, normalize_angle(to.theta - from.theta) / duration};
  // Circular arc tangent to the current heading; reversing mirrors the frame.
  const bool reverse = local.x() < 0.0;
  const double turn = reverse ? 2.0 * std::atan2(-local.y(), -local.x())
                              : 2.0 * std::atan2(local.y(), local.x());
  const double half = 0.5 * std::abs(turn);
  const double length = half < 1e-9 ? chord : chord * half / std::sin(half);
  return {(reverse ? -length : length) / duration, turn / duration};
}

std::vector<Vec2> goal_shape(const GoalConstraint& g) {
  if (const auto* pp = std::get_if<PointPoseGoal>(&g)) return {pp->pose.position()};
  if (const auto* ls = std::get_if<LineSetGoal>(&g)) return {ls->start, ls->end};
  const auto& arc = std::get<ArcSetGoal>(g);
  std::vector<Vec2> pts;
  const int n = std::max(2, int(std::ceil(arc.span / 0.1)));
  for (int k = 0; k <= n; ++k) pts.push_back(arc.point_at(arc.start_angle + arc.span * k / n));
  return pts;
}

Vec2 push_out_of_hulls(Vec2 p, std::span<const topo::ObstacleGroup> groups, double clearance) {
  for (int pass = 0; pass < 4; ++pass) {
    bool moved = false;
    for (const auto& g : groups) {
      Vec2 grad;
      const double sd = signed_distance(g.boundary, p, &grad);
      if (sd < clearance && grad.norm() > 0.5) {
        p += (clearance - sd + 1e-3) * grad.normalized();
        moved = true;
      }
    }
    if (!moved) break;
  }
  return p;
}

FollowerStack::FollowerStack(const ScenarioConfig& cfg, Variant variant, std::uint64_t seed,
                             const std::vector<sim::LeaderScript>& leaders)
    : cfg_(cfg),
      variant_(variant),
      rng_(seed * 0x9E3779B97F4A7C15ULL + 17),
      tb_(cfg.perception.temporal_capacity),
      dfb_(cfg.perception.bin_width, cfg.perception.distance_bins),
      machine_(cfg.adaptation) {
  const auto& p = cfg.perception;
  for (const auto& s : leaders) {
    auto app = perception::make_appearance(s.appearance_seed, p.dimension, p.noise_sigma,
                                           p.scale_drift, p.reference_distance, cfg.sensor.range);
    app.lighting_field = cfg.lighting;
    appearance_.push_back(std::move(app));
  }
}

void FollowerStack::command_switch(const sim::World& world, std::size_t leader,
                                   const Pose& robot, double time) {
  if (leader >= appearance_.size()) throw ConfigError("switch target out of range");
  target_ = leader;
  const auto first = perception::prompt_embedding(
      appearance_[leader], world.leader_pose(leader).position(), robot, time, rng_);
  auto reset = adapt::switching_reset(tb_, dfb_, first, {});
  tb_ = std::move(reset.temporal);
  dfb_ = std::move(reset.distance);
  if (!uses_dfb()) dfb_.clear();
  track_ = {};
  tracking_ = false;
  last_embedding_.reset();
  history_.clear();
  plan_.reset();
  prev_signature_.reset();
  prev_centroids_.clear();
  // The very first assignment is not a switch.
  pending_switch_ = time > 0.0;
}

TickOutput FollowerStack::tick(const sim::World& world, const Pose& robot, double speed,
                               bool want_snapshot) {
  TickOutput out;
  const double time = world.time;
  const double dt = cfg_.episode.tick;
  const auto& pc = cfg_.perception;

  // Perception and identification.
  const auto sensed = sim::sense(world, robot, cfg_.sensor, target_);
  const auto& obs = sensed.observation;
  out.visible = obs.visible;
  Vec2 pbar = Vec2::Zero();
  bool identified = false;
  if (obs.visible) {
    pbar = sim::mean_point(obs.point_set);
    const auto e = perception::synthesize_embedding(appearance_[target_], obs, robot, time, rng_);
    const bool gated = tracking_ && track_.initialized && last_embedding_ &&
                       (pbar - (track_.position() + dt * track_.velocity())).norm() <
                           pc.gate_distance;
    if (gated) {
      identified = true;
      out.score = perception::cosine_similarity(e.vector, last_embedding_->vector);
    } else {
      const auto m = perception::match_leader(e, tb_, dfb_, pc.match_threshold);
      identified = m.matched;
      out.score = m.score;
    }
    if (identified) {
      tb_.insert(e);
      if (uses_dfb()) dfb_.insert(e);
      last_embedding_ = e;
    }
  }
  out.identified = identified;
  tracking_ = identified;

  Vec2 leader_vel = Vec2::Zero();
  if (identified) {
    track_ = perception::kf_predict_update(track_, pbar, dt, pc.kalman);
    history_.push_back({time, obs});
    while (!history_.empty() && history_.front().time < time - 2.0 * pc.velocity_window - 1e-9) {
      history_.erase(history_.begin());
    }
    const auto ms = sim::leader_mean_state(history_, pc.velocity_window);
    leader_vel = ms.velocity;
    track_ = perception::record_last_seen(track_, ms.position, ms.velocity, time);
  } else {
    if (track_.initialized) track_ = perception::kf_predict_update(track_, std::nullopt, dt, pc.kalman);
    history_.clear();
  }

  // Costmap, with dynamic obstacles handed to the optimizer instead.
  std::vector<Vec2> scan;
  std::vector<trajopt::DynamicObstacle> dynamic;
  std::vector<int> seen_dynamic;
  for (const auto& sp : sensed.scan) {
    if (sp.kind == sim::HitKind::Obstacle) {
      const auto it = std::find_if(world.obstacles.begin(), world.obstacles.end(),
                                   [&](const sim::Obstacle& o) { return o.id == sp.index; });
      if (it != world.obstacles.end() && it->kind == sim::ObstacleKind::Dynamic) {
        const auto& ob = *it;
        if (std::find(seen_dynamic.begin(), seen_dynamic.end(), sp.index) == seen_dynamic.end()) {
          seen_dynamic.push_back(sp.index);
          const double r = ob.is_disc() ? std::get<sim::Disc>(ob.shape).radius : 0.5;
          dynamic.push_back({ob.center(), ob.velocity, r + cfg_.robot.footprint_radius});
        }
        continue;
      }
    }
    scan.push_back(sp.point);
  }
  std::vector<Vec2> leader_points;
  if (identified) {
    leader_points = obs.point_set;
    dynamic.push_back({pbar, leader_vel,
                       world.leaders[target_].radius + cfg_.robot.footprint_radius});
  } else if (obs.visible) {
    scan.insert(scan.end(), obs.point_set.begin(), obs.point_set.end());
  }
  const auto map = topo::build_costmap(scan, leader_points, robot, cfg_.planner.costmap);
  // Only the robot is kept free: splitting a group around the leader would
  // open a corridor through a real obstacle when the leader hovers above it.
  // When the robot cell itself is occupied, keeping it free would cut a
  // corridor through the obstacle; the hull stays whole and the robot backs out.
  const auto robot_cell = map.cell_at(robot.position());
  const bool escape = robot_cell && map.occupied(*robot_cell);
  std::vector<Vec2> keep_free;
  if (!escape) keep_free.push_back(robot.position());
  const auto groups =
      topo::split_groups(topo::cluster_groups(map), map, keep_free, cfg_.planner.min_fill);

  // Adaptation.
  const auto& ap = cfg_.adaptation;
  const double safe = adapt::safe_distance(track_.nis, ap);
  adapt::TransitionFlags flags;
  flags.in_fov = obs.in_fov;
  flags.identified = identified;
  flags.in_costmap = identified && map.contains(pbar);
  flags.distance = identified ? (pbar - robot.position()).norm() : 0.0;
  flags.leader_approaching =
      identified && adapt::leader_approaching(leader_vel, pbar, robot.position(), safe, ap);
  flags.new_leader_command = pending_switch_;
  pending_switch_ = false;
  const auto state = machine_.step(flags, time, &events_);
  out.state = state;
  out.safe_distance = safe;

  const double v_max = cfg_.robot.v_max_physical;
  if (variant_ == Variant::Pursuit) {
    out.v_cap = v_max;
    pursuit_command(robot, identified, pbar, safe, out);
    return out;
  }

  // Goal sets per state.
  std::vector<GoalConstraint> goals;
  double v_cap = v_max;
  const bool follow_like = identified && (state == adapt::FollowState::Following ||
                                          state == adapt::FollowState::Retreating);
  auto approach_point = [&]() {
    const Vec2 d = robot.position() - pbar;
    const Vec2 u = d.norm() > 1e-9 ? Vec2(d.normalized()) : Vec2(-robot.heading());
    return push_out_of_hulls(pbar + safe * u, groups, ap.goal_margin);
  };
  // A visible but unidentified body near the last-seen position is most
  // likely the leader itself, so that goal stops one contact distance short.
  const double contact =
      world.leaders[target_].radius + cfg_.robot.footprint_radius + ap.goal_margin;
  auto short_of = [&](const Vec2& p) {
    if (!obs.visible || (sim::mean_point(obs.point_set) - p).norm() > contact) return p;
    const Vec2 d = p - robot.position();
    const double n = d.norm();
    return n > contact ? Vec2(p - d * (contact / n)) : robot.position();
  };
  if (escape) {
    const Vec2 p = push_out_of_hulls(robot.position(), groups, cfg_.planner.margin + 0.05);
    goals.push_back(PointPoseGoal{Pose(p, 0.0), ap.epsilon, false});
  } else if (variant_ == Variant::NoGraph) {
    if (identified) {
      v_cap = adapt::speed_cap(leader_vel, pbar, robot.position(), ap, v_max);
      goals.push_back(PointPoseGoal{Pose(approach_point(), 0.0), ap.epsilon, false});
    } else if (track_.last_seen_pose) {
      const Vec2 p =
          push_out_of_hulls(short_of(track_.last_seen_pose->position()), groups, ap.goal_margin);
      goals.push_back(PointPoseGoal{Pose(p, 0.0), ap.epsilon, false});
    }
  } else if (follow_like) {
    v_cap = adapt::speed_cap(leader_vel, pbar, robot.position(), ap, v_max);
    try {
      if (state == adapt::FollowState::Retreating) {
        goals.push_back(adapt::retreating_goal(pbar, safe, groups, robot.position(), ap));
      } else {
        for (auto& a : adapt::following_goal(pbar, safe, groups, ap, robot.position())) {
          goals.push_back(a);
        }
      }
    } catch (const NoFreeArc&) {
      const Vec2 p = approach_point();
      goals.push_back(PointPoseGoal{Pose(p, angle_of(pbar - p)), ap.epsilon, true});
    }
  } else if (identified && state == adapt::FollowState::Chasing) {
    try {
      for (auto& l : adapt::chasing_goal(robot.position(), pbar, map, groups, ap)) {
        goals.push_back(l);
      }
    } catch (const LeaderInsideMap&) {
    }
    if (goals.empty()) {
      const Vec2 p = approach_point();
      goals.push_back(PointPoseGoal{Pose(p, angle_of(pbar - p)), ap.epsilon, false});
    }
  } else {
    try {
      auto g = adapt::planning_goal(track_, ap);
      const Vec2 seen = g.pose.position();
      const Vec2 stop = short_of(seen);
      // Stopping short, the robot faces the body instead of copying its heading.
      const double heading = stop == seen ? g.pose.theta : angle_of(seen - stop);
      g.pose = Pose(push_out_of_hulls(stop, groups, ap.goal_margin), heading);
      goals.push_back(g);
    } catch (const NeverSeen&) {
    }
  }
  v_cap = std::max(v_cap, kMinPlanSpeed);
  out.v_cap = v_cap;

  PlannerSnapshot snap;
  snap.time = time;
  const bool replan = escape || !plan_ || ++ticks_since_plan_ >= cfg_.planner.replan_every;
  if (goals.empty()) {
    plan_.reset();
  } else if (replan) {
    ticks_since_plan_ = 0;
    trajopt::ConstraintSet cs;
    for (const auto& g : groups) cs.static_groups.push_back(g.boundary);
    cs.margin = cfg_.planner.margin;
    cs.dynamic_obstacles = dynamic;
    cs.v_cap = v_cap;
    cs.v_max_physical = v_max;
    cs.a_max = cfg_.robot.a_max;
    cs.initial_speed = std::clamp(std::abs(speed), 0.0, v_max);
    if (escape || variant_ == Variant::NoGraph) {
      plan_straight(robot, speed, goals.front(), cs, time);
    } else {
      plan_full(robot, speed, groups, goals, cs, time, want_snapshot ? &snap : nullptr, out);
    }
  }

  if (plan_) {
    const auto& tr = plan_->traj;
    const double elapsed = time - plan_->created;
    const int k = 1 + int(std::floor(elapsed / tr.dt + 1e-9));
    if (k <= tr.segments()) {
      const auto cmd = arc_to(robot, tr.poses[std::size_t(k)], std::max(k * tr.dt - elapsed, dt));
      // Braking envelope: the robot can still stop at the end of the plan.
      double rest = (tr.poses[std::size_t(k)].position() - robot.position()).norm();
      for (int j = k; j < tr.segments(); ++j) {
        rest += (tr.poses[std::size_t(j + 1)].position() - tr.poses[std::size_t(j)].position()).norm();
      }
      const double v_stop = std::sqrt(2.0 * cfg_.robot.a_max * rest);
      double scale = std::abs(cmd.first) > v_stop ? v_stop / std::abs(cmd.first) : 1.0;
      // Saturating omega alone would straighten the arc; slow down instead.
      if (std::abs(cmd.second) * scale > cfg_.robot.omega_max) {
        scale = cfg_.robot.omega_max / std::abs(cmd.second);
      }
      out.v = cmd.first * scale;
      out.omega = cmd.second * scale;
    }
    out.signature = tr.signature;
  }
  if (want_snapshot) {
    for (const auto& g : groups) snap.hulls.push_back(g.boundary);
    for (const auto& g : goals) snap.goal_shapes.push_back(goal_shape(g));
    if (plan_) snap.selected = plan_->traj.positions();
    out.snapshot = std::move(snap);
  }
  return out;
}

void FollowerStack::plan_straight(const Pose& robot, double /*speed*/, const GoalConstraint& goal,
                                  trajopt::ConstraintSet cs, double time) {
  const Vec2 start = robot.position();
  const Vec2 end = nearest_goal_point(goal, start);
  const Vec2 d = end - start;
  const double len = d.norm();
  const int m = std::clamp(int(std::ceil(len / (cs.v_cap * cfg_.planner.trajectory_dt))), 2,
                           cfg_.planner.m_max);
  const double heading = len > 1e-9 ? angle_of(d) : robot.theta;
  const double end_heading =
      goal_heading(goal, end, len > 1e-9 ? Vec2(d / len) : robot.heading());
  Trajectory seed;
  seed.dt = cfg_.planner.trajectory_dt;
  for (int i = 0; i <= m; ++i) {
    const double th = i == 0 ? robot.theta : (i == m ? end_heading : heading);
    seed.poses.emplace_back(start + d * (double(i) / m), th);
  }
  cs.goal = goal;
  try {
    plan_ = Plan{trajopt::optimize_unchecked(seed, cs, cfg_.planner.optimizer), time};
  } catch (const Error&) {
    plan_.reset();
  }
}

void FollowerStack::plan_full(const Pose& robot, double speed,
                              const std::vector<topo::ObstacleGroup>& groups,
                              const std::vector<GoalConstraint>& goals, trajopt::ConstraintSet cs,
                              double time, PlannerSnapshot* snap, TickOutput& /*out*/) {
  const auto& pl = cfg_.planner;
  std::vector<Trajectory> seeds;
  try {
    const auto graph = topo::build_graph(groups, robot, goals);
    const auto gts = topo::enumerate_generalized(graph, pl.depth_limit, pl.enumerate);
    topo::ExpandOptions eo;
    eo.v_cap = cs.v_cap;
    eo.dt = pl.trajectory_dt;
    eo.m_max = pl.m_max;
    eo.margin = pl.margin + 0.05;
    for (const auto& gt : gts) {
      for (auto& t : topo::expand_detours(gt, graph, groups, robot, goals, eo)) {
        seeds.push_back(std::move(t));
      }
    }
  } catch (const NoPath&) {
  } catch (const DegenerateGeometry&) {
  }
  seeds = topo::dedup_by_signature(std::move(seeds));
  if (snap) {
    for (const auto& s : seeds) snap->candidates.push_back(s.positions());
  }
  if (seeds.size() > pl.candidate_cap) seeds.resize(pl.candidate_cap);

  std::optional<HomotopySignature> prev;
  if (prev_signature_) {
    prev = trajopt::align_signature(*prev_signature_, prev_centroids_, groups, kAlignTolerance);
  }
  // The seed closest to the previous class always reaches the optimizer, so
  // the similarity term in selection has something to hold on to.
  if (prev && seeds.size() > pl.optimize_cap && pl.optimize_cap > 0) {
    std::size_t best = 0;
    int best_miss = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto& v = seeds[i].signature.values;
      int miss = 0;
      for (std::size_t j = 0; j < prev->values.size() && j < v.size(); ++j) {
        if (prev->values[j] != 0 && v[j] != prev->values[j]) ++miss;
      }
      if (miss < best_miss) {
        best_miss = miss;
        best = i;
      }
    }
    if (best >= pl.optimize_cap) std::swap(seeds[pl.optimize_cap - 1], seeds[best]);
  }

  std::vector<Trajectory> feasible, near_goal;
  std::size_t optimized = 0;
  for (const auto& seed : seeds) {
    if (optimized >= pl.optimize_cap) break;
    ++optimized;
    const auto& goal = goals[std::size_t(seed.goal_index)];
    cs.goal = goal;
    try {
      Trajectory t = trajopt::optimize_unchecked(seed, cs, pl.optimizer);
      t.goal_index = seed.goal_index;
      t.signature = topo::signature(t, groups);
      if (t.signature != seed.signature) continue;
      if (trajopt::min_clearance(t, cs) < -1e-6) continue;
      const auto ge = trajopt::goal_error(t, goal);
      const double eps = goal_epsilon(goal, pl.optimizer.epsilon);
      if (ge.position <= 3.0 * eps && ge.heading <= 3.0 * eps) {
        feasible.push_back(std::move(t));
      } else {
        near_goal.push_back(std::move(t));
      }
    } catch (const Error&) {
    }
  }
  const auto& pool = feasible.empty() ? near_goal : feasible;
  if (pool.empty()) {
    // Nearest goal set, straight seed.
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < goals.size(); ++i) {
      const double d = (nearest_goal_point(goals[i], robot.position()) - robot.position()).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    plan_straight(robot, speed, goals[best], cs, time);
    if (plan_) {
      try {
        plan_->traj.signature = topo::signature(plan_->traj, groups);
      } catch (const DegenerateGeometry&) {
      }
    }
    prev_signature_.reset();
    return;
  }
  const auto idx = trajopt::select_index(pool, prev, pl.select_alpha, pl.similarity);
  plan_ = Plan{pool[idx], time};
  prev_signature_ = pool[idx].signature;
  prev_centroids_.clear();
  for (const auto& g : groups) prev_centroids_.push_back(g.centroid);
}

void FollowerStack::pursuit_command(const Pose& robot, bool identified, const Vec2& leader,
                                    double safe_dist, TickOutput& out) const {
  const auto& pl = cfg_.planner;
  Vec2 target;
  double stop_at = 0.0;
  if (identified) {
    target = leader;
    stop_at = safe_dist;
  } else if (track_.last_seen_pose) {
    target = track_.last_seen_pose->position();
    stop_at = cfg_.adaptation.epsilon;
  } else {
    return;
  }
  const Vec2 d = target - robot.position();
  const double dist = d.norm();
  const double err = dist > 1e-9 ? normalize_angle(angle_of(d) - robot.theta) : 0.0;
  out.v = pl.pursuit_kv * (dist - stop_at) * std::max(0.0, std::cos(err));
  if (!identified && dist <= stop_at) {
    out.v = 0.0;
    out.omega = pl.pursuit_kw * normalize_angle(track_.last_seen_pose->theta - robot.theta);
    return;
  }
  out.omega = pl.pursuit_kw * err;
}

}  // namespace leadfollow::harness
