#include "leadfollow/topo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "leadfollow/errors.hpp"
#include "leadfollow/topo/homotopy.hpp"

namespace leadfollow::topo {

int TopoGraph::goal_count() const {
  int n = 0;
  for (const auto& node : nodes) n += node.kind == NodeKind::Goal ? 1 : 0;
  return n;
}

bool TopoGraph::has_edge(int a, int b) const {
  return edges.count({std::min(a, b), std::max(a, b)}) > 0;
}

TopoEdge TopoGraph::edge(int a, int b) const {
  const TopoEdge& e = edges.at({std::min(a, b), std::max(a, b)});
  return e.a == a ? e : e.reversed();
}

std::vector<int> TopoGraph::neighbors(int node) const {
  std::vector<int> out;
  for (const auto& [key, e] : edges) {
    if (key.first == node) out.push_back(key.second);
    if (key.second == node) out.push_back(key.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TopoGraph build_graph(std::span<const ObstacleGroup> groups, const Pose& robot,
                      std::span<const GoalConstraint> goal_sets) {
  TopoGraph g;
  const Vec2 rp = robot.position();
  g.nodes.push_back({NodeKind::Robot, 0, rp});
  for (std::size_t i = 0; i < goal_sets.size(); ++i) {
    g.nodes.push_back({NodeKind::Goal, int(i), nearest_goal_point(goal_sets[i], rp)});
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    g.nodes.push_back({NodeKind::Obstacle, int(i), groups[i].centroid});
    g.hulls.push_back(groups[i].boundary);
  }
  std::vector<BoundingCircle> circles;
  for (const auto& h : g.hulls) circles.push_back(bounding_circle(h));

  const int n = int(g.nodes.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const TopoNode& na = g.nodes[a];
      const TopoNode& nb = g.nodes[b];
      // Goal sets are alternatives; paths never pass from one to another.
      if (na.kind == NodeKind::Goal && nb.kind == NodeKind::Goal) continue;
      const bool ha = na.kind == NodeKind::Obstacle;
      const bool hb = nb.kind == NodeKind::Obstacle;
      Vec2 from, to;
      if (ha && hb) {
        std::tie(from, to) = closest_points(g.hulls[na.ref], g.hulls[nb.ref]);
      } else if (ha) {
        to = nb.anchor;
        from = closest_boundary_point(g.hulls[na.ref], to).point;
      } else if (hb) {
        from = na.anchor;
        to = closest_boundary_point(g.hulls[nb.ref], from).point;
      } else {
        from = na.anchor;
        to = nb.anchor;
      }
      bool clear = true;
      for (std::size_t k = 0; k < g.hulls.size() && clear; ++k) {
        if ((ha && na.ref == int(k)) || (hb && nb.ref == int(k))) continue;
        if (point_segment_distance(circles[k].center, from, to) > circles[k].radius) continue;
        clear = !segment_crosses_interior(g.hulls[k], from, to, kEdgeTolerance);
      }
      if (clear) g.edges[{a, b}] = TopoEdge{a, b, from, to};
    }
  }
  return g;
}

int GeneralizedTrajectory::goal_index(const TopoGraph& graph) const {
  return graph.nodes[nodes.back()].ref;
}

std::vector<int> GeneralizedTrajectory::groups(const TopoGraph& graph) const {
  std::vector<int> out;
  for (std::size_t k = 1; k + 1 < nodes.size(); ++k) out.push_back(graph.nodes[nodes[k]].ref);
  return out;
}

double GeneralizedTrajectory::edge_length() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.length();
  return total;
}

namespace {

struct Search {
  const TopoGraph& graph;
  int depth_limit;
  const EnumerateOptions& opts;
  double bound = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> adjacency;
  std::vector<char> visited;
  GeneralizedTrajectory current;
  double length = 0.0;
  std::vector<GeneralizedTrajectory> out;

  bool full() const { return opts.max_paths > 0 && out.size() >= opts.max_paths; }

  double to_goal(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& node : graph.nodes) {
      if (node.kind == NodeKind::Goal) best = std::min(best, (node.anchor - p).norm());
    }
    return best;
  }

  void visit(int node, int intermediates) {
    for (int nb : adjacency[node]) {
      if (full()) return;
      if (visited[nb]) continue;
      const TopoNode& next = graph.nodes[nb];
      if (next.kind == NodeKind::Robot) continue;
      const TopoEdge e = graph.edge(node, nb);
      const double len = length + e.length();
      if (next.kind == NodeKind::Goal) {
        if (len > bound) continue;
        GeneralizedTrajectory gt = current;
        gt.nodes.push_back(nb);
        gt.edges.push_back(e);
        out.push_back(std::move(gt));
        continue;
      }
      if (intermediates >= depth_limit) continue;
      if (len + to_goal(e.to) > bound) continue;
      visited[nb] = 1;
      current.nodes.push_back(nb);
      current.edges.push_back(e);
      const double saved = length;
      length = len;
      visit(nb, intermediates + 1);
      length = saved;
      current.nodes.pop_back();
      current.edges.pop_back();
      visited[nb] = 0;
    }
  }
};

}  // namespace

std::vector<GeneralizedTrajectory> enumerate_generalized(
    const TopoGraph& graph, int depth_limit, const EnumerateOptions& opts) {
  if (depth_limit < 1) throw ConfigError("depth_limit must be at least 1");
  Search s{graph, depth_limit, opts, std::numeric_limits<double>::infinity(), {}, {}, {}, 0.0, {}};
  s.adjacency.resize(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) s.adjacency[i] = graph.neighbors(int(i));
  s.visited.assign(graph.nodes.size(), 0);
  if (opts.length_factor > 0.0 && !graph.nodes.empty()) {
    s.bound = opts.length_factor * s.to_goal(graph.nodes[0].anchor) + opts.length_slack;
  }
  s.visited[0] = 1;
  s.current.nodes.push_back(0);
  s.visit(0, 0);
  if (s.out.empty()) throw NoPath("no goal node reachable from the robot");
  return std::move(s.out);
}

namespace {

Vec2 unit_or(const Vec2& v, const Vec2& fallback) {
  const double n = v.norm();
  return n > 1e-12 ? Vec2(v / n) : fallback;
}

Vec2 miter_vertex(const Polygon& hull, std::size_t j, double margin) {
  const std::size_t n = hull.size();
  const Vec2 n1 = outward_normal(hull, (j + n - 1) % n);
  const Vec2 n2 = outward_normal(hull, j);
  const double denom = std::max(1.0 + n1.dot(n2), 0.25);
  return hull[j] + margin * (n1 + n2) / denom;
}

// Boundary position as (edge, t) normalized so that vertex hits sit at t = 0
// (at_start) or t = 1 of the preceding edge (otherwise).
std::pair<int, double> locate(const Polygon& hull, const Vec2& p, bool at_start) {
  const int n = int(hull.size());
  BoundaryPoint bp = closest_boundary_point(hull, p);
  int e = bp.edge;
  double t = bp.t;
  if (at_start && t >= 1.0 - 1e-9) {
    e = (e + 1) % n;
    t = 0.0;
  } else if (!at_start && t <= 1e-9) {
    e = (e + n - 1) % n;
    t = 1.0;
  }
  return {e, t};
}

// Offset hull vertices visited when walking from entry to exit.
void walk_hull(const Polygon& hull, const Vec2& entry, const Vec2& exit,
               Rotation dir, double margin, std::vector<Vec2>& out) {
  const int n = int(hull.size());
  if (n < 2 || (entry - exit).norm() < 1e-9) return;
  if (dir == Rotation::Counterclockwise) {
    auto [ei, ti] = locate(hull, entry, true);
    auto [eo, to] = locate(hull, exit, false);
    if (ei == eo && to >= ti) return;
    int j = (ei + 1) % n;
    for (int guard = 0; guard < n; ++guard) {
      out.push_back(miter_vertex(hull, j, margin));
      if (j == eo) break;
      j = (j + 1) % n;
    }
  } else {
    auto [ei, ti] = locate(hull, entry, false);
    auto [eo, to] = locate(hull, exit, true);
    if (ei == eo && to <= ti) return;
    int j = ei;
    const int stop = (eo + 1) % n;
    for (int guard = 0; guard < n; ++guard) {
      out.push_back(miter_vertex(hull, j, margin));
      if (j == stop) break;
      j = (j + n - 1) % n;
    }
  }
}

}  // namespace

std::vector<Vec2> route_polyline(const GeneralizedTrajectory& gt,
                                 const TopoGraph& graph,
                                 std::span<const Rotation> choices,
                                 double margin) {
  std::vector<Vec2> pts;
  pts.push_back(gt.edges.front().from);
  for (std::size_t k = 1; k + 1 < gt.nodes.size(); ++k) {
    const Polygon& hull = graph.hulls[graph.nodes[gt.nodes[k]].ref];
    const TopoEdge& in = gt.edges[k - 1];
    const TopoEdge& out = gt.edges[k];
    const Vec2 fallback_in = unit_or(in.to - polygon_centroid(hull), Vec2(1, 0));
    const Vec2 fallback_out = unit_or(out.from - polygon_centroid(hull), Vec2(1, 0));
    pts.push_back(in.to + margin * unit_or(in.from - in.to, fallback_in));
    walk_hull(hull, in.to, out.from, choices[k - 1], margin, pts);
    pts.push_back(out.from + margin * unit_or(out.to - out.from, fallback_out));
  }
  pts.push_back(gt.edges.back().to);
  // Collapse repeated points.
  std::vector<Vec2> clean;
  for (const auto& p : pts) {
    if (clean.empty() || (clean.back() - p).norm() > 1e-9) clean.push_back(p);
  }
  if (clean.size() == 1) clean.push_back(clean.front());
  return clean;
}

std::vector<Pose> resample_polyline(std::span<const Vec2> pts, int m,
                                    double start_heading, double end_heading) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) cum[k] = cum[k - 1] + (pts[k] - pts[k - 1]).norm();
  const double total = cum.back();
  std::vector<Vec2> samples;
  samples.reserve(m + 1);
  std::size_t seg = 0;
  for (int i = 0; i <= m; ++i) {
    const double s = total * i / m;
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    samples.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
  }
  samples.back() = pts.back();

  std::vector<Pose> poses;
  poses.reserve(samples.size());
  double last = start_heading;
  for (int i = 0; i <= m; ++i) {
    double theta = last;
    if (i == 0) {
      theta = start_heading;
    } else if (i == m) {
      theta = end_heading;
    } else {
      const Vec2 d0 = samples[i] - samples[i - 1];
      const Vec2 d1 = samples[i + 1] - samples[i];
      Vec2 sum = Vec2::Zero();
      if (d0.norm() > 1e-12) sum += d0.normalized();
      if (d1.norm() > 1e-12) sum += d1.normalized();
      if (sum.norm() > 1e-9) theta = angle_of(sum);
    }
    poses.emplace_back(samples[i], theta);
    last = theta;
  }
  return poses;
}

bool polyline_self_intersects(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 2; j + 1 < n; ++j) {
      if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
  }
  return false;
}

std::vector<Trajectory> expand_detours(const GeneralizedTrajectory& gt,
                                       const TopoGraph& graph,
                                       std::span<const ObstacleGroup> groups,
                                       const Pose& robot,
                                       std::span<const GoalConstraint> goal_sets,
                                       const ExpandOptions& opts) {
  const std::size_t n = gt.nodes.size() - 2;
  const int goal = gt.goal_index(graph);
  std::vector<Trajectory> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<Rotation> choices(n);
    for (std::size_t k = 0; k < n; ++k) {
      choices[k] = (mask >> k) & 1 ? Rotation::Clockwise : Rotation::Counterclockwise;
    }
    std::vector<Vec2> pts = route_polyline(gt, graph, choices, opts.margin);
    pts.front() = robot.position();
    if (polyline_self_intersects(pts)) continue;
    bool collides = false;
    for (std::size_t k = 0; k + 1 < pts.size() && !collides; ++k) {
      for (const auto& hull : graph.hulls) {
        if (segment_crosses_interior(hull, pts[k], pts[k + 1], kEdgeTolerance)) {
          collides = true;
          break;
        }
      }
    }
    if (collides) continue;

    const double length = polyline_length(pts);
    const int m = std::clamp(int(std::ceil(length / (opts.v_cap * opts.dt) - 1e-9)),
                             opts.m_min, opts.m_max);
    const Vec2 approach = unit_or(pts.back() - pts[pts.size() - 2], robot.heading());
    const double end_heading =
        goal_sets.empty() ? angle_of(approach)
                          : goal_heading(goal_sets[goal], pts.back(), approach);
    Trajectory traj;
    traj.poses = resample_polyline(pts, m, robot.theta, end_heading);
    traj.dt = opts.dt;
    traj.goal_index = goal;
    try {
      traj.signature = signature(traj, groups);
    } catch (const DegenerateGeometry&) {
      continue;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::string render_svg(const Costmap& map, std::span<const ObstacleGroup> groups,
                       const TopoGraph* graph) {
  const double scale = 60.0;
  const double w = map.width() * scale;
  auto sx = [&](double x) { return (x - map.x_min()) * scale; };
  auto sy = [&](double y) { return (map.y_max() - y) * scale; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << w
     << "\" viewBox=\"0 0 " << w << ' ' << w << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  const double cs = map.resolution() * scale;
  for (int r = 0; r < map.size(); ++r) {
    for (int c = 0; c < map.size(); ++c) {
      if (!map.occupied({r, c})) continue;
      os << "<rect x=\"" << c * cs << "\" y=\"" << r * cs << "\" width=\"" << cs
         << "\" height=\"" << cs << "\" fill=\"#bbb\"/>\n";
    }
  }
  for (const auto& g : groups) {
    os << "<polygon fill=\"none\" stroke=\"#c33\" stroke-width=\"1.5\" points=\"";
    for (const auto& v : g.boundary) os << sx(v.x()) << ',' << sy(v.y()) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << sx(g.centroid.x()) << "\" y=\"" << sy(g.centroid.y())
       << "\" font-size=\"12\" fill=\"#c33\">" << g.id << "</text>\n";
  }
  if (graph) {
    for (const auto& [key, e] : graph->edges) {
      os << "<line x1=\"" << sx(e.from.x()) << "\" y1=\"" << sy(e.from.y()) << "\" x2=\""
         << sx(e.to.x()) << "\" y2=\"" << sy(e.to.y())
         << "\" stroke=\"#36c\" stroke-width=\"1\"/>\n";
    }
    for (const auto& node : graph->nodes) {
      if (node.kind == NodeKind::Obstacle) continue;
      os << "<circle cx=\"" << sx(node.anchor.x()) << "\" cy=\"" << sy(node.anchor.y())
         << "\" r=\"4\" fill=\"" << (node.kind == NodeKind::Robot ? "#2a2" : "#e90")
         << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace leadfollow::topo
