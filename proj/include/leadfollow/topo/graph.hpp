#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leadfollow/goal.hpp"
#include "leadfollow/topo/costmap.hpp"
#include "leadfollow/trajectory.hpp"

namespace leadfollow::topo {

enum class NodeKind { Robot, Goal, Obstacle };

struct TopoNode {
  NodeKind kind = NodeKind::Robot;
  /// Goal-set index for goal nodes, group index for obstacle nodes.
  int ref = 0;
  /// Robot position, goal anchor, or group centroid.
  Vec2 anchor = Vec2::Zero();
};

/// Shortest segment between two nodes; from lies on node a, to on node b.
struct TopoEdge {
  int a = 0;
  int b = 0;
  Vec2 from = Vec2::Zero();
  Vec2 to = Vec2::Zero();
  double length() const { return (to - from).norm(); }
  /// The same edge walked from b to a.
  TopoEdge reversed() const { return {b, a, to, from}; }
};

/// Node 0 is the robot, nodes 1..g the goal sets, then one node per group.
struct TopoGraph {
  std::vector<TopoNode> nodes;
  std::map<std::pair<int, int>, TopoEdge> edges;  // keys have first < second
  std::vector<Polygon> hulls;                     // by group index

  int goal_count() const;
  int node_of_group(int group) const { return 1 + goal_count() + group; }
  bool has_edge(int a, int b) const;
  /// Edge oriented from a to b. Throws std::out_of_range if absent.
  TopoEdge edge(int a, int b) const;
  std::vector<int> neighbors(int node) const;
};

/// Grazing tolerance (meters) used when testing edges against other hulls.
inline constexpr double kEdgeTolerance = 1e-6;

TopoGraph build_graph(std::span<const ObstacleGroup> groups, const Pose& robot,
                      std::span<const GoalConstraint> goal_sets);

enum class Rotation { Clockwise, Counterclockwise };

/// Node path robot -> obstacles -> goal with the edges walked between them.
struct GeneralizedTrajectory {
  std::vector<int> nodes;
  std::vector<TopoEdge> edges;  // edges[k] joins nodes[k] and nodes[k+1]
  /// One entry per obstacle node once a detour assignment is fixed.
  std::vector<Rotation> detour_choices;

  int goal_index(const TopoGraph& graph) const;
  /// Group indices of the intermediate obstacle nodes.
  std::vector<int> groups(const TopoGraph& graph) const;
  double edge_length() const;
};

struct EnumerateOptions {
  /// Prune partial paths whose edge length plus straight distance to the goal
  /// anchor exceeds length_factor * direct distance + length_slack.
  /// Non-positive disables pruning.
  double length_factor = 0.0;
  double length_slack = 0.0;
  /// Stop after this many paths (0 = unlimited).
  std::size_t max_paths = 0;
};

/// All simple paths from the robot to any goal node with at most depth_limit
/// intermediate obstacle nodes, in DFS order (neighbors by ascending index).
/// Throws NoPath if none exists.
std::vector<GeneralizedTrajectory> enumerate_generalized(
    const TopoGraph& graph, int depth_limit, const EnumerateOptions& opts = {});

struct ExpandOptions {
  double margin = 0.15;  // offset from each hull while routing around it
  double v_cap = 1.5;
  double dt = 0.3;
  int m_min = 2;
  int m_max = 40;
};

/// Routes a seed polyline for each of the 2^n detour assignments, drops the
/// ones that self-intersect or cross a hull, resamples the rest at v_cap*dt
/// spacing and signs them against groups.
std::vector<Trajectory> expand_detours(const GeneralizedTrajectory& gt,
                                       const TopoGraph& graph,
                                       std::span<const ObstacleGroup> groups,
                                       const Pose& robot,
                                       std::span<const GoalConstraint> goal_sets,
                                       const ExpandOptions& opts = {});

/// Raw routed polyline for one assignment (no validity checks).
std::vector<Vec2> route_polyline(const GeneralizedTrajectory& gt,
                                 const TopoGraph& graph,
                                 std::span<const Rotation> choices,
                                 double margin);

/// Uniform arc-length resampling into m segments with tangent headings.
/// The first pose keeps start_heading; the last takes end_heading.
std::vector<Pose> resample_polyline(std::span<const Vec2> pts, int m,
                                    double start_heading, double end_heading);

bool polyline_self_intersects(std::span<const Vec2> pts);

/// SVG rendering of the costmap cells, group hulls and graph edges.
std::string render_svg(const Costmap& map, std::span<const ObstacleGroup> groups,
                       const TopoGraph* graph = nullptr);

}  // namespace leadfollow::topo
