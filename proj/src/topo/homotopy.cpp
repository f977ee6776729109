#include "leadfollow/topo/homotopy.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "leadfollow/errors.hpp"

namespace leadfollow::topo {

namespace {

constexpr double kCoincide = 1e-12;

// Sum of signed angles swept along the polyline as seen from c.
double sweep(std::span<const Vec2> points, const Vec2& c) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    total += signed_angle(points[k] - c, points[k + 1] - c);
  }
  return total;
}

}  // namespace

double loop_winding(std::span<const Vec2> points, const Vec2& c) {
  const Vec2& a = points.front();
  const Vec2& b = points.back();
  double chord = 0.0;
  if (point_segment_distance(c, a, b) > 1e-9) chord = signed_angle(a - c, b - c);
  return chord - sweep(points, c);
}

int side_value(std::span<const Vec2> points, const Vec2& c) {
  const Vec2& a = points.front();
  const Vec2& b = points.back();
  const bool on_chord = point_segment_distance(c, a, b) <= 1e-9;
  if (on_chord) {
    // The loop passes through c; the trajectory alone decides the side.
    const double s = -sweep(points, c);
    if (std::abs(s) >= kAngleMin) return s > 0 ? 1 : -1;
    return 1;
  }
  const double w = loop_winding(points, c);
  if (std::abs(w) >= kAngleMin) return w > 0 ? 1 : -1;
  const double side = cross(b - a, c - a);
  return side > 0 ? -1 : 1;
}

HomotopySignature signature(std::span<const Vec2> points,
                            std::span<const ObstacleGroup> groups) {
  if (points.size() < 2) {
    throw DegenerateGeometry("trajectory needs at least two points");
  }
  HomotopySignature sig;
  sig.values.reserve(groups.size());
  for (const auto& g : groups) {
    for (const auto& p : points) {
      if ((p - g.centroid).squaredNorm() <= kCoincide) {
        throw DegenerateGeometry("trajectory point coincides with centroid of group " +
                                 std::to_string(g.id));
      }
    }
    sig.values.push_back(side_value(points, g.centroid));
  }
  return sig;
}

HomotopySignature signature(const Trajectory& traj,
                            std::span<const ObstacleGroup> groups) {
  const auto pts = traj.positions();
  return signature(std::span<const Vec2>(pts), groups);
}

std::vector<Trajectory> dedup_by_signature(std::vector<Trajectory> trajs) {
  std::vector<double> lengths(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) lengths[i] = trajs[i].length();
  std::vector<std::size_t> order(trajs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::unordered_map<std::string, bool> seen;
  std::vector<Trajectory> out;
  for (std::size_t i : order) {
    if (seen.emplace(trajs[i].signature.key(), true).second) {
      out.push_back(std::move(trajs[i]));
    }
  }
  return out;
}

}  // namespace leadfollow::topo
