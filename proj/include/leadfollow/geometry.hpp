#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace leadfollow {

using Vec2 = Eigen::Vector2d;

/// Counterclockwise vertex list. Most routines assume convexity.
using Polygon = std::vector<Vec2>;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Planar pose; theta is kept in (-pi, pi].
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_)
      : x(x_), y(y_), theta(normalize_angle(theta_)) {}
  Pose(const Vec2& p, double theta_) : Pose(p.x(), p.y(), theta_) {}

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(theta), std::sin(theta)}; }

  /// Maps a point expressed in this pose's frame into the world frame.
  Vec2 to_world(const Vec2& local) const;
  /// Maps a world point into this pose's frame.
  Vec2 to_local(const Vec2& world) const;

  bool operator==(const Pose&) const = default;
};

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double angle_of(const Vec2& v) { return std::atan2(v.y(), v.x()); }

/// Signed angle that rotates a onto b, in (-pi, pi].
double signed_angle(const Vec2& a, const Vec2& b);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// True if the closed segments [a,b] and [c,d] share a point.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d);

/// Ray parameter t >= 0 at which origin + t*dir meets segment [a,b].
std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir,
                                  const Vec2& a, const Vec2& b);
/// Smallest t >= 0 at which origin + t*dir enters the disc.
std::optional<double> ray_circle(const Vec2& origin, const Vec2& dir,
                                 const Vec2& center, double radius);
/// Smallest t >= 0 at which origin + t*dir meets the polygon boundary.
std::optional<double> ray_polygon(const Vec2& origin, const Vec2& dir,
                                  const Polygon& poly);

double signed_area(const Polygon& poly);
bool is_counterclockwise(const Polygon& poly);
Vec2 polygon_centroid(const Polygon& poly);
double perimeter(const Polygon& poly);

/// Even-odd containment; boundary points count as inside.
bool point_in_polygon(const Polygon& poly, const Vec2& p);

/// Andrew's monotone chain; CCW, collinear points dropped.
Polygon convex_hull(std::vector<Vec2> points);

/// Unit outward normal of edge k (vertex k -> k+1) of a CCW polygon.
Vec2 outward_normal(const Polygon& poly, std::size_t k);

struct BoundaryPoint {
  Vec2 point;
  double distance = 0.0;  // unsigned distance from the query
  int edge = 0;           // edge index k spans vertex k -> k+1
  double t = 0.0;         // parameter along the edge in [0,1]
};

/// Closest point on the polygon outline.
BoundaryPoint closest_boundary_point(const Polygon& poly, const Vec2& p);

/// Signed distance to a convex polygon, negative inside. If grad is given it
/// receives the gradient with respect to p (unit length almost everywhere).
double signed_distance(const Polygon& poly, const Vec2& p,
                       Vec2* grad = nullptr);

/// Shortest segment between two disjoint convex polygons (first lies on a).
std::pair<Vec2, Vec2> closest_points(const Polygon& a, const Polygon& b);

/// True if [a,b] passes through the open interior of a convex polygon deeper
/// than tol. Grazing contact along the boundary does not count.
bool segment_crosses_interior(const Polygon& poly, const Vec2& a,
                              const Vec2& b, double tol = 1e-9);

/// Regular n-gon approximating a disc (CCW).
Polygon regular_polygon(const Vec2& center, double radius, int n);

double polyline_length(std::span<const Vec2> pts);

/// Bounding circle used for cheap rejection tests.
struct BoundingCircle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};
BoundingCircle bounding_circle(const Polygon& poly);

}  // namespace leadfollow
