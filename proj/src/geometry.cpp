#include "leadfollow/geometry.hpp"

#include <algorithm>
#include <limits>

namespace leadfollow {

double normalize_angle(double a) {
  if (!std::isfinite(a)) return a;
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Vec2 Pose::to_world(const Vec2& local) const {
  const double c = std::cos(theta), s = std::sin(theta);
  return {x + c * local.x() - s * local.y(), y + s * local.x() + c * local.y()};
}

Vec2 Pose::to_local(const Vec2& world) const {
  const double c = std::cos(theta), s = std::sin(theta);
  const double dx = world.x() - x, dy = world.y() - y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

double signed_angle(const Vec2& a, const Vec2& b) {
  return std::atan2(cross(a, b), a.dot(b));
}

Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return (p - closest_point_on_segment(p, a, b)).norm();
}

namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({1.0, (b - a).norm(), (c - a).norm()});
  const double eps = 1e-12 * scale * scale;
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         p.x() >= std::min(a.x(), b.x()) - 1e-12 &&
         p.y() <= std::max(a.y(), b.y()) + 1e-12 &&
         p.y() >= std::min(a.y(), b.y()) - 1e-12;
}

}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir,
                                  const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 w = a - origin;
  const double t = cross(w, e) / denom;
  const double s = cross(w, dir) / denom;
  if (t < 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_circle(const Vec2& origin, const Vec2& dir,
                                 const Vec2& center, double radius) {
  const Vec2 oc = origin - center;
  const double a = dir.squaredNorm();
  const double b = 2.0 * oc.dot(dir);
  const double c = oc.squaredNorm() - radius * radius;
  if (c <= 0.0) return 0.0;  // origin inside
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  if (t0 >= 0.0) return t0;
  const double t1 = (-b + sq) / (2.0 * a);
  if (t1 >= 0.0) return t1;
  return std::nullopt;
}

std::optional<double> ray_polygon(const Vec2& origin, const Vec2& dir,
                                  const Polygon& poly) {
  std::optional<double> best;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    auto t = ray_segment(origin, dir, poly[k], poly[(k + 1) % poly.size()]);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

double signed_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    a += cross(poly[k], poly[(k + 1) % poly.size()]);
  }
  return 0.5 * a;
}

bool is_counterclockwise(const Polygon& poly) { return signed_area(poly) > 0; }

Vec2 polygon_centroid(const Polygon& poly) {
  const double area = signed_area(poly);
  if (std::abs(area) < 1e-14) {
    Vec2 m = Vec2::Zero();
    for (const auto& v : poly) m += v;
    return poly.empty() ? m : Vec2(m / double(poly.size()));
  }
  Vec2 c = Vec2::Zero();
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2& p = poly[k];
    const Vec2& q = poly[(k + 1) % poly.size()];
    c += (p + q) * cross(p, q);
  }
  return c / (6.0 * area);
}

double perimeter(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    s += (poly[(k + 1) % poly.size()] - poly[k]).norm();
  }
  return s;
}

bool point_in_polygon(const Polygon& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if (point_segment_distance(p, a, b) < 1e-12) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= t && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

Vec2 outward_normal(const Polygon& poly, std::size_t k) {
  const Vec2& a = poly[k];
  const Vec2& b = poly[(k + 1) % poly.size()];
  Vec2 n(b.y() - a.y(), a.x() - b.x());
  const double len = n.norm();
  return len > 0.0 ? Vec2(n / len) : Vec2::Zero();
}

BoundaryPoint closest_boundary_point(const Polygon& poly, const Vec2& p) {
  BoundaryPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = poly[k];
    const Vec2& b = poly[(k + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t =
        len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + t * ab;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best = {q, d, static_cast<int>(k), t};
    }
  }
  return best;
}

double signed_distance(const Polygon& poly, const Vec2& p, Vec2* grad) {
  if (poly.size() == 1) {
    const Vec2 d = p - poly[0];
    const double len = d.norm();
    if (grad) *grad = len > 0 ? Vec2(d / len) : Vec2(1.0, 0.0);
    return len;
  }
  // Largest edge-plane offset; all <= 0 means p is inside.
  double max_h = -std::numeric_limits<double>::infinity();
  std::size_t max_k = 0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const double h = outward_normal(poly, k).dot(p - poly[k]);
    if (h > max_h) {
      max_h = h;
      max_k = k;
    }
  }
  if (max_h <= 0.0 && poly.size() >= 3) {
    if (grad) *grad = outward_normal(poly, max_k);
    return max_h;
  }
  const BoundaryPoint bp = closest_boundary_point(poly, p);
  if (grad) {
    *grad = bp.distance > 0 ? Vec2((p - bp.point) / bp.distance)
                            : outward_normal(poly, bp.edge);
  }
  return bp.distance;
}

std::pair<Vec2, Vec2> closest_points(const Polygon& a, const Polygon& b) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<Vec2, Vec2> out{a.front(), b.front()};
  for (const auto& v : a) {
    const BoundaryPoint bp = closest_boundary_point(b, v);
    if (bp.distance < best) {
      best = bp.distance;
      out = {v, bp.point};
    }
  }
  for (const auto& v : b) {
    const BoundaryPoint bp = closest_boundary_point(a, v);
    if (bp.distance < best) {
      best = bp.distance;
      out = {bp.point, v};
    }
  }
  // Crossing edges yield a zero-length connection at the crossing point.
  for (std::size_t i = 0; i < a.size() && best > 0.0; ++i) {
    const Vec2& a0 = a[i];
    const Vec2& a1 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Vec2& b0 = b[j];
      const Vec2& b1 = b[(j + 1) % b.size()];
      if (segments_intersect(a0, a1, b0, b1)) {
        const Vec2 e = a1 - a0, f = b1 - b0;
        const double den = cross(e, f);
        Vec2 x = a0;
        if (std::abs(den) > 1e-15) x = a0 + e * (cross(b0 - a0, f) / den);
        return {x, x};
      }
    }
  }
  return out;
}

bool segment_crosses_interior(const Polygon& poly, const Vec2& a,
                              const Vec2& b, double tol) {
  if (poly.size() < 3) return false;
  const Vec2 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 n = outward_normal(poly, k);
    // Require n . (a + t d - v_k) <= -tol
    const double num = -tol - n.dot(a - poly[k]);
    const double den = n.dot(d);
    if (std::abs(den) < 1e-15) {
      if (num < 0.0) return false;
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t1 = std::min(t1, t);
    } else {
      t0 = std::max(t0, t);
    }
    if (t0 > t1) return false;
  }
  return t1 - t0 > 1e-12 || (d.squaredNorm() == 0.0 && t0 <= t1);
}

Polygon regular_polygon(const Vec2& center, double radius, int n) {
  Polygon poly;
  poly.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * kPi * k / n;
    poly.emplace_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  }
  return poly;
}

double polyline_length(std::span<const Vec2> pts) {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
  return s;
}

BoundingCircle bounding_circle(const Polygon& poly) {
  BoundingCircle bc;
  if (poly.empty()) return bc;
  Vec2 c = Vec2::Zero();
  for (const auto& v : poly) c += v;
  c /= double(poly.size());
  double r = 0.0;
  for (const auto& v : poly) r = std::max(r, (v - c).norm());
  bc.center = c;
  bc.radius = r;
  return bc;
}

}  // namespace leadfollow
