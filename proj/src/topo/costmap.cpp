#include "leadfollow/topo/costmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace leadfollow::topo {

Costmap::Costmap(const Pose& robot, double width, double resolution)
    : width_(width), resolution_(resolution) {
  size_ = std::max(1, static_cast<int>(std::lround(width / resolution)));
  width_ = size_ * resolution_;
  const double cx = std::round(robot.x / resolution_) * resolution_;
  const double cy = std::round(robot.y / resolution_) * resolution_;
  origin_ = Pose(cx, cy, 0.0);
  x_min_ = cx - 0.5 * width_;
  y_max_ = cy + 0.5 * width_;
  cells_.assign(static_cast<std::size_t>(size_) * size_, 0);
}

std::optional<Cell> Costmap::cell_at(const Vec2& p) const {
  const int col = static_cast<int>(std::floor((p.x() - x_min_) / resolution_));
  const int row = static_cast<int>(std::floor((y_max_ - p.y()) / resolution_));
  Cell c{row, col};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

Vec2 Costmap::cell_center(const Cell& c) const {
  return {x_min_ + (c.col + 0.5) * resolution_,
          y_max_ - (c.row + 0.5) * resolution_};
}

std::array<Vec2, 4> Costmap::cell_corners(const Cell& c) const {
  const double x0 = x_min_ + c.col * resolution_;
  const double y1 = y_max_ - c.row * resolution_;
  const double x1 = x0 + resolution_, y0 = y1 - resolution_;
  return {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
}

bool Costmap::contains(const Vec2& p) const {
  return p.x() >= x_min_ && p.x() <= x_min_ + width_ &&
         p.y() <= y_max_ && p.y() >= y_max_ - width_;
}

Polygon Costmap::bounds() const {
  const double x0 = x_min_, x1 = x_min_ + width_;
  const double y0 = y_max_ - width_, y1 = y_max_;
  return {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
}

std::size_t Costmap::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

Costmap build_costmap(std::span<const Vec2> scan,
                      std::span<const Vec2> leader_points, const Pose& robot,
                      const CostmapConfig& config) {
  Costmap map(robot, config.width, config.resolution);

  std::vector<Vec2> excluded(leader_points.begin(), leader_points.end());
  auto lex = [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  };
  std::sort(excluded.begin(), excluded.end(), lex);
  auto is_leader = [&](const Vec2& p) {
    auto it = std::lower_bound(excluded.begin(), excluded.end(), p, lex);
    return it != excluded.end() && (*it - p).norm() < 1e-9;
  };

  std::vector<Cell> raw;
  for (const auto& p : scan) {
    if (!excluded.empty() && is_leader(p)) continue;
    if (auto c = map.cell_at(p)) raw.push_back(*c);
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  const int reach = static_cast<int>(std::floor(config.inflation / config.resolution + 1e-9));
  const double r2 = std::pow(config.inflation / config.resolution, 2) + 1e-9;
  for (const auto& c : raw) {
    for (int dr = -reach; dr <= reach; ++dr) {
      for (int dc = -reach; dc <= reach; ++dc) {
        if (dr * dr + dc * dc > r2) continue;
        Cell n{c.row + dr, c.col + dc};
        if (map.in_bounds(n)) map.set(n, true);
      }
    }
  }
  return map;
}

ObstacleGroup make_group(const Costmap& map, std::vector<Cell> cells, int id) {
  ObstacleGroup g;
  g.id = id;
  std::sort(cells.begin(), cells.end());
  std::vector<Vec2> corners;
  corners.reserve(cells.size() * 4);
  Vec2 sum = Vec2::Zero();
  for (const auto& c : cells) {
    for (const auto& v : map.cell_corners(c)) corners.push_back(v);
    sum += map.cell_center(c);
  }
  g.centroid = sum / double(std::max<std::size_t>(1, cells.size()));
  g.boundary = convex_hull(std::move(corners));
  g.cells = std::move(cells);
  return g;
}

namespace {

constexpr std::array<std::array<int, 2>, 8> kNeighbors{{{-1, -1}, {-1, 0},
                                                        {-1, 1}, {0, -1},
                                                        {0, 1}, {1, -1},
                                                        {1, 0}, {1, 1}}};

// 8-connected components of an arbitrary cell subset.
std::vector<std::vector<Cell>> components(std::vector<Cell> cells) {
  std::sort(cells.begin(), cells.end());
  std::vector<char> seen(cells.size(), 0);
  auto index_of = [&](const Cell& c) -> long {
    auto it = std::lower_bound(cells.begin(), cells.end(), c);
    if (it == cells.end() || *it != c) return -1;
    return it - cells.begin();
  };
  std::vector<std::vector<Cell>> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (seen[i]) continue;
    std::vector<Cell> comp;
    std::deque<std::size_t> queue{i};
    seen[i] = 1;
    while (!queue.empty()) {
      const Cell c = cells[queue.front()];
      queue.pop_front();
      comp.push_back(c);
      for (const auto& d : kNeighbors) {
        const long j = index_of({c.row + d[0], c.col + d[1]});
        if (j >= 0 && !seen[j]) {
          seen[j] = 1;
          queue.push_back(static_cast<std::size_t>(j));
        }
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

void reassign_ids(std::vector<ObstacleGroup>& groups) {
  std::sort(groups.begin(), groups.end(),
            [](const ObstacleGroup& a, const ObstacleGroup& b) {
              return a.cells.front() < b.cells.front();
            });
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].id = int(i);
}

}  // namespace

std::vector<ObstacleGroup> cluster_groups(const Costmap& map) {
  std::vector<ObstacleGroup> groups;
  const int n = map.size();
  std::vector<char> seen(static_cast<std::size_t>(n) * n, 0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * n + c;
      if (seen[idx] || !map.occupied({r, c})) continue;
      std::vector<Cell> cells;
      std::deque<Cell> queue{{r, c}};
      seen[idx] = 1;
      while (!queue.empty()) {
        const Cell cur = queue.front();
        queue.pop_front();
        cells.push_back(cur);
        for (const auto& d : kNeighbors) {
          const Cell nb{cur.row + d[0], cur.col + d[1]};
          if (!map.in_bounds(nb) || !map.occupied(nb)) continue;
          const std::size_t ni = static_cast<std::size_t>(nb.row) * n + nb.col;
          if (seen[ni]) continue;
          seen[ni] = 1;
          queue.push_back(nb);
        }
      }
      groups.push_back(make_group(map, std::move(cells), int(groups.size())));
    }
  }
  return groups;
}

std::vector<ObstacleGroup> split_groups(std::vector<ObstacleGroup> groups,
                                        const Costmap& map,
                                        std::span<const Vec2> keep_free,
                                        double min_fill) {
  const double cell_area = map.resolution() * map.resolution();
  auto needs_split = [&](const ObstacleGroup& g) {
    if (g.cells.size() < 2) return false;
    for (const auto& p : keep_free) {
      if (point_in_polygon(g.boundary, p)) return true;
    }
    if (min_fill > 0.0) {
      const double hull_area = std::abs(signed_area(g.boundary));
      if (hull_area > 0.0 && g.cells.size() * cell_area < min_fill * hull_area &&
          g.cells.size() >= 8) {
        return true;
      }
    }
    return false;
  };

  std::vector<ObstacleGroup> done;
  std::deque<ObstacleGroup> work(groups.begin(), groups.end());
  while (!work.empty()) {
    ObstacleGroup g = std::move(work.front());
    work.pop_front();
    if (!needs_split(g)) {
      done.push_back(std::move(g));
      continue;
    }
    int rmin = g.cells.front().row, rmax = rmin;
    int cmin = g.cells.front().col, cmax = cmin;
    for (const auto& c : g.cells) {
      rmin = std::min(rmin, c.row);
      rmax = std::max(rmax, c.row);
      cmin = std::min(cmin, c.col);
      cmax = std::max(cmax, c.col);
    }
    const bool by_row = (rmax - rmin) >= (cmax - cmin);
    const int mid = by_row ? (rmin + rmax + 1) / 2 : (cmin + cmax + 1) / 2;
    std::vector<Cell> lo, hi;
    for (const auto& c : g.cells) {
      ((by_row ? c.row : c.col) < mid ? lo : hi).push_back(c);
    }
    for (auto* half : {&lo, &hi}) {
      for (auto& comp : components(std::move(*half))) {
        work.push_back(make_group(map, std::move(comp), 0));
      }
    }
  }
  reassign_ids(done);
  return done;
}

}  // namespace leadfollow::topo
