#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "leadfollow/geometry.hpp"

namespace leadfollow::topo {

struct CostmapConfig {
  double width = 8.0;        // W_map, meters
  double resolution = 0.1;   // meters per cell
  double inflation = 0.3;    // footprint radius, meters
};

/// Grid cell; row 0 is the top (largest y), column 0 the left (smallest x).
struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Square binary occupancy grid, axis-aligned with the world and centered on
/// the robot (origin snapped to the grid lattice).
class Costmap {
 public:
  Costmap() = default;
  Costmap(const Pose& robot, double width, double resolution);

  const Pose& origin() const { return origin_; }
  double width() const { return width_; }
  double resolution() const { return resolution_; }
  int size() const { return size_; }

  bool in_bounds(const Cell& c) const {
    return c.row >= 0 && c.col >= 0 && c.row < size_ && c.col < size_;
  }
  bool occupied(const Cell& c) const {
    return cells_[static_cast<std::size_t>(c.row) * size_ + c.col] != 0;
  }
  void set(const Cell& c, bool value) {
    cells_[static_cast<std::size_t>(c.row) * size_ + c.col] = value ? 1 : 0;
  }

  std::optional<Cell> cell_at(const Vec2& p) const;
  Vec2 cell_center(const Cell& c) const;
  /// The four corners of a cell (CCW from lower-left).
  std::array<Vec2, 4> cell_corners(const Cell& c) const;
  bool contains(const Vec2& p) const;
  /// Map outline, CCW.
  Polygon bounds() const;
  double x_min() const { return x_min_; }
  double y_max() const { return y_max_; }
  std::size_t occupied_count() const;

 private:
  Pose origin_;
  double width_ = 0.0;
  double resolution_ = 0.1;
  int size_ = 0;
  double x_min_ = 0.0;
  double y_max_ = 0.0;
  std::vector<std::uint8_t> cells_;
};

/// Rasterizes scan points (world frame) into a robot-centered grid, skipping
/// any point that coincides with a leader point, then inflates occupied cells
/// by config.inflation (cells whose centers lie within that radius).
Costmap build_costmap(std::span<const Vec2> scan,
                      std::span<const Vec2> leader_points, const Pose& robot,
                      const CostmapConfig& config);

/// 8-connected cluster of occupied cells outlined by the convex hull of its
/// cell corners.
struct ObstacleGroup {
  int id = 0;
  std::vector<Cell> cells;
  Polygon boundary;  // CCW, world frame
  Vec2 centroid = Vec2::Zero();
};

/// Connected components in scan order of their top-left cell.
std::vector<ObstacleGroup> cluster_groups(const Costmap& map);

/// Recursively bisects groups whose hull contains one of keep_free (or whose
/// cell coverage of the hull area falls below min_fill) so that the points
/// stay outside every hull. Ids are reassigned in scan order.
std::vector<ObstacleGroup> split_groups(std::vector<ObstacleGroup> groups,
                                        const Costmap& map,
                                        std::span<const Vec2> keep_free,
                                        double min_fill = 0.0);

/// Builds a group (hull and centroid) from a cell set.
ObstacleGroup make_group(const Costmap& map, std::vector<Cell> cells, int id);

}  // namespace leadfollow::topo
