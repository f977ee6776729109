#pragma once

#include <span>
#include <vector>

#include "leadfollow/topo/costmap.hpp"
#include "leadfollow/trajectory.hpp"

namespace leadfollow::topo {

/// Below this total winding (radians) a group counts as not enclosed.
inline constexpr double kAngleMin = 0.2;

/// Signed winding of the loop formed by the chord p_0 -> p_m followed by the
/// trajectory walked backwards, around c. A trajectory that leaves c on its
/// right side yields +2pi.
double loop_winding(std::span<const Vec2> points, const Vec2& c);

/// Side value of one group. Enclosed groups take the sign of the winding;
/// the rest take +1 when the centroid lies right of the chord, -1 when left.
int side_value(std::span<const Vec2> points, const Vec2& c);

/// Throws DegenerateGeometry if a trajectory point coincides with a centroid
/// or the trajectory has fewer than two points.
HomotopySignature signature(std::span<const Vec2> points,
                            std::span<const ObstacleGroup> groups);
HomotopySignature signature(const Trajectory& traj,
                            std::span<const ObstacleGroup> groups);

/// Keeps the shortest trajectory of each signature; output is ordered by
/// ascending length with ties kept in input order.
std::vector<Trajectory> dedup_by_signature(std::vector<Trajectory> trajs);

}  // namespace leadfollow::topo
