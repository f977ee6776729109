#pragma once

#include <string>
#include <vector>

#include "leadfollow/geometry.hpp"

namespace leadfollow {

/// Per-obstacle-group detour sign: +1 counterclockwise, -1 clockwise.
struct HomotopySignature {
  std::vector<int> values;

  std::size_t size() const { return values.size(); }
  std::string key() const;
  bool operator==(const HomotopySignature&) const = default;
};

/// Timed pose sequence p_0..p_m with fixed spacing dt.
struct Trajectory {
  std::vector<Pose> poses;
  double dt = 0.3;
  HomotopySignature signature;
  double cost = 0.0;  // seconds
  /// Index of the goal set this trajectory ends on.
  int goal_index = 0;

  int segments() const { return static_cast<int>(poses.size()) - 1; }
  std::vector<Vec2> positions() const;
  double length() const;
};

}  // namespace leadfollow
