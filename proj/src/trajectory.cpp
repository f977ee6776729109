#include "leadfollow/trajectory.hpp"

namespace leadfollow {

std::string HomotopySignature::key() const {
  std::string k;
  k.reserve(values.size());
  for (int v : values) k.push_back(v > 0 ? '+' : '-');
  return k;
}

std::vector<Vec2> Trajectory::positions() const {
  std::vector<Vec2> pts;
  pts.reserve(poses.size());
  for (const auto& p : poses) pts.push_back(p.position());
  return pts;
}

double Trajectory::length() const {
  const auto pts = positions();
  return polyline_length(pts);
}

}  // namespace leadfollow
