#include "leadfollow/harness/render.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

#include "leadfollow/errors.hpp"

namespace leadfollow::harness {

namespace {

constexpr double kScale = 40.0;  // pixels per meter
constexpr double kStrip = 24.0;  // timeline strip height

const char* state_color(adapt::FollowState s) {
  switch (s) {
    case adapt::FollowState::Chasing: return "#e08a1e";
    case adapt::FollowState::Following: return "#2f9e44";
    case adapt::FollowState::Planning: return "#868e96";
    case adapt::FollowState::Retreating: return "#c92a2a";
    case adapt::FollowState::Switching: return "#7048e8";
  }
  return "#000";
}

struct Frame {
  sim::Arena a;
  double px(double x) const { return (x - a.x_min) * kScale; }
  double py(double y) const { return (a.y_max - y) * kScale; }
  std::string points(const std::vector<Vec2>& pts) const {
    std::string s;
    for (const auto& p : pts) s += fmt::format("{:.2f},{:.2f} ", px(p.x()), py(p.y()));
    if (!s.empty()) s.pop_back();
    return s;
  }
};

}  // namespace

std::string render_svg(const RunRecord& r, std::optional<std::size_t> snapshot) {
  const Frame f{r.arena};
  const double w = (r.arena.x_max - r.arena.x_min) * kScale;
  const double h = (r.arena.y_max - r.arena.y_min) * kScale;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\">\n",
      w, h + kStrip, w, h + kStrip);
  s += fmt::format("<rect class=\"arena\" x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" "
                   "fill=\"#fafafa\" stroke=\"#333\"/>\n",
                   w, h);
  for (const auto& poly : r.obstacles) {
    s += fmt::format("<polygon class=\"obstacle\" points=\"{}\" fill=\"#495057\"/>\n",
                     f.points(poly));
  }

  if (!snapshot && !r.snapshots.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.snapshots.size(); ++k) {
      if (r.snapshots[k].candidates.size() > r.snapshots[best].candidates.size()) best = k;
    }
    snapshot = best;
  }
  if (snapshot && *snapshot < r.snapshots.size()) {
    const auto& snap = r.snapshots[*snapshot];
    s += fmt::format("<g class=\"snapshot\" data-time=\"{:.2f}\">\n", snap.time);
    for (const auto& hull : snap.hulls) {
      s += fmt::format("<polygon class=\"hull\" points=\"{}\" fill=\"#ffa94d\" "
                       "fill-opacity=\"0.3\" stroke=\"#e8590c\"/>\n",
                       f.points(hull));
    }
    for (const auto& g : snap.goal_shapes) {
      if (g.size() == 1) {
        s += fmt::format("<circle class=\"goal\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" "
                         "fill=\"#1c7ed6\"/>\n",
                         f.px(g[0].x()), f.py(g[0].y()));
      } else {
        s += fmt::format("<polyline class=\"goal\" points=\"{}\" fill=\"none\" "
                         "stroke=\"#1c7ed6\" stroke-width=\"3\"/>\n",
                         f.points(g));
      }
    }
    for (const auto& c : snap.candidates) {
      s += fmt::format("<polyline class=\"candidate\" points=\"{}\" fill=\"none\" "
                       "stroke=\"#adb5bd\" stroke-width=\"1.5\"/>\n",
                       f.points(c));
    }
    if (!snap.selected.empty()) {
      s += fmt::format("<polyline class=\"selected\" points=\"{}\" fill=\"none\" "
                       "stroke=\"#d6336c\" stroke-width=\"3\"/>\n",
                       f.points(snap.selected));
    }
    s += "</g>\n";
  }

  std::vector<Vec2> robot_path, leader_path;
  for (const auto& t : r.ticks) {
    robot_path.push_back(t.robot.position());
    leader_path.push_back(t.leader.position());
  }
  s += fmt::format("<polyline class=\"leader-path\" points=\"{}\" fill=\"none\" "
                   "stroke=\"#1971c2\" stroke-dasharray=\"4 3\"/>\n",
                   f.points(leader_path));
  s += fmt::format("<polyline class=\"robot-path\" points=\"{}\" fill=\"none\" "
                   "stroke=\"#212529\" stroke-width=\"2\"/>\n",
                   f.points(robot_path));

  // State timeline along the bottom.
  const double total = std::max<double>(1.0, double(r.ticks.size()));
  const double cell = w / total;
  s += "<g class=\"timeline\">\n";
  for (std::size_t k = 0; k < r.ticks.size(); ++k) {
    s += fmt::format("<rect class=\"state {}\" x=\"{:.2f}\" y=\"{:.0f}\" width=\"{:.2f}\" "
                     "height=\"{:.0f}\" fill=\"{}\"/>\n",
                     adapt::to_string(r.ticks[k].state), double(k) * cell, h, cell + 0.01,
                     kStrip, state_color(r.ticks[k].state));
  }
  s += "</g>\n</svg>\n";
  return s;
}

void render_svg(const RunRecord& record, const std::filesystem::path& path,
                std::optional<std::size_t> snapshot) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << render_svg(record, snapshot);
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace leadfollow::harness
