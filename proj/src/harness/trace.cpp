#include "leadfollow/harness/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "leadfollow/errors.hpp"

namespace leadfollow::harness {

using nlohmann::json;

namespace {

json pose_json(const Pose& p) { return json::array({p.x, p.y, p.theta}); }
Pose pose_from(const json& j) {
  Pose p;
  p.x = j.at(0);
  p.y = j.at(1);
  p.theta = j.at(2);  // already normalized; assigned directly to round-trip exactly
  return p;
}

json points_json(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(json::array({p.x(), p.y()}));
  return a;
}
std::vector<Vec2> points_from(const json& j) {
  std::vector<Vec2> out;
  for (const auto& p : j) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return out;
}

json polylines_json(const std::vector<std::vector<Vec2>>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(points_json(p));
  return a;
}
std::vector<std::vector<Vec2>> polylines_from(const json& j) {
  std::vector<std::vector<Vec2>> out;
  for (const auto& p : j) out.push_back(points_from(p));
  return out;
}

json flags_json(const adapt::TransitionFlags& f) {
  return {{"in_fov", f.in_fov},
          {"identified", f.identified},
          {"in_costmap", f.in_costmap},
          {"distance", f.distance},
          {"approaching", f.leader_approaching},
          {"new_leader", f.new_leader_command}};
}
adapt::TransitionFlags flags_from(const json& j) {
  adapt::TransitionFlags f;
  f.in_fov = j.at("in_fov");
  f.identified = j.at("identified");
  f.in_costmap = j.at("in_costmap");
  f.distance = j.at("distance");
  f.leader_approaching = j.at("approaching");
  f.new_leader_command = j.at("new_leader");
  return f;
}

}  // namespace

json to_json(const TickRecord& t) {
  return {{"type", "tick"},
          {"time", t.time},
          {"robot", pose_json(t.robot)},
          {"leader", pose_json(t.leader)},
          {"state", adapt::to_string(t.state)},
          {"signature", t.signature.values},
          {"safe_distance", t.safe_distance},
          {"v_cap", t.v_cap},
          {"visible", t.visible},
          {"identified", t.identified},
          {"score", t.score},
          {"distance", t.distance}};
}

TickRecord tick_from_json(const json& j) {
  TickRecord t;
  t.time = j.at("time");
  t.robot = pose_from(j.at("robot"));
  t.leader = pose_from(j.at("leader"));
  t.state = adapt::follow_state_from_string(j.at("state"));
  t.signature.values = j.at("signature").get<std::vector<int>>();
  t.safe_distance = j.at("safe_distance");
  t.v_cap = j.at("v_cap");
  t.visible = j.at("visible");
  t.identified = j.at("identified");
  t.score = j.at("score");
  t.distance = j.at("distance");
  return t;
}

std::string trace_to_string(std::span<const RunRecord> records) {
  std::ostringstream os;
  os << json{{"schema", "leadfollow-trace"}, {"version", kTraceSchemaVersion}}.dump() << '\n';
  for (const auto& r : records) {
    json polys = json::array();
    for (const auto& p : r.obstacles) polys.push_back(points_json(p));
    os << json{{"type", "episode"},
               {"scenario", r.scenario},
               {"variant", to_string(r.variant)},
               {"script", r.script_index},
               {"repeat", r.repeat},
               {"seed", r.seed},
               {"tick", r.tick},
               {"d_max", r.d_max},
               {"arena", {r.arena.x_min, r.arena.y_min, r.arena.x_max, r.arena.y_max}},
               {"obstacles", polys},
               {"success", r.success},
               {"collision", r.collision},
               {"loss_time", r.loss_time},
               {"identified_time", r.identified_time},
               {"distance_integral", r.distance_integral},
               {"duration", r.duration}}
              .dump()
       << '\n';
    for (const auto& t : r.ticks) os << to_json(t).dump() << '\n';
    for (const auto& e : r.events) {
      os << json{{"type", "transition"},
                 {"time", e.time},
                 {"from", adapt::to_string(e.from)},
                 {"to", adapt::to_string(e.to)},
                 {"flags", flags_json(e.flags)}}
                .dump()
         << '\n';
    }
    for (const auto& s : r.snapshots) {
      os << json{{"type", "snapshot"},
                 {"time", s.time},
                 {"hulls", polylines_json(s.hulls)},
                 {"goals", polylines_json(s.goal_shapes)},
                 {"candidates", polylines_json(s.candidates)},
                 {"selected", points_json(s.selected)}}
                .dump()
         << '\n';
    }
  }
  return os.str();
}

std::vector<RunRecord> trace_from_string(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<RunRecord> out;
  int line_no = 0;
  try {
    if (!std::getline(is, line)) throw ConfigError("trace is empty");
    ++line_no;
    const json header = json::parse(line);
    if (header.value("schema", "") != "leadfollow-trace") throw ConfigError("missing schema header");
    if (header.value("version", 0) != kTraceSchemaVersion) {
      throw ConfigError("unsupported trace version");
    }
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "episode") {
        RunRecord r;
        r.scenario = j.at("scenario");
        r.variant = variant_from_string(j.at("variant"));
        r.script_index = j.at("script");
        r.repeat = j.at("repeat");
        r.seed = j.at("seed");
        r.tick = j.at("tick");
        r.d_max = j.at("d_max");
        const auto& a = j.at("arena");
        r.arena = {a.at(0), a.at(1), a.at(2), a.at(3)};
        for (const auto& p : j.at("obstacles")) r.obstacles.push_back(points_from(p));
        r.success = j.at("success");
        r.collision = j.at("collision");
        r.loss_time = j.at("loss_time");
        r.identified_time = j.at("identified_time");
        r.distance_integral = j.at("distance_integral");
        r.duration = j.at("duration");
        out.push_back(std::move(r));
        continue;
      }
      if (out.empty()) throw ConfigError("event before the first episode line");
      auto& r = out.back();
      if (type == "tick") {
        r.ticks.push_back(tick_from_json(j));
      } else if (type == "transition") {
        r.events.push_back({j.at("time"), adapt::follow_state_from_string(j.at("from")),
                            adapt::follow_state_from_string(j.at("to")),
                            flags_from(j.at("flags"))});
      } else if (type == "snapshot") {
        PlannerSnapshot s;
        s.time = j.at("time");
        s.hulls = polylines_from(j.at("hulls"));
        s.goal_shapes = polylines_from(j.at("goals"));
        s.candidates = polylines_from(j.at("candidates"));
        s.selected = points_from(j.at("selected"));
        r.snapshots.push_back(std::move(s));
      } else {
        throw ConfigError("unknown event type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("trace line " + std::to_string(line_no) + ": " + e.what());
  }
  return out;
}

void emit_trace(std::span<const RunRecord> records, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << trace_to_string(records);
  if (!os) throw IoError("write failed for " + path.string());
}

std::vector<RunRecord> parse_trace(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return trace_from_string(ss.str());
}

std::vector<RunRecord> load_traces(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) {
    auto recs = parse_trace(f);
    out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return out;
}

}  // namespace leadfollow::harness
