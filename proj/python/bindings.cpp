#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "leadfollow/adapt/adaptation.hpp"
#include "leadfollow/errors.hpp"
#include "leadfollow/harness/episode.hpp"
#include "leadfollow/harness/metrics.hpp"
#include "leadfollow/harness/render.hpp"
#include "leadfollow/harness/trace.hpp"

namespace py = pybind11;
using namespace leadfollow;

namespace {

adapt::AdaptationParams params_from(py::kwargs kw) {
  adapt::AdaptationParams p;
  for (auto [k, v] : kw) {
    const auto key = k.cast<std::string>();
    const double x = v.cast<double>();
    if (key == "alpha_goal_line") p.alpha_goal_line = x;
    else if (key == "alpha_nis") p.alpha_nis = x;
    else if (key == "d_min") p.d_min = x;
    else if (key == "d_max") p.d_max = x;
    else if (key == "alpha_1") p.alpha_1 = x;
    else if (key == "alpha_2") p.alpha_2 = x;
    else throw py::key_error("unknown adaptation parameter '" + key + "'");
  }
  p.validate();
  return p;
}

Vec2 vec(const std::pair<double, double>& p) { return {p.first, p.second}; }

py::dict metrics_dict(const harness::MetricsSummary& m) {
  py::dict d;
  d["episodes"] = m.episodes;
  d["follow_success_rate"] = m.follow_success_rate;
  d["avg_leader_loss_ratio"] = m.avg_leader_loss_ratio;
  d["collision_rate"] = m.collision_rate;
  d["avg_distance"] = m.avg_distance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_leadfollow, m) {
  m.doc() = "Leader-following simulation, planning and evaluation harness";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<Infeasible>(m, "Infeasible", base.ptr());
  py::register_exception<NoPath>(m, "NoPath", base.ptr());

  py::class_<harness::ScenarioConfig>(m, "Scenario")
      .def_readonly("name", &harness::ScenarioConfig::name)
      .def_readwrite("repeats", &harness::ScenarioConfig::repeats)
      .def_property_readonly("script_count",
                             [](const harness::ScenarioConfig& c) { return c.scripts.size(); })
      .def_property(
          "variant", [](const harness::ScenarioConfig& c) { return std::string(harness::to_string(c.variant)); },
          [](harness::ScenarioConfig& c, const std::string& v) { c.variant = harness::variant_from_string(v); })
      .def("truncate_scripts",
           [](harness::ScenarioConfig& c, std::size_t n) {
             if (n == 0) throw py::value_error("need at least one script");
             if (n < c.scripts.size()) c.scripts.resize(n);
           },
           "Keep only the first n leader scripts.")
      .def("__repr__", [](const harness::ScenarioConfig& c) {
        return "<Scenario " + c.name + ": " + std::to_string(c.scripts.size()) + " scripts x " +
               std::to_string(c.repeats) + " repeats>";
      });

  py::class_<harness::TickRecord>(m, "Tick")
      .def_readonly("time", &harness::TickRecord::time)
      .def_property_readonly("state", [](const harness::TickRecord& t) { return std::string(adapt::to_string(t.state)); })
      .def_property_readonly("robot", [](const harness::TickRecord& t) { return std::make_tuple(t.robot.x, t.robot.y, t.robot.theta); })
      .def_property_readonly("leader", [](const harness::TickRecord& t) { return std::make_tuple(t.leader.x, t.leader.y, t.leader.theta); })
      .def_readonly("visible", &harness::TickRecord::visible)
      .def_readonly("identified", &harness::TickRecord::identified)
      .def_readonly("distance", &harness::TickRecord::distance)
      .def_readonly("safe_distance", &harness::TickRecord::safe_distance)
      .def_readonly("v_cap", &harness::TickRecord::v_cap);

  py::class_<harness::RunRecord>(m, "RunRecord")
      .def_readonly("scenario", &harness::RunRecord::scenario)
      .def_property_readonly("variant", [](const harness::RunRecord& r) { return std::string(harness::to_string(r.variant)); })
      .def_readonly("script_index", &harness::RunRecord::script_index)
      .def_readonly("repeat", &harness::RunRecord::repeat)
      .def_readonly("seed", &harness::RunRecord::seed)
      .def_readonly("success", &harness::RunRecord::success)
      .def_readonly("collision", &harness::RunRecord::collision)
      .def_readonly("loss_time", &harness::RunRecord::loss_time)
      .def_readonly("duration", &harness::RunRecord::duration)
      .def_readonly("ticks", &harness::RunRecord::ticks)
      .def("states", [](const harness::RunRecord& r) {
        std::vector<std::string> out;
        for (const auto& e : r.events) out.emplace_back(adapt::to_string(e.to));
        return out;
      }, "Target state of every transition, in order.")
      .def("__eq__", [](const harness::RunRecord& a, const harness::RunRecord& b) { return a == b; });

  m.def("load_scenario", &harness::load_scenario, py::arg("path"));
  m.def("parse_scenario",
        [](const std::string& text) { return harness::parse_scenario(nlohmann::json::parse(text)); },
        py::arg("text"), "Parse a scenario from JSON text.");
  m.def("run_episode",
        [](const harness::ScenarioConfig& c, int script, int repeat, const std::string& variant) {
          py::gil_scoped_release release;
          return harness::run_episode(c, script, repeat, harness::variant_from_string(variant));
        },
        py::arg("scenario"), py::arg("script_index") = 0, py::arg("repeat") = 0, py::arg("variant") = "full");
  m.def("run_scenario",
        [](const harness::ScenarioConfig& c, const std::optional<std::string>& variant, unsigned threads) {
          py::gil_scoped_release release;
          return harness::run_scenario(c, variant ? harness::variant_from_string(*variant) : c.variant,
                                       threads);
        },
        py::arg("scenario"), py::arg("variant") = py::none(), py::arg("threads") = 0);
  m.def("compute_metrics",
        [](const std::vector<harness::RunRecord>& recs) {
          if (recs.empty()) throw py::value_error("compute_metrics: no records");
          return metrics_dict(harness::compute_metrics(recs));
        },
        py::arg("records"));
  m.def("trace_to_string", [](const std::vector<harness::RunRecord>& r) { return harness::trace_to_string(r); },
        py::arg("records"));
  m.def("trace_from_string", &harness::trace_from_string, py::arg("text"));
  m.def("render_svg",
        [](const harness::RunRecord& r, std::optional<std::size_t> snapshot) { return harness::render_svg(r, snapshot); },
        py::arg("record"), py::arg("snapshot") = py::none());

  m.def("safe_distance",
        [](double nis, py::kwargs kw) { return adapt::safe_distance(nis, params_from(kw)); },
        py::arg("nis"), "clamp(alpha_nis * nis, d_min, d_max)");
  m.def("goal_line_length",
        [](std::pair<double, double> robot, std::pair<double, double> leader, double map_width, double alpha) {
          return adapt::goal_line_length(vec(robot), vec(leader), map_width, alpha);
        },
        py::arg("robot"), py::arg("leader"), py::arg("map_width") = 8.0, py::arg("alpha") = 0.5);
  m.def("speed_cap",
        [](std::pair<double, double> velocity, std::pair<double, double> leader, std::pair<double, double> robot,
           double v_max, py::kwargs kw) {
          return adapt::speed_cap(vec(velocity), vec(leader), vec(robot), params_from(kw), v_max);
        },
        py::arg("leader_velocity"), py::arg("leader"), py::arg("robot"), py::arg("v_max") = 1.5);
  m.attr("VARIANTS") = std::vector<std::string>{"full", "no_dfb", "no_graph", "pursuit"};
}
