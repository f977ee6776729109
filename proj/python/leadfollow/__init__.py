"""Leader-following simulation, planning and evaluation harness."""

from ._leadfollow import (
    VARIANTS,
    ConfigError,
    Error,
    Infeasible,
    IoError,
    NoPath,
    RunRecord,
    Scenario,
    Tick,
    compute_metrics,
    goal_line_length,
    load_scenario,
    parse_scenario,
    render_svg,
    run_episode,
    run_scenario,
    safe_distance,
    speed_cap,
    trace_from_string,
    trace_to_string,
)

__all__ = [
    "VARIANTS",
    "ConfigError",
    "Error",
    "Infeasible",
    "IoError",
    "NoPath",
    "RunRecord",
    "Scenario",
    "Tick",
    "compute_metrics",
    "goal_line_length",
    "load_scenario",
    "parse_scenario",
    "render_svg",
    "run_episode",
    "run_scenario",
    "safe_distance",
    "speed_cap",
    "trace_from_string",
    "trace_to_string",
]
