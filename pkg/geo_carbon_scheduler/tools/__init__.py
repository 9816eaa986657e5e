"""MCP tools for the geo-carbon scheduler."""

from .scheduling import (
    handle_run_simulation,
    handle_solve_hour,
    handle_sweep_policies,
    handle_validate_traces,
    run_simulation_tool,
    solve_hour_tool,
    sweep_policies_tool,
    validate_traces_tool,
)

__all__ = [
    "validate_traces_tool",
    "solve_hour_tool",
    "run_simulation_tool",
    "sweep_policies_tool",
    "handle_validate_traces",
    "handle_solve_hour",
    "handle_run_simulation",
    "handle_sweep_policies",
]
