"""Scheduling tools for the geo-carbon MCP server."""

import json
from typing import Any, Dict

from mcp.types import TextContent, Tool

from ..engine.service import SchedulerService

_OVERRIDE_PROPERTIES = {
    "seed": {
        "type": "integer",
        "description": "Random seed (overrides the config file)",
    },
    "hours": {
        "type": "integer",
        "description": "Number of hours to simulate (default: the whole trace)",
        "minimum": 0,
    },
}

validate_traces_tool = Tool(
    name="validate_traces",
    description="Validate the region, latency, carbon and workload files",
    inputSchema={
        "type": "object",
        "properties": {
            kind: {"type": "string", "description": f"Path of the {kind} file (optional)"}
            for kind in ("regions", "latency", "carbon", "workload")
        },
        "required": [],
    },
)

solve_hour_tool = Tool(
    name="solve_hour",
    description="Compute the provisioning and routing plan for one hour",
    inputSchema={
        "type": "object",
        "properties": {
            "hour": {
                "type": "integer",
                "description": "Trace hour to plan",
                "minimum": 0,
            },
            "policy": {
                "type": "string",
                "description": "Policy name, 'latency' or 'carbon-<L>' (e.g. carbon-100)",
            },
        },
        "required": ["hour"],
    },
)

run_simulation_tool = Tool(
    name="run_simulation",
    description="Simulate one policy over the traces and write hourly and summary reports",
    inputSchema={
        "type": "object",
        "properties": {
            "policy": {
                "type": "string",
                "description": "Policy name (default: first policy in the config)",
            },
            "out_dir": {"type": "string", "description": "Output directory (optional)"},
            **_OVERRIDE_PROPERTIES,
        },
        "required": [],
    },
)

sweep_policies_tool = Tool(
    name="sweep_policies",
    description="Compare the latency baseline with carbon policies on identical workloads",
    inputSchema={
        "type": "object",
        "properties": {
            "slos": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "description": "Latency SLOs in ms, one carbon policy each (e.g. [20, 100, 400, 500])",
            },
            "out_dir": {"type": "string", "description": "Output directory (optional)"},
            **_OVERRIDE_PROPERTIES,
        },
        "required": [],
    },
)


def _text(title: str, payload: Any) -> Dict[str, Any]:
    return {
        "content": [
            TextContent(
                type="text",
                text=f"{title}:\n{json.dumps(payload, indent=2)}",
            )
        ]
    }


async def handle_validate_traces(service: SchedulerService, args: Dict[str, Any]) -> Dict[str, Any]:
    """Handle validate traces request."""
    paths = {kind: args.get(kind) for kind in ("regions", "latency", "carbon", "workload")}
    result = await service.validate(paths)

    if not result.success:
        raise ValueError(f"Failed to validate traces: {result.error_name}: {result.error}")

    return _text("All trace files are valid", result.data.model_dump(mode="json"))


async def handle_solve_hour(service: SchedulerService, args: Dict[str, Any]) -> Dict[str, Any]:
    """Handle solve hour request."""
    hour = int(args["hour"])
    result = await service.solve(hour, args.get("policy"))

    if not result.success:
        raise ValueError(f"Failed to solve hour {hour}: {result.error_name}: {result.error}")

    plan = result.data
    return _text(
        f"Plan for hour {hour} ({plan['policy']}), {plan['server_term']} servers",
        plan,
    )


async def handle_run_simulation(service: SchedulerService, args: Dict[str, Any]) -> Dict[str, Any]:
    """Handle run simulation request."""
    result = await service.run(
        args.get("policy"),
        out_dir=args.get("out_dir"),
        seed=args.get("seed"),
        hours=args.get("hours"),
    )

    if not result.success:
        raise ValueError(f"Failed to run simulation: {result.error_name}: {result.error}")

    return _text(f"Simulation written to {result.data['out_dir']}", result.data)


async def handle_sweep_policies(service: SchedulerService, args: Dict[str, Any]) -> Dict[str, Any]:
    """Handle sweep policies request."""
    result = await service.sweep(
        args.get("slos"),
        out_dir=args.get("out_dir"),
        seed=args.get("seed"),
        hours=args.get("hours"),
    )

    if not result.success:
        raise ValueError(f"Failed to sweep policies: {result.error_name}: {result.error}")

    comparison = result.data
    lines = [
        f"{row.name}: {row.total_emissions_g:.1f} g"
        + (
            f" ({row.reduction_vs_baseline:.1%} below {comparison.baseline})"
            if row.reduction_vs_baseline is not None
            else ""
        )
        for row in comparison.policies
    ]
    return _text(
        "Policy comparison\n" + "\n".join(lines),
        comparison.model_dump(mode="json", exclude={"manifest"}),
    )
