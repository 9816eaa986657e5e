"""HTTP wrapper exposing the scheduler tools."""

from typing import Any, Dict

from dotenv import load_dotenv
from fastapi import Body, FastAPI, HTTPException
from uvicorn import run

from . import __version__
from .engine.service import SchedulerService
from .tools import (
    handle_run_simulation,
    handle_solve_hour,
    handle_sweep_policies,
    handle_validate_traces,
    run_simulation_tool,
    solve_hour_tool,
    sweep_policies_tool,
    validate_traces_tool,
)
from .utils import configure_logging, get_config

load_dotenv()

http_app = FastAPI(
    title="Geo-Carbon Scheduler",
    description="HTTP wrapper for the carbon-aware provisioning and scheduling tools",
    version=__version__,
)

config = get_config()
service = SchedulerService(config)

ALL_TOOLS = [validate_traces_tool, solve_hour_tool, run_simulation_tool, sweep_policies_tool]

# Map tool names to handlers
TOOL_HANDLERS = {
    "validate_traces": handle_validate_traces,
    "solve_hour": handle_solve_hour,
    "run_simulation": handle_run_simulation,
    "sweep_policies": handle_sweep_policies,
}


@http_app.get("/")
async def health_check():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "service": "geo-carbon-scheduler",
        "version": __version__,
        "config_path": config.config_path,
    }


@http_app.get("/tools")
async def list_tools():
    """List all available tools."""
    return {
        "tools": [
            {
                "name": tool.name,
                "description": tool.description,
                "inputSchema": tool.inputSchema,
            }
            for tool in ALL_TOOLS
        ]
    }


@http_app.post("/tools/{tool_name}")
async def call_tool(tool_name: str, arguments: Dict[str, Any] = Body(default={})):
    """Call a specific tool."""
    if tool_name not in TOOL_HANDLERS:
        raise HTTPException(status_code=404, detail=f"Tool '{tool_name}' not found")

    try:
        result = await TOOL_HANDLERS[tool_name](service, arguments)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

    return {
        "tool": tool_name,
        "arguments": arguments,
        "result": [{"type": content.type, "text": content.text} for content in result["content"]],
    }


def main():
    """Run HTTP server."""
    configure_logging(config.log_level)
    run(http_app, host="0.0.0.0", port=config.port)


if __name__ == "__main__":
    main()
