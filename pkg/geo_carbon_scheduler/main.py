"""MCP server exposing the geo-carbon scheduler over stdio."""

import asyncio
import sys
from typing import Any

from dotenv import load_dotenv
from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent

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
from .utils import configure_logging, get_config, validate_config

# Load environment variables
load_dotenv()

config = get_config()
config_errors = validate_config(config)

if config_errors:
    print("Configuration errors:", file=sys.stderr)
    for error in config_errors:
        print(f"- {error}", file=sys.stderr)
    print("\nThe following environment variables are read:", file=sys.stderr)
    print("- GEO_CARBON_CONFIG (run configuration JSON, defaults to the bundled one)", file=sys.stderr)
    print("- GEO_CARBON_OUT_DIR (optional, defaults to ./out)", file=sys.stderr)
    print("- GEO_CARBON_LOG_LEVEL (optional, defaults to INFO)", file=sys.stderr)

service = SchedulerService(config)

app = Server("geo-carbon-scheduler")

TOOL_HANDLERS = {
    "validate_traces": handle_validate_traces,
    "solve_hour": handle_solve_hour,
    "run_simulation": handle_run_simulation,
    "sweep_policies": handle_sweep_policies,
}


@app.list_tools()
async def list_tools() -> list:
    """List all available tools."""
    return [
        validate_traces_tool,
        solve_hour_tool,
        run_simulation_tool,
        sweep_policies_tool,
    ]


@app.call_tool()
async def call_tool(name: str, arguments: dict[str, Any] | None) -> list[TextContent]:
    """Handle tool calls."""
    args = arguments or {}

    try:
        handler = TOOL_HANDLERS.get(name)
        if handler is None:
            raise ValueError(f"Unknown tool: {name}")

        result = await handler(service, args)
        return result["content"]

    except Exception as error:
        return [
            TextContent(
                type="text",
                text=f"Error: {error}",
            )
        ]


async def main():
    """Main entry point."""
    configure_logging(config.log_level if not config_errors else "INFO")
    print("Geo-carbon scheduler MCP server running on stdio", file=sys.stderr)
    print(f"Run configuration: {config.config_path}", file=sys.stderr)

    async with stdio_server() as (read_stream, write_stream):
        await app.run(
            read_stream,
            write_stream,
            app.create_initialization_options(),
        )


def run() -> None:
    asyncio.run(main())


if __name__ == "__main__":
    run()
