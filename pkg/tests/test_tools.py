"""Test MCP tools definitions."""

from mcp.types import Tool

from geo_carbon_scheduler.tools import (
    run_simulation_tool,
    solve_hour_tool,
    sweep_policies_tool,
    validate_traces_tool,
)

ALL_TOOLS = [validate_traces_tool, solve_hour_tool, run_simulation_tool, sweep_policies_tool]


class TestToolDefinitions:
    """Test MCP tool definitions."""

    def test_all_tools_are_tool_instances(self):
        """Test that all tool definitions are proper Tool instances."""
        for tool in ALL_TOOLS:
            assert isinstance(tool, Tool)
            assert tool.inputSchema["type"] == "object"

    def test_tool_names_are_unique(self):
        """Test that all tool names are unique."""
        names = [tool.name for tool in ALL_TOOLS]
        assert len(names) == len(set(names)), "Tool names must be unique"

    def test_validate_traces_tool(self):
        """Test validate_traces tool definition."""
        tool = validate_traces_tool

        assert tool.name == "validate_traces"
        assert "validate" in tool.description.lower()
        assert tool.inputSchema["required"] == []
        for kind in ("regions", "latency", "carbon", "workload"):
            assert tool.inputSchema["properties"][kind]["type"] == "string"

    def test_solve_hour_tool(self):
        """Test solve_hour tool definition."""
        tool = solve_hour_tool

        assert tool.name == "solve_hour"
        assert "hour" in tool.description.lower()
        assert tool.inputSchema["required"] == ["hour"]
        assert tool.inputSchema["properties"]["hour"]["type"] == "integer"
        assert "policy" in tool.inputSchema["properties"]

    def test_run_simulation_tool(self):
        """Test run_simulation tool definition."""
        tool = run_simulation_tool

        assert tool.name == "run_simulation"
        assert "simulate" in tool.description.lower()
        assert tool.inputSchema["required"] == []
        for key in ("policy", "out_dir", "seed", "hours"):
            assert key in tool.inputSchema["properties"]

    def test_sweep_policies_tool(self):
        """Test sweep_policies tool definition."""
        tool = sweep_policies_tool

        assert tool.name == "sweep_policies"
        assert "baseline" in tool.description.lower()
        slos = tool.inputSchema["properties"]["slos"]
        assert slos["type"] == "array"
        assert slos["items"]["exclusiveMinimum"] == 0

    def test_run_overrides_are_optional(self):
        """Test seed and hours can be omitted."""
        for tool in (run_simulation_tool, sweep_policies_tool):
            properties = tool.inputSchema["properties"]
            assert properties["seed"]["type"] == "integer"
            assert properties["hours"]["minimum"] == 0
            assert "seed" not in tool.inputSchema["required"]
