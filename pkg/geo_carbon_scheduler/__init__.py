"""Geo Carbon Scheduler - carbon-aware provisioning, request scheduling and trace replay."""

__version__ = "1.0.0"
