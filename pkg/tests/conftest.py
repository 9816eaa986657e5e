"""Pytest configuration and shared fixtures."""

import json
import os

import numpy as np
import pytest

from geo_carbon_scheduler.types.traces import CapInstance
from geo_carbon_scheduler.utils.config import DATA_DIR, DEFAULT_CONFIG_PATH, load_run_config
from geo_carbon_scheduler.utils.trace_loader import load_bundle


def make_instance(
    intensity,
    demand,
    latency,
    slo_ms=100.0,
    capacity=100,
    max_servers=10,
    alpha=0.5,
    hour=None,
):
    """Build a CapInstance from plain lists; scalar capacity is broadcast."""
    n = len(intensity)
    if np.ndim(capacity) == 0:
        capacity = [capacity] * n
    return CapInstance(
        intensity=np.array(intensity, dtype=float),
        demand=np.array(demand, dtype=np.int64),
        latency=np.array(latency, dtype=float),
        slo_ms=slo_ms,
        capacity=np.array(capacity, dtype=np.int64),
        max_servers=max_servers,
        alpha=alpha,
        hour=hour,
    )


def write_trace_set(directory, regions, latency, carbon, workload, **config):
    """Write a small region/latency/carbon/workload set plus config.json; returns the config path.

    ``carbon`` and ``workload`` map region -> list of hourly values starting at hour 0.
    """
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "regions.csv").write_text("".join(f"{r}\n" for r in regions), encoding="utf-8")

    lines = ["origin," + ",".join(regions)]
    for origin, row in zip(regions, latency):
        lines.append(origin + "," + ",".join(str(v) for v in row))
    (directory / "latency.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    for name, values in (("carbon", carbon), ("workload", workload)):
        rows = ["region,hour,value"]
        for region in regions:
            rows.extend(f"{region},{h},{v}" for h, v in enumerate(values[region]))
        (directory / f"{name}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    payload = {
        "regions": "regions.csv",
        "latency": "latency.csv",
        "carbon": "carbon.csv",
        "workload": "workload.csv",
        **config,
    }
    path = directory / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def instance_factory():
    """Provide the instance builder."""
    return make_instance


@pytest.fixture
def trace_set_factory():
    """Provide the trace-set writer."""
    return write_trace_set


@pytest.fixture(scope="session")
def bundled_bundle():
    """The bundled six-region, one-week synthetic traces."""
    return load_bundle(
        DATA_DIR / "regions.csv",
        DATA_DIR / "latency.csv",
        DATA_DIR / "carbon.csv",
        DATA_DIR / "workload.csv",
    )


@pytest.fixture(scope="session")
def bundled_config():
    """The bundled run configuration."""
    return load_run_config(str(DEFAULT_CONFIG_PATH))


@pytest.fixture
def two_region_config(tmp_path):
    """A dirty/green pair 10 ms apart with a constant 24-hour trace."""
    return write_trace_set(
        tmp_path / "two",
        ["dirty", "green"],
        [[1, 10], [10, 1]],
        carbon={"dirty": [500.0] * 24, "green": [50.0] * 24},
        workload={"dirty": [1.0] * 24, "green": [0.5] * 24},
        policies=["latency", "carbon-20"],
        timesteps_per_hour=12,
    )


@pytest.fixture(autouse=True)
def reset_environment():
    """Reset environment variables before each test."""
    original_env = os.environ.copy()

    for var in ("GEO_CARBON_CONFIG", "GEO_CARBON_OUT_DIR", "GEO_CARBON_LOG_LEVEL", "PORT"):
        os.environ.pop(var, None)

    yield

    os.environ.clear()
    os.environ.update(original_env)


# Configure pytest-asyncio
pytest_plugins = ("pytest_asyncio",)
