"""Provisioning policies: the latency baseline and carbon optimization under an SLO."""

import logging
import math
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..types.models import PolicySpec, ProvisioningPlan
from ..types.traces import CapInstance, LatencyMatrix, RegionSet, as_vector
from ..utils.errors import InvalidSpec
from .optimizer import build_instance, make_plan, servers_needed, solve_cap

logger = logging.getLogger(__name__)

BASELINE_NAME = "latency"
_CARBON_NAME = re.compile(r"^carbon-(?P<slo>[0-9]+(?:\.[0-9]+)?)$")


def parse_policy(
    name: str,
    *,
    alpha: float = 0.5,
    capacity: Union[int, Sequence[int]] = 100,
    max_servers: int = 500,
) -> PolicySpec:
    """Turn ``latency`` or ``carbon-<L>`` into a validated PolicySpec."""
    capacity_list = [int(capacity)] if isinstance(capacity, (int, np.integer)) else list(capacity)
    key = name.strip().lower()
    if key == BASELINE_NAME:
        spec = PolicySpec(
            kind="latency_baseline", alpha=alpha, capacity=capacity_list, max_servers=max_servers
        )
    else:
        match = _CARBON_NAME.match(key)
        if match is None:
            raise InvalidSpec(f"unknown policy {name!r}: expected 'latency' or 'carbon-<L>'")
        spec = PolicySpec(
            kind="carbon_L",
            slo_ms=float(match.group("slo")),
            alpha=alpha,
            capacity=capacity_list,
            max_servers=max_servers,
        )

    problems = validate_spec(spec)
    if problems:
        raise InvalidSpec(f"policy {name!r}: {'; '.join(problems)}")
    return spec


def validate_spec(spec: PolicySpec) -> List[str]:
    """Return problems with a policy specification (empty when valid)."""
    errors: List[str] = []
    if spec.kind == "carbon_L":
        if spec.slo_ms is None or not spec.slo_ms > 0 or math.isnan(spec.slo_ms):
            errors.append(f"latency SLO must be > 0 ms, got {spec.slo_ms}")
    if not 0.0 <= spec.alpha <= 1.0:
        errors.append(f"alpha must lie in [0, 1], got {spec.alpha}")
    if not spec.capacity or any(c < 1 for c in spec.capacity):
        errors.append("server capacity must be >= 1")
    if spec.max_servers < 1:
        errors.append("max_servers must be >= 1")
    return errors


@dataclass(frozen=True)
class HourInputs:
    """Forecasts feeding one hour's provisioning decision."""

    hour: int
    regions: RegionSet
    intensity: np.ndarray
    expected_arrivals: np.ndarray
    latency: LatencyMatrix


@dataclass(frozen=True)
class FixedPlan:
    """A plan decided without the solver, with the instance it was made for."""

    instance: CapInstance
    plan: ProvisioningPlan


def _capacity_for(spec: PolicySpec, n: int) -> np.ndarray:
    values = spec.capacity[0] if len(spec.capacity) == 1 else spec.capacity
    return as_vector(values, n, "server capacity")


def apply_policy(spec: PolicySpec, inputs: HourInputs) -> Union[CapInstance, FixedPlan]:
    """Instance for the solver, or the baseline's local-only plan."""
    problems = validate_spec(spec)
    if problems:
        raise InvalidSpec("; ".join(problems))

    n = inputs.regions.n
    capacity = _capacity_for(spec, n)
    slo = math.inf if spec.kind == "latency_baseline" else spec.slo_ms
    inst = build_instance(
        inputs.regions,
        inputs.intensity,
        inputs.expected_arrivals,
        inputs.latency,
        slo_ms=slo,
        alpha=spec.alpha,
        capacity=capacity,
        max_servers=spec.max_servers,
        hour=inputs.hour,
    )
    if spec.kind == "carbon_L":
        return inst

    # serve every request where it originates, no server cap
    x = np.diag(inst.demand)
    s = servers_needed(inst, inst.demand)
    plan = make_plan(inst, x, s, np.zeros(n, dtype=np.int64))
    return FixedPlan(instance=inst, plan=plan)


def plan_hour(spec: PolicySpec, inputs: HourInputs) -> Tuple[CapInstance, ProvisioningPlan]:
    """Provisioning plan for one hour under ``spec``."""
    decided = apply_policy(spec, inputs)
    if isinstance(decided, FixedPlan):
        return decided.instance, decided.plan
    return decided, solve_cap(decided)


def unique_labels(specs: Sequence[PolicySpec]) -> List[str]:
    """Policy names, suffixed ``#2``, ``#3``... when a name repeats."""
    seen = {}
    labels = []
    for spec in specs:
        count = seen.get(spec.name, 0) + 1
        seen[spec.name] = count
        labels.append(spec.name if count == 1 else f"{spec.name}#{count}")
    return labels


def find_baseline(specs: Sequence[PolicySpec]) -> Optional[int]:
    """Index of the first latency baseline, if any."""
    for k, spec in enumerate(specs):
        if spec.kind == "latency_baseline":
            return k
    return None


def reduction(emissions: float, baseline: float) -> float:
    """Relative emissions saved against the baseline (0 when the baseline emits nothing)."""
    if baseline <= 0:
        return 0.0
    return 1.0 - emissions / baseline

