"""Routing weights and request dispatch (carbon-aware scheduler)."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from ..types.models import ProvisioningPlan, RoutingWeights
from ..types.traces import CapInstance

logger = logging.getLogger(__name__)


class DispatchOutcome(str, Enum):
    PLANNED = "planned"
    SPILLOVER = "spillover"
    LOCAL_OVERLOAD = "local_overload"


def derive_weights(plan: ProvisioningPlan) -> RoutingWeights:
    """Per-origin forwarding probabilities ``x[i][j] / sum_k x[i][k]``.

    Origins with nothing planned get an all-zero row and are served locally.
    ``f`` and ``t`` are the aggregate destination shares and inbound counts.
    """
    x = plan.x_array().astype(float)
    rows = x.sum(axis=1, keepdims=True)
    w = np.divide(x, rows, out=np.zeros_like(x), where=rows > 0)

    t = plan.inbound()
    total = int(t.sum())
    f = t / total if total else np.zeros(plan.n)
    return RoutingWeights(
        hour=plan.hour,
        w=w.tolist(),
        f=[float(v) for v in f],
        t=[int(v) for v in t],
    )


@dataclass
class RegionLoadState:
    """Requests served against provisioned capacity during one hour."""

    capacity: np.ndarray
    served: Optional[np.ndarray] = None
    overloads: Optional[np.ndarray] = None
    spillovers: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.capacity = np.asarray(self.capacity, dtype=np.int64)
        n = len(self.capacity)
        if self.served is None:
            self.served = np.zeros(n, dtype=np.int64)
        if self.overloads is None:
            self.overloads = np.zeros(n, dtype=np.int64)
        if self.spillovers is None:
            self.spillovers = np.zeros(n, dtype=np.int64)

    @classmethod
    def for_plan(cls, plan: ProvisioningPlan, inst: CapInstance) -> "RegionLoadState":
        return cls(capacity=np.asarray(plan.s, dtype=np.int64) * inst.capacity)

    def spare(self) -> np.ndarray:
        return np.maximum(self.capacity - self.served, 0)


def spillover_order(origin: int, inst: CapInstance) -> List[int]:
    """SLO-feasible destinations for ``origin``: greenest first, then nearest, then index."""
    reachable = np.nonzero(inst.latency[origin] <= inst.slo_ms)[0]
    return sorted(
        (int(j) for j in reachable),
        key=lambda j: (inst.intensity[j], inst.latency[origin, j], j),
    )


def _sample(origin: int, weights: RoutingWeights, rng: np.random.Generator) -> int:
    if weights.is_fallback(origin):
        return origin
    row = weights.cumulative()[origin]
    j = int(np.searchsorted(row, rng.random() * row[-1], side="right"))
    return min(j, len(row) - 1)


def dispatch(
    origin: int,
    weights: RoutingWeights,
    state: RegionLoadState,
    inst: CapInstance,
    rng: np.random.Generator,
) -> Tuple[int, DispatchOutcome]:
    """Place one request arriving at ``origin`` and update ``state``."""
    j = _sample(origin, weights, rng)
    if state.served[j] < state.capacity[j]:
        state.served[j] += 1
        return j, DispatchOutcome.PLANNED

    for k in spillover_order(origin, inst):
        if state.served[k] < state.capacity[k]:
            state.served[k] += 1
            state.spillovers[k] += 1
            return k, DispatchOutcome.SPILLOVER

    state.served[origin] += 1
    state.overloads[origin] += 1
    return origin, DispatchOutcome.LOCAL_OVERLOAD


@dataclass
class BatchOutcome:
    """Destinations of a batch of requests from one origin."""

    planned: np.ndarray
    spillover: np.ndarray
    local_overload: int

    @property
    def served(self) -> np.ndarray:
        """Requests placed per destination, overloads excluded."""
        return self.planned + self.spillover

    @property
    def total(self) -> int:
        return int(self.planned.sum() + self.spillover.sum()) + self.local_overload


def dispatch_batch(
    origin: int,
    count: int,
    weights: RoutingWeights,
    state: RegionLoadState,
    inst: CapInstance,
    rng: np.random.Generator,
    *,
    spillover: bool = True,
) -> BatchOutcome:
    """Place ``count`` requests from ``origin`` at once.

    Destinations are drawn jointly from the origin's weight row; requests whose
    draw finds no capacity spill over in greedy-carbon order and the rest are
    served at the origin as overloads. With ``spillover=False`` overflow goes
    straight to the origin.

    Every planned draw is resolved before any spillover. Per-destination
    totals usually match repeated :func:`dispatch`, but the planned/spillover
    split can differ: sequentially, a spilled request may take capacity that
    a later draw for that destination needed.
    """
    n = len(state.capacity)
    planned = np.zeros(n, dtype=np.int64)
    spilled = np.zeros(n, dtype=np.int64)
    if count <= 0:
        return BatchOutcome(planned, spilled, 0)

    if weights.is_fallback(origin):
        drawn = np.zeros(n, dtype=np.int64)
        drawn[origin] = count
    else:
        row = np.asarray(weights.w[origin], dtype=float)
        drawn = rng.multinomial(count, row / row.sum())

    planned = np.minimum(drawn, state.spare())
    state.served += planned
    overflow = int(count - planned.sum())

    if spillover and overflow:
        for k in spillover_order(origin, inst):
            take = min(overflow, int(state.spare()[k]))
            if take:
                spilled[k] += take
                overflow -= take
            if not overflow:
                break
        state.served += spilled
        state.spillovers += spilled

    if overflow:
        state.served[origin] += overflow
        state.overloads[origin] += overflow
    return BatchOutcome(planned, spilled, overflow)
