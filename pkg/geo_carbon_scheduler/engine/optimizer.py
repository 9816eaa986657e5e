"""Exact hourly provisioning and routing (carbon-aware provisioner).

For a fixed server vector the routing problem is a transportation problem
whose per-unit costs depend on the destination only, so it is solved
integrally with a min-cost max-flow. The server vector is found by
branch-and-bound on an LP relaxation in which server counts are continuous.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from ortools.graph.python import min_cost_flow
from scipy.optimize import linprog

from ..types.models import ProvisioningPlan
from ..types.traces import CapInstance, LatencyMatrix, RegionSet, as_vector
from ..utils.errors import DimensionMismatch, InvalidParam

logger = logging.getLogger(__name__)

# integer routing-cost units per millisecond, used only to break ties
LATENCY_RESOLUTION = 100
# relaxation bounds closer than this to the incumbent are still explored
BOUND_MARGIN = 1e-7
TIE_TOLERANCE = 1e-12
_INTEGRAL_EPS = 1e-9
_COST_LIMIT = 2**62

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def build_instance(
    regions: RegionSet,
    carbon_forecast: Union[Sequence[float], np.ndarray],
    demand_forecast: Union[Sequence[float], np.ndarray],
    latency: LatencyMatrix,
    *,
    slo_ms: float,
    alpha: float,
    capacity: Union[int, Sequence[int]],
    max_servers: int,
    hour: Optional[int] = None,
) -> CapInstance:
    """Assemble one hour's instance.

    ``demand_forecast`` is the expected number of arrivals per origin over the
    hour; it is rounded half-up to whole requests.
    """
    n = regions.n
    if latency.regions != regions:
        raise DimensionMismatch("latency matrix was loaded for a different region set")
    intensity = as_vector(carbon_forecast, n, "carbon forecast")
    expected = as_vector(demand_forecast, n, "workload forecast")
    if not np.all(np.isfinite(expected)) or np.any(expected < 0):
        raise InvalidParam("expected arrivals must be finite and >= 0")

    return CapInstance(
        intensity=intensity,
        demand=np.floor(expected + 0.5).astype(np.int64),
        latency=latency.ell,
        slo_ms=slo_ms,
        capacity=as_vector(capacity, n, "server capacity"),
        max_servers=max_servers,
        alpha=alpha,
        hour=hour,
    )


def feasible_arcs(inst: CapInstance) -> FrozenSet[Tuple[int, int]]:
    """Origin/destination pairs whose latency is within the SLO."""
    return inst.arcs()


def servers_needed(inst: CapInstance, inbound: np.ndarray) -> np.ndarray:
    """Fewest servers per destination that carry ``inbound`` requests."""
    inbound = np.asarray(inbound, dtype=np.int64)
    return -(-inbound // inst.capacity)


def plan_terms(
    inst: CapInstance, x: np.ndarray, s: np.ndarray, u: np.ndarray
) -> Tuple[float, float, int]:
    """Objective, raw carbon term and server term of a candidate plan."""
    inbound = x.sum(axis=0)
    carbon_term = float(np.dot(inst.intensity, inbound))
    server_term = int(s.sum())
    objective = (
        float(np.dot(inst.carbon_weights(), inbound))
        + inst.server_weight * server_term
        + inst.penalty * int(u.sum())
    )
    return objective, carbon_term, server_term


def make_plan(
    inst: CapInstance, x: np.ndarray, s: np.ndarray, u: np.ndarray
) -> ProvisioningPlan:
    objective, carbon_term, server_term = plan_terms(inst, x, s, u)
    return ProvisioningPlan(
        hour=inst.hour,
        s=[int(v) for v in s],
        x=[[int(v) for v in row] for row in x],
        unserved=[int(v) for v in u],
        objective=objective,
        carbon_term=carbon_term,
        server_term=server_term,
    )


class Router:
    """Integral routing for fixed per-destination capacities.

    Maximizes served requests, then minimizes carbon, then total latency.
    Carbon enters as the dense rank of each destination's intensity: with
    destination-only costs the optimal inbound vector depends only on that
    order, which keeps every cost integral.
    """

    def __init__(self, inst: CapInstance, mask: np.ndarray) -> None:
        self.inst = inst
        self.origins, self.destinations = np.nonzero(mask)

        if inst.alpha > 0:
            rank = np.unique(inst.intensity, return_inverse=True)[1].astype(np.int64)
        else:
            rank = np.zeros(inst.n, dtype=np.int64)
        latency = np.rint(
            inst.latency[self.origins, self.destinations] * LATENCY_RESOLUTION
        ).astype(np.int64)

        total = max(inst.total_demand, 1)
        weight = int(latency.max(initial=0)) * total + 1
        if weight * (int(rank.max(initial=0)) + 1) * total >= _COST_LIMIT:
            logger.debug("latency tie-break disabled: routing costs would overflow")
            latency = np.zeros_like(latency)
            weight = 1
        self.arc_costs = latency
        self.destination_costs = rank * weight

    def route(self, caps: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return (x, u) for destination capacities ``caps`` (requests)."""
        inst = self.inst
        n = inst.n
        sink = 2 * n
        demand = inst.demand

        smcf = min_cost_flow.SimpleMinCostFlow()
        starts = np.concatenate([self.origins, n + np.arange(n)]).astype(np.int64)
        ends = np.concatenate([n + self.destinations, np.full(n, sink)]).astype(np.int64)
        capacities = np.concatenate([demand[self.origins], caps]).astype(np.int64)
        costs = np.concatenate([self.arc_costs, self.destination_costs]).astype(np.int64)
        arcs = smcf.add_arcs_with_capacity_and_unit_cost(starts, ends, capacities, costs)

        supplies = np.concatenate([demand, np.zeros(n, dtype=np.int64), [-inst.total_demand]])
        smcf.set_nodes_supplies(np.arange(2 * n + 1), supplies.astype(np.int64))

        status = smcf.solve_max_flow_with_min_cost()
        if status != smcf.OPTIMAL:
            raise RuntimeError(f"routing subproblem failed with status {status}")

        flows = smcf.flows(arcs)
        x = np.zeros((n, n), dtype=np.int64)
        x[self.origins, self.destinations] = flows[: len(self.origins)]
        u = demand - x.sum(axis=1)
        return x, u


class Relaxation:
    """LP relaxation with continuous server counts inside box bounds."""

    def __init__(self, inst: CapInstance, mask: np.ndarray) -> None:
        n = inst.n
        origins, destinations = np.nonzero(mask)
        m = len(origins)
        self.n, self.m = n, m
        self.destinations = destinations

        self.cost = np.concatenate(
            [
                inst.carbon_weights()[destinations],
                np.full(n, inst.penalty),
                np.full(n, inst.server_weight),
            ]
        )

        a_eq = np.zeros((n, m + 2 * n))
        a_eq[origins, np.arange(m)] = 1.0
        a_eq[np.arange(n), m + np.arange(n)] = 1.0
        self.a_eq, self.b_eq = a_eq, inst.demand.astype(float)

        a_ub = np.zeros((n + 1, m + 2 * n))
        a_ub[destinations, np.arange(m)] = 1.0
        a_ub[np.arange(n), m + n + np.arange(n)] = -inst.capacity
        a_ub[n, m + n :] = 1.0
        self.a_ub = a_ub
        self.b_ub = np.concatenate([np.zeros(n), [float(inst.max_servers)]])

    def solve(
        self, lo: np.ndarray, hi: np.ndarray
    ) -> Optional[Tuple[float, np.ndarray, np.ndarray]]:
        """Return (bound, inbound, servers) or None when the box is infeasible."""
        bounds = [(0.0, None)] * (self.m + self.n) + [
            (float(a), float(b)) for a, b in zip(lo, hi)
        ]
        res = linprog(
            self.cost,
            A_ub=self.a_ub,
            b_ub=self.b_ub,
            A_eq=self.a_eq,
            b_eq=self.b_eq,
            bounds=bounds,
            method="highs-ds",
            options=_LP_OPTIONS,
        )
        if res.status != 0:
            return None
        inbound = np.bincount(self.destinations, weights=res.x[: self.m], minlength=self.n)
        return float(res.fun), inbound, res.x[self.m + self.n :]


@dataclass
class Candidate:
    """An integer-feasible plan found during the search."""

    objective: float
    latency: float
    x: np.ndarray
    s: np.ndarray
    u: np.ndarray

    def key(self) -> Tuple:
        # lower total latency, then load on lower destination indices
        return (self.latency, tuple(-self.x.sum(axis=0)))

    def beats(self, other: Optional["Candidate"]) -> bool:
        if other is None or self.objective < other.objective - TIE_TOLERANCE:
            return True
        if abs(self.objective - other.objective) <= TIE_TOLERANCE:
            return self.key() < other.key()
        return False


@dataclass
class BranchAndBound:
    """Depth-first branch-and-bound over server counts."""

    inst: CapInstance
    mask: np.ndarray
    nodes: int = 0
    _cache: Dict[Tuple[int, ...], Candidate] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.router = Router(self.inst, self.mask)
        self.relaxation = Relaxation(self.inst, self.mask)

    def evaluate(self, servers: np.ndarray) -> Candidate:
        """Route with ``servers`` and shrink every region to the servers it uses."""
        key = tuple(int(v) for v in servers)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        inst = self.inst
        x, u = self.router.route(servers * inst.capacity)
        s = servers_needed(inst, x.sum(axis=0))
        objective, _, _ = plan_terms(inst, x, s, u)
        latency = float((x * inst.latency).sum())
        candidate = Candidate(objective, latency, x, s, u)
        self._cache[key] = candidate
        return candidate

    def run(self) -> Candidate:
        inst = self.inst
        budget = inst.max_servers
        reach = inst.demand @ self.mask
        hi = np.minimum(budget, -(-reach // inst.capacity)).astype(np.int64)
        lo = np.zeros(inst.n, dtype=np.int64)

        best: Optional[Candidate] = None
        if hi.sum() <= budget:
            best = self.evaluate(hi)
        else:
            x = np.zeros((inst.n, inst.n), dtype=np.int64)
            idle = np.zeros(inst.n, dtype=np.int64)
            objective, _, _ = plan_terms(inst, x, idle, inst.demand)
            best = Candidate(objective, 0.0, x, idle, inst.demand.copy())

        stack: List[Tuple[np.ndarray, np.ndarray]] = [(lo, hi)]
        while stack:
            lo, hi = stack.pop()
            if lo.sum() > budget:
                continue
            relaxed = self.relaxation.solve(lo, hi)
            self.nodes += 1
            if relaxed is None:
                continue
            bound, inbound, _ = relaxed
            if bound - BOUND_MARGIN >= best.objective:
                continue

            servers = np.maximum(lo, inbound / inst.capacity)
            rounded = np.clip(np.ceil(servers - _INTEGRAL_EPS), lo, hi).astype(np.int64)
            if rounded.sum() <= budget:
                candidate = self.evaluate(rounded)
                if candidate.beats(best):
                    best = candidate

            frac = servers - np.floor(servers + _INTEGRAL_EPS)
            fractional = np.nonzero(frac > _INTEGRAL_EPS)[0]
            if fractional.size == 0:
                continue
            j = fractional[np.argmin(np.abs(frac[fractional] - 0.5))]
            floor_j = int(math.floor(servers[j]))

            down_hi = hi.copy()
            down_hi[j] = floor_j
            up_lo = lo.copy()
            up_lo[j] = floor_j + 1
            stack.append((lo, down_hi))
            stack.append((up_lo, hi))

        return best


def solve_cap(inst: CapInstance) -> ProvisioningPlan:
    """Solve one hour exactly: the returned plan attains the minimum objective."""
    if inst.total_demand == 0:
        zeros = np.zeros(inst.n, dtype=np.int64)
        return make_plan(inst, np.zeros((inst.n, inst.n), dtype=np.int64), zeros, zeros)

    search = BranchAndBound(inst, inst.arc_mask())
    best = search.run()
    plan = make_plan(inst, best.x, best.s, best.u)
    logger.debug(
        "hour %s: objective %.9f after %d nodes, %d servers, %d unserved",
        inst.hour,
        plan.objective,
        search.nodes,
        plan.server_term,
        sum(plan.unserved),
    )
    if any(plan.unserved):
        logger.warning(
            "hour %s: %d requests cannot be placed within %.0f ms and %d servers",
            inst.hour,
            sum(plan.unserved),
            inst.slo_ms,
            inst.max_servers,
        )
    return plan


def verify_plan(inst: CapInstance, plan: ProvisioningPlan) -> List[str]:
    """Check a plan against every constraint; returns the violations found."""
    n = inst.n
    if len(plan.s) != n or len(plan.unserved) != n or len(plan.x) != n or any(
        len(row) != n for row in plan.x
    ):
        return [f"shape: plan dimensions do not match {n} regions"]

    violations: List[str] = []
    x = np.array(plan.x, dtype=np.int64)
    s = np.array(plan.s, dtype=np.int64)
    u = np.array(plan.unserved, dtype=np.int64)
    inbound = x.sum(axis=0)

    if (x < 0).any() or (s < 0).any() or (u < 0).any():
        violations.append("integrality: counts must be non-negative integers")

    for i in np.nonzero(x.sum(axis=1) + u != inst.demand)[0]:
        violations.append(
            f"demand_conservation: origin {i} routes {int(x[i].sum())} + "
            f"{int(u[i])} unserved != {int(inst.demand[i])}"
        )

    for j in np.nonzero(inbound > s * inst.capacity)[0]:
        violations.append(
            f"capacity: destination {j} receives {int(inbound[j])} > "
            f"{int(s[j])} x {int(inst.capacity[j])}"
        )

    if s.sum() > inst.max_servers:
        violations.append(f"server_budget: {int(s.sum())} servers > {inst.max_servers}")

    for i, j in zip(*np.nonzero((x > 0) & ~inst.arc_mask())):
        violations.append(
            f"latency_slo: {int(x[i, j])} requests {i}->{j} at "
            f"{inst.latency[i, j]:g} ms > {inst.slo_ms:g} ms"
        )

    needed = servers_needed(inst, inbound)
    for j in np.nonzero(s > needed)[0]:
        violations.append(
            f"idle_servers: destination {j} has {int(s[j])} servers for "
            f"{int(inbound[j])} requests, needs {int(needed[j])}"
        )

    objective, carbon_term, server_term = plan_terms(inst, x, s, u)
    if (
        abs(objective - plan.objective) > 1e-9 * max(1.0, abs(objective))
        or abs(carbon_term - plan.carbon_term) > 1e-9 * max(1.0, abs(carbon_term))
        or server_term != plan.server_term
    ):
        violations.append("objective: reported terms do not match the plan")

    return violations
