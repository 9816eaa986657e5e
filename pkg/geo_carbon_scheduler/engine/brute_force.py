"""Exhaustive reference solver for tiny instances."""

import itertools
import logging
from typing import List, Optional

import numpy as np

from ..types.models import ProvisioningPlan
from ..types.traces import CapInstance
from ..utils.errors import InstanceTooLarge
from .optimizer import TIE_TOLERANCE, make_plan, plan_terms, servers_needed

logger = logging.getLogger(__name__)

MAX_REGIONS = 3
MAX_SERVERS = 4
MAX_DEMAND = 6
MAX_CAPACITY = 3


def _check_size(inst: CapInstance) -> None:
    if (
        inst.n > MAX_REGIONS
        or inst.max_servers > MAX_SERVERS
        or int(inst.demand.max()) > MAX_DEMAND
        or int(inst.capacity.max()) > MAX_CAPACITY
    ):
        raise InstanceTooLarge(
            f"exhaustive search needs n <= {MAX_REGIONS}, K <= {MAX_SERVERS}, "
            f"demand <= {MAX_DEMAND}, capacity <= {MAX_CAPACITY}"
        )


def _placeable(inbound: np.ndarray, demand: np.ndarray, mask: np.ndarray) -> bool:
    """Hall's condition: every destination subset can be fed by the origins reaching it."""
    n = len(inbound)
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            cols = list(subset)
            feeders = mask[:, cols].any(axis=1)
            if inbound[cols].sum() > demand[feeders].sum():
                return False
    return True


def _assign(inbound: np.ndarray, demand: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Unit-by-unit augmenting paths filling each destination to exactly ``inbound``."""
    n = len(inbound)
    x = np.zeros((n, n), dtype=np.int64)
    left = demand.copy()

    def augment(j: int, seen: List[bool]) -> bool:
        for i in range(n):
            if not mask[i, j] or seen[i]:
                continue
            seen[i] = True
            if left[i] > 0:
                left[i] -= 1
                x[i, j] += 1
                return True
            # free one unit of origin i by moving it elsewhere
            for k in range(n):
                if k != j and x[i, k] > 0:
                    x[i, k] -= 1
                    if augment(k, seen):
                        x[i, j] += 1
                        return True
                    x[i, k] += 1
        return False

    for j in range(n):
        for _ in range(int(inbound[j])):
            if not augment(j, [False] * n):
                raise AssertionError("inbound vector is not placeable")
    return x


def brute_force_cap(inst: CapInstance) -> ProvisioningPlan:
    """Global optimum by enumerating every inbound vector.

    Any integer plan is determined, up to objective-neutral routing choices,
    by its per-destination inbound counts; servers are then the fewest that
    carry them.
    """
    _check_size(inst)
    n = inst.n
    mask = inst.arc_mask()
    reach = inst.demand @ mask
    weights = inst.carbon_weights()

    best_value: Optional[float] = None
    best_inbound: Optional[np.ndarray] = None
    for combo in itertools.product(*(range(int(r) + 1) for r in reach)):
        inbound = np.array(combo, dtype=np.int64)
        if inbound.sum() > inst.total_demand:
            continue
        servers = servers_needed(inst, inbound)
        if servers.sum() > inst.max_servers:
            continue
        if not _placeable(inbound, inst.demand, mask):
            continue
        value = (
            float(np.dot(weights, inbound))
            + inst.server_weight * int(servers.sum())
            + inst.penalty * (inst.total_demand - int(inbound.sum()))
        )
        if best_value is None or value < best_value - TIE_TOLERANCE:
            best_value, best_inbound = value, inbound

    x = _assign(best_inbound, inst.demand, mask)
    s = servers_needed(inst, best_inbound)
    u = inst.demand - x.sum(axis=1)
    logger.debug("exhaustive optimum %.12f", plan_terms(inst, x, s, u)[0])
    return make_plan(inst, x, s, u)
