"""Provisioning, scheduling and simulation engine."""

from .optimizer import build_instance, feasible_arcs, solve_cap, verify_plan
from .brute_force import brute_force_cap
from .scheduler import derive_weights, dispatch, dispatch_batch
from .simulator import SimConfig, run_hour, run_simulation
from .policies import apply_policy, parse_policy
from .sweep import sweep
from .service import SchedulerService

__all__ = [
    "build_instance",
    "feasible_arcs",
    "solve_cap",
    "verify_plan",
    "brute_force_cap",
    "derive_weights",
    "dispatch",
    "dispatch_batch",
    "SimConfig",
    "run_hour",
    "run_simulation",
    "apply_policy",
    "parse_policy",
    "sweep",
    "SchedulerService",
]
