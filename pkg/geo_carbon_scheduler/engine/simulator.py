"""Trace-driven, hour-by-hour simulation of one policy."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..types.models import (
    HourlyReport,
    PolicySpec,
    RegionHourStats,
    RegionProvisioning,
    RunConfig,
    SimulationResult,
    SummaryReport,
)
from ..types.traces import TraceBundle
from ..utils.errors import InvalidParam, TraceExhausted
from .arrivals import ARRIVAL_MEAN_RATIO, generate_arrivals
from .forecast import Forecaster, forecast_vector
from .policies import HourInputs, plan_hour
from .scheduler import RegionLoadState, derive_weights, dispatch_batch

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600
PERCENTILE = 0.95


@dataclass(frozen=True)
class SimConfig:
    """Settings of one simulation run."""

    policy: PolicySpec
    hours: int
    start_hour: int = 0
    timesteps_per_hour: int = 60
    seed: int = 42
    energy_per_request: float = 1e-4
    carbon_forecaster: Forecaster = field(default_factory=Forecaster)
    workload_forecaster: Forecaster = field(default_factory=Forecaster)
    bucket_minutes: int = 10

    def __post_init__(self) -> None:
        if self.hours < 0:
            raise InvalidParam(f"hours must be >= 0, got {self.hours}")
        if self.timesteps_per_hour < 1:
            raise InvalidParam(f"timesteps_per_hour must be >= 1, got {self.timesteps_per_hour}")
        if not self.energy_per_request > 0:
            raise InvalidParam(f"energy_per_request must be > 0, got {self.energy_per_request}")
        if not 1 <= self.bucket_minutes <= 60:
            raise InvalidParam(f"bucket_minutes must lie in [1, 60], got {self.bucket_minutes}")

    @classmethod
    def from_run_config(
        cls, config: RunConfig, policy: PolicySpec, bundle: TraceBundle
    ) -> "SimConfig":
        """Use the whole trace from ``start_hour`` when ``hours`` is not set."""
        hours = config.hours
        if hours is None:
            hours = max(bundle.end_hour - config.start_hour, 0)
        return cls(
            policy=policy,
            hours=hours,
            start_hour=config.start_hour,
            timesteps_per_hour=config.timesteps_per_hour,
            seed=config.seed,
            energy_per_request=config.energy_per_request,
            carbon_forecaster=Forecaster(config.carbon_forecaster),
            workload_forecaster=Forecaster(config.workload_forecaster),
            bucket_minutes=config.bucket_minutes,
        )

    @property
    def num_buckets(self) -> int:
        return math.ceil(60 / self.bucket_minutes)


class SimState:
    """State carried from hour to hour: the two random streams and forecast errors."""

    def __init__(self, seed: int) -> None:
        arrival_seq, dispatch_seq = np.random.SeedSequence(seed).spawn(2)
        # arrivals draw from their own stream so every policy sees the same workload
        self.arrival_rng = np.random.default_rng(arrival_seq)
        self.dispatch_rng = np.random.default_rng(dispatch_seq)
        self.carbon_errors: List[float] = []
        self.workload_errors: List[float] = []

    def record_forecast(self, predicted: np.ndarray, actual: np.ndarray, errors: List[float]) -> None:
        nonzero = actual > 0
        relative = np.abs(predicted[nonzero] - actual[nonzero]) / actual[nonzero]
        errors.extend(float(v) for v in relative)


def weighted_percentile(values: np.ndarray, counts: np.ndarray, q: float = PERCENTILE) -> float:
    """Nearest-rank percentile of ``values`` repeated ``counts`` times (0 when empty)."""
    values = np.asarray(values, dtype=float).reshape(-1)
    counts = np.asarray(counts, dtype=np.int64).reshape(-1)
    total = int(counts.sum())
    if total == 0:
        return 0.0
    order = np.argsort(values, kind="stable")
    cumulative = np.cumsum(counts[order])
    rank = max(math.ceil(q * total), 1)
    return float(values[order][np.searchsorted(cumulative, rank)])


def _mean_latency(arc_counts: np.ndarray, latency: np.ndarray) -> float:
    total = int(arc_counts.sum())
    return float((arc_counts * latency).sum() / total) if total else 0.0


def run_hour(
    hour: int, bundle: TraceBundle, config: SimConfig, state: SimState
) -> HourlyReport:
    """Forecast, plan, dispatch every request of ``hour`` and report."""
    if not bundle.covers(hour):
        raise TraceExhausted(
            f"hour {hour} is outside the traces [{bundle.start_hour}, {bundle.end_hour})"
        )

    regions = bundle.regions
    n = regions.n
    latency = bundle.latency.ell
    steps = config.timesteps_per_hour

    predicted_carbon = forecast_vector(config.carbon_forecaster, bundle.carbon, hour)
    predicted_rate = forecast_vector(config.workload_forecaster, bundle.workload, hour)
    actual_carbon = bundle.carbon.at(hour)
    actual_rate = bundle.workload.at(hour)
    state.record_forecast(predicted_carbon, actual_carbon, state.carbon_errors)
    state.record_forecast(predicted_rate, actual_rate, state.workload_errors)

    inputs = HourInputs(
        hour=hour,
        regions=regions,
        intensity=predicted_carbon,
        expected_arrivals=predicted_rate * SECONDS_PER_HOUR,
        latency=bundle.latency,
    )
    inst, plan = plan_hour(config.policy, inputs)
    weights = derive_weights(plan)
    load = RegionLoadState.for_plan(plan, inst)
    spillover = config.policy.kind != "latency_baseline"

    arrivals = np.stack(
        [
            generate_arrivals(rate * SECONDS_PER_HOUR, steps, state.arrival_rng)
            for rate in actual_rate
        ]
    )

    arc_counts = np.zeros((n, n), dtype=np.int64)
    buckets = np.zeros((config.num_buckets, n), dtype=np.int64)
    for step in range(steps):
        bucket = int((step * 60 / steps) // config.bucket_minutes)
        for origin in range(n):
            count = int(arrivals[origin, step])
            if not count:
                continue
            outcome = dispatch_batch(
                origin, count, weights, load, inst, state.dispatch_rng, spillover=spillover
            )
            served = outcome.served
            served[origin] += outcome.local_overload
            arc_counts[origin] += served
            buckets[bucket] += served

    originated = arrivals.sum(axis=1)
    stats = []
    for i, region in enumerate(regions.regions):
        capacity = int(load.capacity[i])
        served_i = int(load.served[i])
        stats.append(
            RegionHourStats(
                region=region,
                originated=int(originated[i]),
                served=served_i,
                emissions_g=served_i * float(actual_carbon[i]) * config.energy_per_request,
                utilization=served_i / capacity if capacity else 0.0,
                overloads=int(load.overloads[i]),
                spillovers=int(load.spillovers[i]),
                unserved_planned=int(plan.unserved[i]),
                servers=int(plan.s[i]),
                mean_latency_ms=_mean_latency(arc_counts[i], latency[i]),
            )
        )

    # overloads served at an origin that cannot meet the SLO locally
    local_violations = np.diag(latency) > inst.slo_ms
    report = HourlyReport(
        hour=hour,
        regions=stats,
        mean_latency_ms=_mean_latency(arc_counts, latency),
        p95_latency_ms=weighted_percentile(latency, arc_counts),
        slo_violations=int(load.overloads[local_violations].sum()),
        arc_counts=arc_counts.tolist(),
        bucket_served=buckets.tolist(),
        plan=plan,
    )
    logger.debug(
        "hour %d %s: %d requests, %.1f g, %d overloads",
        hour,
        config.policy.name,
        report.total_originated,
        report.total_emissions_g,
        int(load.overloads.sum()),
    )
    if report.slo_violations:
        logger.warning(
            "hour %d %s: %d overloaded requests served outside the SLO",
            hour,
            config.policy.name,
            report.slo_violations,
        )
    return report


def summarize(
    policy: PolicySpec,
    bundle: TraceBundle,
    reports: List[HourlyReport],
    state: Optional[SimState] = None,
) -> SummaryReport:
    """Aggregate hourly reports into run totals."""
    regions = list(bundle.regions.regions)
    n = len(regions)
    arc_totals = np.zeros((n, n), dtype=np.int64)
    servers = np.zeros((len(reports), n), dtype=np.int64)
    for k, report in enumerate(reports):
        counts = np.array(report.arc_counts, dtype=np.int64)
        arc_totals += counts
        servers[k] = [r.servers for r in report.regions]

    def mape(errors: List[float]) -> float:
        return float(np.mean(errors)) * 100.0 if errors else 0.0

    provisioning = [
        RegionProvisioning(
            region=region,
            mean_servers=float(servers[:, i].mean()) if reports else 0.0,
            max_servers=int(servers[:, i].max()) if reports else 0,
            server_hours=int(servers[:, i].sum()),
        )
        for i, region in enumerate(regions)
    ]

    return SummaryReport(
        policy=policy.name,
        hours=len(reports),
        total_originated=sum(r.total_originated for r in reports),
        total_served=sum(r.total_served for r in reports),
        total_emissions_g=sum(r.total_emissions_g for r in reports),
        mean_latency_ms=_mean_latency(arc_totals, bundle.latency.ell),
        p95_latency_ms=weighted_percentile(bundle.latency.ell, arc_totals),
        total_overloads=sum(s.overloads for r in reports for s in r.regions),
        total_spillovers=sum(s.spillovers for r in reports for s in r.regions),
        total_slo_violations=sum(r.slo_violations for r in reports),
        total_unserved_planned=sum(s.unserved_planned for r in reports for s in r.regions),
        provisioning=provisioning,
        redirections=arc_totals.tolist(),
        forecast_mape={
            "carbon": mape(state.carbon_errors) if state else 0.0,
            "workload": mape(state.workload_errors) if state else 0.0,
        },
        arrival_mean_ratio=ARRIVAL_MEAN_RATIO,
    )


def run_simulation(config: SimConfig, bundle: TraceBundle) -> SimulationResult:
    """Simulate ``config.hours`` hours starting at ``config.start_hour``."""
    state = SimState(config.seed)
    reports = [
        run_hour(hour, bundle, config, state)
        for hour in range(config.start_hour, config.start_hour + config.hours)
    ]
    summary = summarize(config.policy, bundle, reports, state)
    logger.info(
        "%s: %d hours, %.1f g CO2eq, mean latency %.1f ms, %d overloads",
        summary.policy,
        summary.hours,
        summary.total_emissions_g,
        summary.mean_latency_ms,
        summary.total_overloads,
    )
    return SimulationResult(policy=config.policy, reports=reports, summary=summary)
