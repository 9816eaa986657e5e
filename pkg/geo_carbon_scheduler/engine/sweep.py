"""Run several policies on identical workloads and compare them."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

from ..types.models import (
    ComparisonReport,
    PolicyResult,
    PolicySpec,
    RunConfig,
    RunManifest,
    SimulationResult,
)
from ..types.traces import TraceBundle
from .policies import find_baseline, reduction, unique_labels
from .simulator import SimConfig, run_simulation

logger = logging.getLogger(__name__)


def _simulate(job: Tuple[SimConfig, TraceBundle]) -> SimulationResult:
    config, bundle = job
    return run_simulation(config, bundle)


def run_sweep(
    specs: Sequence[PolicySpec],
    config: RunConfig,
    bundle: TraceBundle,
    *,
    parallel: Optional[bool] = None,
) -> List[SimulationResult]:
    """Simulate every policy with the same seed, hours and traces."""
    jobs = [(SimConfig.from_run_config(config, spec, bundle), bundle) for spec in specs]
    use_pool = config.parallel if parallel is None else parallel
    if use_pool and len(jobs) > 1:
        logger.info("sweeping %d policies in a process pool", len(jobs))
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            return list(pool.map(_simulate, jobs))

    logger.info("sweeping %d policies", len(jobs))
    return [_simulate(job) for job in jobs]


def compare(
    specs: Sequence[PolicySpec],
    results: Sequence[SimulationResult],
    manifest: Optional[RunManifest] = None,
) -> ComparisonReport:
    """Per-policy totals; reductions are against the first latency baseline."""
    labels = unique_labels(specs)
    base = find_baseline(specs)
    base_emissions = results[base].summary.total_emissions_g if base is not None else None

    rows = []
    for label, result in zip(labels, results):
        summary = result.summary
        rows.append(
            PolicyResult(
                name=label,
                total_emissions_g=summary.total_emissions_g,
                reduction_vs_baseline=(
                    reduction(summary.total_emissions_g, base_emissions)
                    if base_emissions is not None
                    else None
                ),
                mean_latency_ms=summary.mean_latency_ms,
                p95_latency_ms=summary.p95_latency_ms,
                total_overloads=summary.total_overloads,
            )
        )
    return ComparisonReport(
        manifest=manifest,
        baseline=labels[base] if base is not None else None,
        policies=rows,
    )


def sweep(
    specs: Sequence[PolicySpec],
    config: RunConfig,
    bundle: TraceBundle,
    manifest: Optional[RunManifest] = None,
) -> ComparisonReport:
    """Simulate and compare ``specs``."""
    return compare(specs, run_sweep(specs, config, bundle), manifest)
