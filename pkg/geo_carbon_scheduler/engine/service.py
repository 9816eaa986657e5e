"""Service facade used by the CLI, the MCP tools and the HTTP wrapper."""

import asyncio
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..types.models import (
    ApiResponse,
    ComparisonReport,
    FileDiagnostic,
    PolicySpec,
    ProvisioningPlan,
    RunConfig,
    ServiceConfig,
    ValidationReport,
)
from ..types.traces import TraceBundle
from ..utils.config import apply_overrides, load_run_config
from ..utils.errors import GeoCarbonError, OutOfRange
from ..utils.trace_loader import (
    load_bundle,
    load_carbon_trace,
    load_latency_matrix,
    load_region_set,
    load_workload_trace,
)
from .forecast import Forecaster, forecast_vector
from .optimizer import verify_plan
from .policies import HourInputs, parse_policy, plan_hour, unique_labels
from .reporting import build_manifest, write_comparison, write_plot_data, write_run_artifacts
from .scheduler import derive_weights
from .simulator import SECONDS_PER_HOUR, SimConfig, run_simulation
from .sweep import compare, run_sweep

logger = logging.getLogger(__name__)


def policies_for_slos(slos: Sequence[float]) -> List[str]:
    """``latency`` followed by ``carbon-<L>`` for every SLO."""
    return ["latency", *(f"carbon-{slo:g}" for slo in slos)]


def _failure(error: Exception) -> ApiResponse:
    if isinstance(error, GeoCarbonError):
        return ApiResponse(success=False, error=str(error), error_name=error.name)
    logger.exception("unexpected failure")
    return ApiResponse(success=False, error=str(error), error_name="InternalError")


class SchedulerService:
    """Loads the run configuration and traces and runs the engine on request."""

    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self._run_config: Optional[RunConfig] = None

    def run_config(self, **overrides: Any) -> RunConfig:
        """The run configuration with non-None overrides applied (loaded once)."""
        if self._run_config is None:
            self._run_config = load_run_config(self.config.config_path)
        if any(value is not None for value in overrides.values()):
            return apply_overrides(self._run_config, overrides)
        return self._run_config

    def _bundle(self, config: RunConfig) -> TraceBundle:
        return load_bundle(config.regions, config.latency, config.carbon, config.workload)

    def _spec(self, name: str, config: RunConfig) -> PolicySpec:
        return parse_policy(
            name, alpha=config.alpha, capacity=config.capacity, max_servers=config.max_servers
        )

    def _out_dir(self, out_dir: Optional[str]) -> Path:
        return Path(out_dir or self.config.out_dir)

    # -- validate --------------------------------------------------------

    def _validate(self, paths: Dict[str, str]) -> ValidationReport:
        files: List[FileDiagnostic] = []

        def check(kind: str, loader) -> Any:
            try:
                value = loader()
            except GeoCarbonError as e:
                files.append(
                    FileDiagnostic(
                        kind=kind, path=paths[kind], ok=False, error_name=e.name, message=str(e)
                    )
                )
                return None
            files.append(FileDiagnostic(kind=kind, path=paths[kind], ok=True))
            return value

        regions = check("regions", lambda: load_region_set(paths["regions"]))
        if regions is None:
            for kind in ("latency", "carbon", "workload"):
                files.append(
                    FileDiagnostic(
                        kind=kind, path=paths[kind], ok=False, message="not checked: no region set"
                    )
                )
            return ValidationReport(ok=False, files=files)

        latency = check("latency", lambda: load_latency_matrix(paths["latency"], regions))
        carbon = check("carbon", lambda: load_carbon_trace(paths["carbon"], regions))
        workload = check("workload", lambda: load_workload_trace(paths["workload"], regions))
        if latency is not None and carbon is not None and workload is not None:
            # each file parses on its own; the traces must also cover the same hours
            try:
                load_bundle(paths["regions"], paths["latency"], paths["carbon"], paths["workload"])
            except GeoCarbonError as e:
                files[-1] = FileDiagnostic(
                    kind="workload",
                    path=paths["workload"],
                    ok=False,
                    error_name=e.name,
                    message=str(e),
                )
        return ValidationReport(ok=all(f.ok for f in files), files=files)

    async def validate(
        self, paths: Optional[Dict[str, Optional[str]]] = None
    ) -> ApiResponse[ValidationReport]:
        """Run every loader; ``paths`` entries replace the configured trace files."""
        try:
            resolved = self.run_config().trace_paths()
            resolved.update({k: v for k, v in (paths or {}).items() if v is not None})
            report = await asyncio.to_thread(self._validate, resolved)
            if report.ok:
                return ApiResponse(success=True, data=report)
            first = next(f for f in report.files if not f.ok and f.error_name)
            return ApiResponse(
                success=False,
                data=report,
                error=f"{first.kind}: {first.message}",
                error_name=first.error_name,
            )
        except Exception as e:
            return _failure(e)

    # -- solve -----------------------------------------------------------

    def _solve(self, hour: int, policy: Optional[str], config: RunConfig) -> Dict[str, Any]:
        bundle = self._bundle(config)
        if not bundle.covers(hour):
            raise OutOfRange(
                f"hour {hour} is outside the traces [{bundle.start_hour}, {bundle.end_hour})"
            )

        name = policy or next((p for p in config.policies if p != "latency"), config.policies[0])
        spec = self._spec(name, config)
        carbon = forecast_vector(Forecaster(config.carbon_forecaster), bundle.carbon, hour)
        rate = forecast_vector(Forecaster(config.workload_forecaster), bundle.workload, hour)
        inputs = HourInputs(
            hour=hour,
            regions=bundle.regions,
            intensity=carbon,
            expected_arrivals=rate * SECONDS_PER_HOUR,
            latency=bundle.latency,
        )
        inst, plan = plan_hour(spec, inputs)

        restored = ProvisioningPlan.from_json(plan.to_json())
        if spec.kind == "carbon_L":
            violations = verify_plan(inst, restored)
            if violations:
                raise RuntimeError(f"plan violates constraints: {'; '.join(violations)}")

        manifest = build_manifest(self.config.config_path, config, self.config.out_dir, [name])
        return {
            "policy": spec.name,
            "regions": list(bundle.regions.regions),
            **restored.model_dump(mode="json"),
            "weights": derive_weights(restored).model_dump(mode="json"),
            "manifest": manifest.model_dump(mode="json"),
        }

    async def solve(
        self, hour: int, policy: Optional[str] = None, **overrides: Any
    ) -> ApiResponse[Dict[str, Any]]:
        """Provisioning plan for one hour."""
        try:
            config = self.run_config(**overrides)
            data = await asyncio.to_thread(self._solve, hour, policy, config)
            return ApiResponse(success=True, data=data)
        except Exception as e:
            return _failure(e)

    # -- run -------------------------------------------------------------

    def _run(self, policy: Optional[str], config: RunConfig, out_dir: Path) -> Dict[str, Any]:
        bundle = self._bundle(config)
        name = policy or config.policies[0]
        spec = self._spec(name, config)
        result = run_simulation(SimConfig.from_run_config(config, spec, bundle), bundle)

        manifest = build_manifest(self.config.config_path, config, str(out_dir), [name])
        files = write_run_artifacts(out_dir, spec.name, result, manifest)
        files.update(
            write_plot_data(out_dir, [(spec.name, result)], list(bundle.regions.regions), manifest)
        )
        return {
            "out_dir": str(out_dir),
            "files": {key: str(path) for key, path in files.items()},
            "summary": result.summary.model_dump(mode="json"),
        }

    async def run(
        self, policy: Optional[str] = None, out_dir: Optional[str] = None, **overrides: Any
    ) -> ApiResponse[Dict[str, Any]]:
        """Simulate one policy and write its artifacts."""
        try:
            config = self.run_config(**overrides)
            data = await asyncio.to_thread(self._run, policy, config, self._out_dir(out_dir))
            return ApiResponse(success=True, data=data)
        except Exception as e:
            return _failure(e)

    # -- sweep -----------------------------------------------------------

    def _sweep(
        self, slos: Optional[Sequence[float]], config: RunConfig, out_dir: Path
    ) -> ComparisonReport:
        names = policies_for_slos(slos) if slos else list(config.policies)
        specs = [self._spec(name, config) for name in names]
        bundle = self._bundle(config)
        results = run_sweep(specs, config, bundle)

        manifest = build_manifest(self.config.config_path, config, str(out_dir), names)
        labels = unique_labels(specs)
        for label, result in zip(labels, results):
            write_run_artifacts(out_dir, label, result, manifest)
        write_plot_data(out_dir, list(zip(labels, results)), list(bundle.regions.regions), manifest)

        comparison = compare(specs, results, manifest)
        write_comparison(out_dir, comparison)
        return comparison

    async def sweep(
        self,
        slos: Optional[Sequence[float]] = None,
        out_dir: Optional[str] = None,
        **overrides: Any,
    ) -> ApiResponse[ComparisonReport]:
        """Compare the latency baseline with carbon policies on identical workloads."""
        try:
            config = self.run_config(**overrides)
            data = await asyncio.to_thread(self._sweep, slos, config, self._out_dir(out_dir))
            return ApiResponse(success=True, data=data)
        except Exception as e:
            return _failure(e)
