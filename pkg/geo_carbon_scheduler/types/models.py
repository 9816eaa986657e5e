"""Serializable models: configuration, plans, routing weights, reports."""

import math
from typing import Any, Dict, Generic, List, Literal, Optional, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator

T = TypeVar("T")

ForecasterKind = Literal["oracle", "persistence"]


class ServiceConfig(BaseModel):
    """Process-level settings read from the environment."""

    config_path: str
    out_dir: str = "out"
    log_level: str = "INFO"
    port: int = 8000


class ApiResponse(BaseModel, Generic[T]):
    """Generic service response wrapper."""

    success: bool
    data: Optional[T] = None
    error: Optional[str] = None
    error_name: Optional[str] = None


class RunConfig(BaseModel):
    """Run configuration loaded from the JSON config file."""

    model_config = ConfigDict(extra="forbid")

    regions: str
    latency: str
    carbon: str
    workload: str
    policies: List[str] = Field(default_factory=lambda: ["latency", "carbon-100"])
    seed: int = 42
    start_hour: int = 0
    hours: Optional[int] = Field(default=None, ge=0)
    timesteps_per_hour: int = Field(default=60, ge=1)
    energy_per_request: float = Field(default=1e-4, gt=0)
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    capacity: Union[int, List[int]] = 100
    max_servers: int = Field(default=500, ge=1)
    carbon_forecaster: ForecasterKind = "oracle"
    workload_forecaster: ForecasterKind = "oracle"
    bucket_minutes: int = Field(default=10, ge=1, le=60)
    parallel: bool = False

    @field_validator("capacity")
    @classmethod
    def _positive_capacity(cls, value: Union[int, List[int]]) -> Union[int, List[int]]:
        values = value if isinstance(value, list) else [value]
        if not values or any(v < 1 for v in values):
            raise ValueError("server capacity must be >= 1")
        return value

    @field_validator("policies")
    @classmethod
    def _some_policy(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one policy is required")
        return value

    def trace_paths(self) -> Dict[str, str]:
        return {
            "regions": self.regions,
            "latency": self.latency,
            "carbon": self.carbon,
            "workload": self.workload,
        }


class PolicySpec(BaseModel):
    """A provisioning policy: the latency baseline or carbon optimization under SLO L."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["latency_baseline", "carbon_L"]
    slo_ms: Optional[float] = None
    alpha: float = 0.5
    capacity: List[int] = Field(default_factory=lambda: [100])
    max_servers: int = 500

    @property
    def name(self) -> str:
        if self.kind == "latency_baseline":
            return "latency"
        slo = self.slo_ms if self.slo_ms is not None else float("nan")
        label = str(int(slo)) if math.isfinite(slo) and slo == int(slo) else f"{slo:g}"
        return f"carbon-{label}"


class ProvisioningPlan(BaseModel):
    """Server counts ``s`` and routing counts ``x`` for one hour."""

    hour: Optional[int] = None
    s: List[int]
    x: List[List[int]]
    unserved: List[int]
    objective: float
    carbon_term: float
    server_term: int

    @property
    def n(self) -> int:
        return len(self.s)

    def x_array(self) -> np.ndarray:
        return np.array(self.x, dtype=np.int64).reshape(self.n, self.n)

    def inbound(self) -> np.ndarray:
        """Requests planned per destination."""
        return self.x_array().sum(axis=0)

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, payload: str) -> "ProvisioningPlan":
        return cls.model_validate_json(payload)


class RoutingWeights(BaseModel):
    """Per-origin forwarding probabilities derived from a plan."""

    hour: Optional[int] = None
    w: List[List[float]]
    f: List[float]
    t: List[int]

    _cumulative: Optional[np.ndarray] = PrivateAttr(default=None)

    def is_fallback(self, origin: int) -> bool:
        """True when the origin row is empty and requests stay local."""
        return not any(self.w[origin])

    def cumulative(self) -> np.ndarray:
        if self._cumulative is None:
            self._cumulative = np.cumsum(np.array(self.w, dtype=float), axis=1)
        return self._cumulative


class RegionHourStats(BaseModel):
    """One region's metrics for one simulated hour."""

    region: str
    originated: int
    served: int
    emissions_g: float
    utilization: float
    overloads: int
    spillovers: int
    unserved_planned: int
    servers: int
    mean_latency_ms: float


class HourlyReport(BaseModel):
    """Metrics for one simulated hour."""

    hour: int
    regions: List[RegionHourStats]
    mean_latency_ms: float
    p95_latency_ms: float
    slo_violations: int
    arc_counts: List[List[int]]
    bucket_served: List[List[int]]
    plan: ProvisioningPlan

    @property
    def total_originated(self) -> int:
        return sum(r.originated for r in self.regions)

    @property
    def total_served(self) -> int:
        return sum(r.served for r in self.regions)

    @property
    def total_emissions_g(self) -> float:
        return sum(r.emissions_g for r in self.regions)


class RegionProvisioning(BaseModel):
    """Servers provisioned in one region over a run."""

    region: str
    mean_servers: float
    max_servers: int
    server_hours: int


class SummaryReport(BaseModel):
    """Aggregate totals of one simulation run."""

    policy: str
    hours: int
    total_originated: int
    total_served: int
    total_emissions_g: float
    mean_latency_ms: float
    p95_latency_ms: float
    total_overloads: int
    total_spillovers: int
    total_slo_violations: int
    total_unserved_planned: int
    provisioning: List[RegionProvisioning]
    redirections: List[List[int]]
    forecast_mape: Dict[str, float]
    arrival_mean_ratio: float
    latency_model: str = "network latency only; service time not modeled"


class SimulationResult(BaseModel):
    """Hourly reports plus summary for one policy."""

    policy: PolicySpec
    reports: List[HourlyReport]
    summary: SummaryReport


class PolicyResult(BaseModel):
    """One row of a policy comparison."""

    name: str
    total_emissions_g: float
    reduction_vs_baseline: Optional[float] = None
    mean_latency_ms: float
    p95_latency_ms: float
    total_overloads: int


class RunManifest(BaseModel):
    """Inputs of a run, echoed into every artifact."""

    config_path: str
    trace_paths: Dict[str, str]
    policies: List[str]
    seed: int
    out_dir: str
    tool_version: str
    config: Dict[str, Any]


class ComparisonReport(BaseModel):
    """Per-policy totals and reductions against the latency baseline."""

    manifest: Optional[RunManifest] = None
    baseline: Optional[str] = None
    policies: List[PolicyResult]


class FileDiagnostic(BaseModel):
    """Validation outcome for one input file."""

    kind: Literal["regions", "latency", "carbon", "workload"]
    path: str
    ok: bool
    error_name: Optional[str] = None
    message: str = ""


class ValidationReport(BaseModel):
    """Validation outcome for all input files."""

    ok: bool
    files: List[FileDiagnostic]
