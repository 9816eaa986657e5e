"""Immutable numeric value types: regions, latencies, hourly traces, CAP instances."""

import math
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import (
    DimensionMismatch,
    DuplicateRegion,
    InvalidParam,
    MissingHour,
    ParseError,
    UnknownRegion,
)

RegionRef = Union[int, str]


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class RegionSet:
    """Ordered region identifiers. Index i of every vector and matrix is region i."""

    regions: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.regions:
            raise ParseError("region set is empty")
        seen = set()
        for region in self.regions:
            if not region or region != region.strip():
                raise ParseError(f"invalid region identifier {region!r}")
            if region in seen:
                raise DuplicateRegion(f"region {region!r} listed more than once")
            seen.add(region)

    @property
    def n(self) -> int:
        return len(self.regions)

    def index(self, region: RegionRef) -> int:
        """Resolve a region id or index to its position."""
        if isinstance(region, (int, np.integer)):
            if not 0 <= int(region) < self.n:
                raise UnknownRegion(f"region index {region} outside 0..{self.n - 1}")
            return int(region)
        try:
            return self.regions.index(region)
        except ValueError:
            raise UnknownRegion(f"unknown region {region!r}") from None

    def __iter__(self):
        return iter(self.regions)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class LatencyMatrix:
    """Expected per-request latency in ms; ell[i][j] is origin i to destination j."""

    regions: RegionSet
    ell: np.ndarray

    def __post_init__(self) -> None:
        ell = np.array(self.ell, dtype=float)
        if ell.shape != (self.regions.n, self.regions.n):
            raise DimensionMismatch(
                f"latency matrix shape {ell.shape} does not match {self.regions.n} regions"
            )
        object.__setattr__(self, "ell", _frozen(ell))

    def between(self, origin: RegionRef, destination: RegionRef) -> float:
        return float(self.ell[self.regions.index(origin), self.regions.index(destination)])


@dataclass(frozen=True)
class HourlyTrace:
    """Per-region hourly series over the contiguous hours [start_hour, end_hour)."""

    regions: RegionSet
    start_hour: int
    values: np.ndarray

    unit = ""

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != self.regions.n:
            raise DimensionMismatch(
                f"trace shape {values.shape} does not have one row per region "
                f"({self.regions.n})"
            )
        object.__setattr__(self, "values", _frozen(values))

    @property
    def num_hours(self) -> int:
        return int(self.values.shape[1])

    @property
    def end_hour(self) -> int:
        return self.start_hour + self.num_hours

    @property
    def hours(self) -> range:
        return range(self.start_hour, self.end_hour)

    def covers(self, hour: int) -> bool:
        return self.start_hour <= hour < self.end_hour

    def value(self, region: RegionRef, hour: int) -> float:
        return float(self.values[self.regions.index(region), hour - self.start_hour])

    def at(self, hour: int) -> np.ndarray:
        """All regions' values at one hour, in region order."""
        return self.values[:, hour - self.start_hour]


class CarbonTrace(HourlyTrace):
    """Grid carbon intensity in g CO2eq/kWh."""

    unit = "gCO2eq/kWh"


class WorkloadTrace(HourlyTrace):
    """Mean request rate in requests/second."""

    unit = "req/s"


@dataclass(frozen=True)
class TraceBundle:
    """Everything a simulation reads; all members share one region order."""

    regions: RegionSet
    latency: LatencyMatrix
    carbon: CarbonTrace
    workload: WorkloadTrace

    def __post_init__(self) -> None:
        for member in (self.latency, self.carbon, self.workload):
            if member.regions != self.regions:
                raise DimensionMismatch("trace region order differs from the region set")
        if (self.carbon.start_hour, self.carbon.num_hours) != (
            self.workload.start_hour,
            self.workload.num_hours,
        ):
            raise MissingHour(
                f"carbon hours [{self.carbon.start_hour}, {self.carbon.end_hour}) differ "
                f"from workload hours [{self.workload.start_hour}, {self.workload.end_hour})"
            )

    @property
    def start_hour(self) -> int:
        return self.carbon.start_hour

    @property
    def end_hour(self) -> int:
        return self.carbon.end_hour

    def covers(self, hour: int) -> bool:
        return self.carbon.covers(hour)


@dataclass(frozen=True)
class CapInstance:
    """One hour of the provisioning problem.

    ``demand`` holds expected arrivals per origin for the hour (integer
    requests), ``capacity`` the requests one server handles per hour.
    """

    intensity: np.ndarray
    demand: np.ndarray
    latency: np.ndarray
    slo_ms: float
    capacity: np.ndarray
    max_servers: int
    alpha: float
    hour: Optional[int] = None

    def __post_init__(self) -> None:
        intensity = np.array(self.intensity, dtype=float).reshape(-1)
        n = intensity.shape[0]
        demand = np.array(self.demand).reshape(-1)
        capacity = np.array(self.capacity).reshape(-1)
        latency = np.array(self.latency, dtype=float)

        if n < 1:
            raise DimensionMismatch("instance has no regions")
        if demand.shape[0] != n or capacity.shape[0] != n:
            raise DimensionMismatch(
                f"demand ({demand.shape[0]}) and capacity ({capacity.shape[0]}) "
                f"must have {n} entries"
            )
        if latency.shape != (n, n):
            raise DimensionMismatch(f"latency shape {latency.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(intensity)) or np.any(intensity < 0):
            raise InvalidParam("carbon intensities must be finite and >= 0")
        if not np.all(np.isfinite(latency)) or np.any(latency < 0):
            raise InvalidParam("latencies must be finite and >= 0")
        if np.any(demand < 0) or np.any(demand != np.floor(demand)):
            raise InvalidParam("demand must be non-negative integers")
        if np.any(capacity < 1) or np.any(capacity != np.floor(capacity)):
            raise InvalidParam("server capacity must be integers >= 1")
        if not (isinstance(self.max_servers, (int, np.integer)) and self.max_servers >= 1):
            raise InvalidParam(f"max_servers must be an integer >= 1, got {self.max_servers!r}")
        if not 0.0 <= float(self.alpha) <= 1.0:
            raise InvalidParam(f"alpha must lie in [0, 1], got {self.alpha}")
        if math.isnan(float(self.slo_ms)) or float(self.slo_ms) <= 0:
            raise InvalidParam(f"latency SLO must be > 0 ms, got {self.slo_ms}")

        object.__setattr__(self, "intensity", _frozen(intensity))
        object.__setattr__(self, "demand", _frozen(demand.astype(np.int64)))
        object.__setattr__(self, "capacity", _frozen(capacity.astype(np.int64)))
        object.__setattr__(self, "latency", _frozen(latency))
        object.__setattr__(self, "max_servers", int(self.max_servers))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "slo_ms", float(self.slo_ms))

    @property
    def n(self) -> int:
        return int(self.intensity.shape[0])

    @property
    def total_demand(self) -> int:
        return int(self.demand.sum())

    @property
    def penalty(self) -> float:
        """Normalized cost of one unserved request."""
        return 10.0 * self.n

    @property
    def server_weight(self) -> float:
        return (1.0 - self.alpha) / self.max_servers

    def carbon_weights(self) -> np.ndarray:
        """Normalized carbon cost per request served at each destination."""
        i_max = float(self.intensity.max())
        total = self.total_demand
        if i_max == 0.0 or total == 0:
            return np.zeros(self.n)
        return self.alpha * (self.intensity / i_max) / total

    def arc_mask(self) -> np.ndarray:
        """Boolean matrix of origin/destination pairs within the latency SLO."""
        return self.latency <= self.slo_ms

    def arcs(self) -> FrozenSet[Tuple[int, int]]:
        mask = self.arc_mask()
        return frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(mask)))


def as_vector(values: Union[float, Sequence[float], np.ndarray], n: int, what: str) -> np.ndarray:
    """Broadcast a scalar or check a sequence against the region count."""
    array = np.array(values, dtype=float)
    if array.ndim == 0:
        return np.full(n, float(array))
    array = array.reshape(-1)
    if array.shape[0] != n:
        raise DimensionMismatch(f"{what} has {array.shape[0]} entries, expected {n}")
    return array
