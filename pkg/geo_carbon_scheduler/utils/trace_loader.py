"""Load, validate and write region, latency, carbon and workload files."""

import logging
from pathlib import Path
from typing import Type, TypeVar, Union

import numpy as np
import pandas as pd

from ..types.traces import (
    CarbonTrace,
    HourlyTrace,
    LatencyMatrix,
    RegionSet,
    TraceBundle,
    WorkloadTrace,
)
from .errors import (
    DuplicateRegion,
    MissingHour,
    NegativeLatency,
    NegativeValue,
    ParseError,
    ShapeMismatch,
    UnknownRegion,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
TraceT = TypeVar("TraceT", bound=HourlyTrace)

TRACE_COLUMNS = ["region", "hour", "value"]


def _read_csv(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found") from None
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path}: file is empty") from None
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(f"{path}: {e}") from None


def _numbers(column: pd.Series, path: PathLike, what: str) -> np.ndarray:
    values = pd.to_numeric(column.str.strip(), errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        raise ParseError(f"{path}: non-numeric {what} {column[bad].iloc[0]!r}")
    return values


def load_region_set(path: PathLike) -> RegionSet:
    """Read region ids, one per line (comma-separated ids on a line are also accepted)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found") from None

    regions = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        for token in line.split(","):
            token = token.strip()
            if not token or any(ch.isspace() for ch in token):
                raise ParseError(f"{path}:{lineno}: malformed region entry {line!r}")
            regions.append(token)

    if not regions:
        raise ParseError(f"{path}: no regions listed")
    dupes = sorted({r for r in regions if regions.count(r) > 1})
    if dupes:
        raise DuplicateRegion(f"{path}: duplicate region(s) {', '.join(dupes)}")
    return RegionSet(tuple(regions))


def load_latency_matrix(path: PathLike, regions: RegionSet) -> LatencyMatrix:
    """Read the ``origin,<r1>,...,<rn>`` latency table (ms) into region order."""
    frame = _read_csv(path)
    columns = [c.strip() for c in frame.columns]
    if not columns or columns[0] != "origin":
        raise ParseError(f"{path}: first header column must be 'origin'")

    destinations = columns[1:]
    if len(frame) != regions.n or len(destinations) != regions.n:
        raise ShapeMismatch(
            f"{path}: {len(frame)}x{len(destinations)} matrix for {regions.n} regions"
        )

    origins = [o.strip() for o in frame.iloc[:, 0]]
    for name in (*origins, *destinations):
        if name not in regions.regions:
            raise UnknownRegion(f"{path}: unknown region {name!r}")
    if len(set(origins)) != regions.n or len(set(destinations)) != regions.n:
        raise ShapeMismatch(f"{path}: each region must appear once as origin and destination")

    values = np.column_stack(
        [_numbers(frame.iloc[:, k + 1], path, "latency") for k in range(regions.n)]
    )
    if (values < 0).any():
        row, col = np.argwhere(values < 0)[0]
        raise NegativeLatency(
            f"{path}: latency {origins[row]}->{destinations[col]} is {values[row, col]}"
        )

    row_order = [origins.index(r) for r in regions.regions]
    col_order = [destinations.index(r) for r in regions.regions]
    return LatencyMatrix(regions, values[np.ix_(row_order, col_order)])


def _load_hourly(path: PathLike, regions: RegionSet, cls: Type[TraceT]) -> TraceT:
    frame = _read_csv(path)
    frame.columns = [c.strip() for c in frame.columns]
    if list(frame.columns) != TRACE_COLUMNS:
        raise ParseError(f"{path}: header must be {','.join(TRACE_COLUMNS)}")
    if frame.empty:
        raise ParseError(f"{path}: no data rows")

    frame["region"] = frame["region"].str.strip()
    unknown = sorted(set(frame["region"]) - set(regions.regions))
    if unknown:
        raise UnknownRegion(f"{path}: unknown region(s) {', '.join(unknown)}")

    hours = _numbers(frame["hour"], path, "hour")
    if (hours != np.floor(hours)).any():
        raise ParseError(f"{path}: hour indices must be integers")
    frame["hour"] = hours.astype(np.int64)
    frame["value"] = _numbers(frame["value"], path, "value")

    duplicated = frame.duplicated(subset=["region", "hour"])
    if duplicated.any():
        row = frame[duplicated].iloc[0]
        raise ParseError(f"{path}: duplicate entry for {row['region']} hour {row['hour']}")

    negative = frame[frame["value"] < 0]
    if not negative.empty:
        row = negative.iloc[0]
        raise NegativeValue(f"{path}: {row['region']} hour {row['hour']} is {row['value']}")

    start, end = int(frame["hour"].min()), int(frame["hour"].max()) + 1
    table = frame.pivot(index="region", columns="hour", values="value")
    table = table.reindex(index=list(regions.regions), columns=range(start, end))
    missing = table.isna()
    if missing.to_numpy().any():
        region, hour = missing.stack()[lambda s: s].index[0]
        raise MissingHour(f"{path}: {region} has no value for hour {hour}")

    trace = cls(regions, start, table.to_numpy(dtype=float))
    logger.debug("loaded %s: %d regions x %d hours", path, regions.n, trace.num_hours)
    return trace


def load_carbon_trace(path: PathLike, regions: RegionSet) -> CarbonTrace:
    """Read ``region,hour,value`` carbon intensities (g CO2eq/kWh)."""
    return _load_hourly(path, regions, CarbonTrace)


def load_workload_trace(path: PathLike, regions: RegionSet) -> WorkloadTrace:
    """Read ``region,hour,value`` request rates (requests/second)."""
    return _load_hourly(path, regions, WorkloadTrace)


def load_bundle(
    regions_path: PathLike,
    latency_path: PathLike,
    carbon_path: PathLike,
    workload_path: PathLike,
) -> TraceBundle:
    """Load and cross-check all four inputs."""
    regions = load_region_set(regions_path)
    return TraceBundle(
        regions=regions,
        latency=load_latency_matrix(latency_path, regions),
        carbon=load_carbon_trace(carbon_path, regions),
        workload=load_workload_trace(workload_path, regions),
    )


def save_region_set(path: PathLike, regions: RegionSet) -> None:
    Path(path).write_text("".join(f"{r}\n" for r in regions.regions), encoding="utf-8")


def save_latency_matrix(path: PathLike, latency: LatencyMatrix) -> None:
    frame = pd.DataFrame(latency.ell, columns=list(latency.regions.regions))
    frame.insert(0, "origin", list(latency.regions.regions))
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")


def save_trace(path: PathLike, trace: HourlyTrace) -> None:
    """Write a carbon or workload trace in ``region,hour,value`` form."""
    rows = [
        (region, hour, trace.values[i, k])
        for i, region in enumerate(trace.regions.regions)
        for k, hour in enumerate(trace.hours)
    ]
    frame = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
