"""Carbon and workload forecasters used when building each hour's instance."""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..types.traces import HourlyTrace, RegionRef
from ..utils.errors import OutOfRange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Forecaster:
    """``oracle`` reads the true value; ``persistence`` repeats the value one period earlier."""

    kind: Literal["oracle", "persistence"] = "oracle"
    horizon: int = 24

    def __post_init__(self) -> None:
        if self.kind not in ("oracle", "persistence"):
            raise ValueError(f"unknown forecaster kind {self.kind!r}")
        if self.horizon < 1:
            raise ValueError("forecast horizon must be at least one hour")


def source_hour(f: Forecaster, trace: HourlyTrace, hour: int) -> int:
    """The trace hour whose value answers a forecast for ``hour``."""
    if f.kind == "oracle":
        if not trace.covers(hour):
            raise OutOfRange(
                f"oracle forecast for hour {hour} outside [{trace.start_hour}, {trace.end_hour})"
            )
        return hour

    if hour < 0:
        raise OutOfRange(f"persistence forecast for negative hour {hour}")
    target = hour - f.horizon
    if target >= trace.end_hour:
        periods = (target - trace.end_hour) // f.horizon + 1
        target -= periods * f.horizon
    if target < trace.start_hour:
        # no earlier period available: same hour-of-period in the first period
        target = trace.start_hour + (hour - trace.start_hour) % f.horizon
        target = min(target, trace.end_hour - 1)
        logger.warning(
            "persistence forecast for hour %d has no prior period; using hour %d", hour, target
        )
    return target


def forecast(f: Forecaster, trace: HourlyTrace, region: RegionRef, hour: int) -> float:
    """Forecast one region's value for ``hour``."""
    return trace.value(region, source_hour(f, trace, hour))


def forecast_vector(f: Forecaster, trace: HourlyTrace, hour: int) -> np.ndarray:
    """Forecast every region's value for ``hour`` in region order."""
    return np.array(trace.at(source_hour(f, trace, hour)), dtype=float)
