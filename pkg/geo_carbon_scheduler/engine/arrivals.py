"""Per-timestep request arrivals."""

import math

import numpy as np

TRUNCATION = 1.5

# mean of an exponential truncated at 1.5x its mean, relative to the untruncated mean
ARRIVAL_MEAN_RATIO = 1.0 - TRUNCATION * math.exp(-TRUNCATION) / (1.0 - math.exp(-TRUNCATION))


def generate_arrivals(rate: float, timesteps: int, rng: np.random.Generator) -> np.ndarray:
    """Request counts for each timestep of an hour with ``rate`` requests/hour.

    Each timestep draws from an exponential with mean ``rate / timesteps``,
    redrawing while the value exceeds 1.5x that mean, and rounds half-up.
    """
    if rate < 0:
        raise ValueError(f"arrival rate must be >= 0, got {rate}")
    if timesteps < 1:
        raise ValueError(f"timesteps must be >= 1, got {timesteps}")
    if rate == 0:
        return np.zeros(timesteps, dtype=np.int64)

    mean = rate / timesteps
    limit = TRUNCATION * mean
    draws = rng.exponential(mean, size=timesteps)
    redraw = draws > limit
    while redraw.any():
        draws[redraw] = rng.exponential(mean, size=int(redraw.sum()))
        redraw = draws > limit
    return np.floor(draws + 0.5).astype(np.int64)
