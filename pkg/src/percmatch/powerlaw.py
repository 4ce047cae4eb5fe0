"""Maximum-likelihood power-law exponent for integer degree data."""
from __future__ import annotations

import numpy as np

from .graph import ParameterError


class EstimationError(ValueError):
    pass


def estimate_power_law_exponent(degrees, d_min: int | None = None) -> float:
    """Continuous MLE with the half-unit discreteness shift.

    beta = 1 + m / sum(ln(d_i / (d_min - 1/2))) over the m degrees >= d_min.
    d_min defaults to the smallest degree >= 1.
    """
    d = np.asarray(degrees, dtype=np.float64).ravel()
    if d_min is None:
        pos = d[d >= 1]
        if pos.size == 0:
            raise EstimationError("no positive degrees")
        d_min = int(pos.min())
    if d_min < 1:
        raise ParameterError(f"d_min must be >= 1, got {d_min}")
    tail = d[d >= d_min]
    if tail.size < 10:
        raise EstimationError(f"need at least 10 degrees >= d_min, got {tail.size}")
    if np.all(tail == tail[0]):
        raise EstimationError("all included degrees are equal; estimator diverges")
    total = np.log(tail / (d_min - 0.5)).sum()
    return float(1.0 + tail.size / total)


def sample_discrete_pareto(size: int, beta: float, d_min: int, rng) -> np.ndarray:
    """Integer samples whose tail matches the half-shifted continuous model.

    Draws x from a continuous Pareto with scale d_min - 1/2 and rounds to the
    nearest integer, so that P(d >= k) ~ (k - 1/2)^(1-beta).
    """
    x = (d_min - 0.5) * (1.0 - rng.random(size)) ** (-1.0 / (beta - 1.0))
    return np.floor(x + 0.5).astype(np.int64)
