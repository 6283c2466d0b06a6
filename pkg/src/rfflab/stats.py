"""Error metrics, two-sample Kolmogorov-Smirnov testing, and slope fits.

Pure functions shared by every experiment report. The KS statistic evaluates
both empirical CDFs at the sorted pooled values with the right-continuous
convention (the tie policy moves the statistic at the 1/n level, so it is
pinned here); p-values come from the asymptotic Kolmogorov series with
effective size n1*n2/(n1+n2), truncated when terms drop below 1e-10.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateDenominator, ParameterError


class ErrorLabel(Enum):
    STANDARD = "standard"
    STANDARDIZED = "standardized"


@dataclass(frozen=True)
class ErrorSample:
    """A batch of absolute kernel errors from one arm of an experiment."""

    values: np.ndarray
    label: ErrorLabel
    config_key: str = ""

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ParameterError("error values must be a flat sequence")
        if v.size and (not np.all(np.isfinite(v)) or np.any(v < 0.0)):
            raise ParameterError("error values must be finite and nonnegative")


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int

    def __post_init__(self):
        if not (0.0 <= self.statistic <= 1.0 and 0.0 <= self.p_value <= 1.0):
            raise ParameterError("KS statistic and p-value must lie in [0, 1]")


def mean_abs_error(sample: ErrorSample) -> float:
    """Arithmetic mean of the absolute errors."""
    if sample.values.size == 0:
        raise ParameterError("mean_abs_error of an empty sample")
    return float(np.mean(sample.values))


def degradation_factor(standardized: ErrorSample, standard: ErrorSample) -> float:
    """Ratio of mean standardized error to mean standard error.

    Values above 1 mean standardization worsens the approximation.
    """
    denom = mean_abs_error(standard)
    if denom <= 0.0:
        raise DegenerateDenominator("standard error sample has zero mean")
    return mean_abs_error(standardized) / denom


def kolmogorov_sf(lam: float, tol: float = 1e-10) -> float:
    """Survival function of the Kolmogorov distribution.

    Alternating series 2 * sum_k (-1)^(k-1) exp(-2 k^2 lam^2), truncated once
    a term falls below tol.
    """
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, 100001):
        term = 2.0 * np.exp(-2.0 * (k * lam) ** 2)
        if term < tol:
            break
        total += term if k % 2 == 1 else -term
    return float(min(max(total, 0.0), 1.0))


def ks_two_sample(a, b) -> KsResult:
    """Two-sample KS test: sup ECDF distance plus asymptotic p-value."""
    xa = np.sort(np.asarray(a, dtype=np.float64).ravel())
    xb = np.sort(np.asarray(b, dtype=np.float64).ravel())
    n1, n2 = xa.size, xb.size
    if n1 < 1 or n2 < 1:
        raise ParameterError("both samples must be nonempty")
    pooled = np.concatenate([xa, xb])
    pooled.sort()
    # right-continuous ECDFs evaluated at every pooled value
    fa = np.searchsorted(xa, pooled, side="right") / n1
    fb = np.searchsorted(xb, pooled, side="right") / n2
    statistic = float(np.max(np.abs(fa - fb)))
    n_eff = n1 * n2 / (n1 + n2)
    p_value = kolmogorov_sf(float(np.sqrt(n_eff)) * statistic)
    return KsResult(statistic=statistic, p_value=p_value, n1=n1, n2=n2)


def fit_loglog_slope(sizes, errors) -> tuple[float, float]:
    """Ordinary least squares of log(error) on log(size): (slope, intercept)."""
    s = np.asarray(sizes, dtype=np.float64)
    e = np.asarray(errors, dtype=np.float64)
    if s.size != e.size or s.size < 3:
        raise ParameterError("need at least 3 matched (size, error) points")
    if np.any(s <= 0.0):
        raise ParameterError("sizes must be positive")
    if np.any(e <= 0.0):
        raise ParameterError("errors must be positive for a log-log fit")
    slope, intercept = np.polyfit(np.log(s), np.log(e), 1)
    return float(slope), float(intercept)
