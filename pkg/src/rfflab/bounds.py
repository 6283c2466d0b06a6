"""Minimax lower bounds, sample-size calibration, and effective complexity.

Closed-form evaluation of two risk floors for learning a weak signal with a
bounded-weight linear feature model: an exponential bound
c * B^2 * exp(-8 T C_z B^2 / (P sigma^2)) and a polynomial bound
(c_z / 128) * min(B^2, C_z^{-1} sigma^2 log(P) / T). The crossover of the
polynomial bound's two branches defines the critical sample size
T_crit = (C_z^{-1} sigma^2 / B^2) * log(P); training windows shorter than
that are signal-limited (the floor is set by the signal power alone).

Natural logarithms throughout: the printed calibration values (375, 276 and
108 months) are consistent only with ln. The universal constant in the
exponential bound is exposed as a parameter (default 1) rather than invented.

The module also measures the effective complexity of ridgeless regression in
feature space: the numerical rank of the Gram matrix Z Z' bounds how many
points the induced sign predictors can shatter, and a small exhaustive probe
checks that bound on tiny instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError


class BindingTerm(Enum):
    SIGNAL = "signal"
    COMPLEXITY = "complexity"


class Regime(Enum):
    SIGNAL_LIMITED = "signal_limited"
    COMPLEXITY_LIMITED = "complexity_limited"
    BOUNDARY = "boundary"


# Regime ties within half a month of T_crit are reported as boundary; finer
# resolution is meaningless for monthly designs.
BOUNDARY_TOLERANCE_MONTHS = 0.5

# Default relative eigenvalue cutoff for the numerical rank of a Gram matrix.
RANK_TOLERANCE = 1e-10

# Random coefficient draws per labeling when the Gram restriction is singular.
SEARCH_BUDGET = 10_000


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the lower-bound formulas.

    B2 is the signal power and sigma2 the noise variance (same return-variance
    units); T is the sample size in months; P the feature count; c_z and C_z
    bound the feature covariance eigenvalues. c_universal stands in for the
    exponential bound's unspecified constant.
    """

    B2: float
    sigma2: float
    T: float
    P: int
    c_z: float = 1.0
    C_z: float = 1.0
    c_universal: float = 1.0

    def __post_init__(self):
        if self.B2 <= 0 or self.sigma2 <= 0:
            raise ParameterError("B2 and sigma2 must be positive")
        if self.T < 0:
            raise ParameterError("T must be nonnegative")
        if self.P < 2:
            raise ParameterError("P must be >= 2 for log P to be meaningful")
        if not (0 < self.c_z <= self.C_z):
            raise ParameterError("need 0 < c_z <= C_z")
        if self.c_universal <= 0:
            raise ParameterError("c_universal must be positive")


@dataclass(frozen=True)
class PolyBound:
    value: float
    binding_term: BindingTerm
    warning: str | None = None


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bounds and regime diagnosis for one parameter set."""

    exp_bound: float
    poly_bound: float
    poly_binding_term: BindingTerm
    t_crit_months: float
    regime: Regime


def exp_lower_bound(p: BoundParams) -> float:
    """Exponential risk floor c * B^2 * exp(-8 T C_z B^2 / (P sigma^2))."""
    exponent = -8.0 * p.T * p.C_z * p.B2 / (p.P * p.sigma2)
    return p.c_universal * p.B2 * float(np.exp(exponent))


def poly_lower_bound(p: BoundParams) -> PolyBound:
    """Polynomial risk floor (c_z / 128) * min(B^2, C_z^{-1} sigma^2 log(P) / T).

    Reports which branch of the min binds; ties bind the signal term. The
    theorem is stated for P >= 4, so smaller P attaches a warning instead of
    failing.
    """
    if p.T <= 0:
        raise ParameterError("polynomial bound requires T >= 1")
    complexity = (p.sigma2 / p.C_z) * np.log(p.P) / p.T
    warning = None
    if p.P < 4:
        warning = f"OutOfTheoremRange: polynomial bound is stated for P >= 4, got P={p.P}"
    if p.B2 <= complexity:
        return PolyBound(value=(p.c_z / 128.0) * p.B2, binding_term=BindingTerm.SIGNAL, warning=warning)
    return PolyBound(
        value=(p.c_z / 128.0) * float(complexity),
        binding_term=BindingTerm.COMPLEXITY,
        warning=warning,
    )


def t_crit(p: BoundParams) -> float:
    """Critical sample size (C_z^{-1} sigma^2 / B^2) * log(P), in months."""
    return (p.sigma2 / (p.C_z * p.B2)) * float(np.log(p.P))


def diagnose_regime(T: float, p: BoundParams) -> Regime:
    """Classify a training length against the critical sample size."""
    if T < 1:
        raise ParameterError(f"T must be >= 1, got {T}")
    crit = t_crit(p)
    if abs(T - crit) <= BOUNDARY_TOLERANCE_MONTHS:
        return Regime.BOUNDARY
    return Regime.SIGNAL_LIMITED if T < crit else Regime.COMPLEXITY_LIMITED


def evaluate_bounds(p: BoundParams, T_operational: float) -> BoundReport:
    """Bundle both bounds, the critical sample size, and the regime at T."""
    poly = poly_lower_bound(p)
    return BoundReport(
        exp_bound=exp_lower_bound(p),
        poly_bound=poly.value,
        poly_binding_term=poly.binding_term,
        t_crit_months=t_crit(p),
        regime=diagnose_regime(T_operational, p),
    )


def effective_vc(Z: np.ndarray, tol: float = RANK_TOLERANCE) -> int:
    """Numerical rank of Z Z': eigenvalues above tol * (largest eigenvalue).

    This is the effective dimension available to ridgeless regression on the
    sample Z, hence the shattering capacity of its sign predictors.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise ParameterError("Z must be a (T, P) matrix")
    gram = Z @ Z.T
    eigs = np.linalg.eigvalsh(gram)
    top = float(eigs[-1]) if eigs.size else 0.0
    if top <= 0.0:
        return 0
    return int(np.sum(eigs > tol * top))


@dataclass(frozen=True)
class ShatteringResult:
    """Outcome of the exhaustive shattering probe on a small instance."""

    largest_shattered: int
    # per subset size: the best count of realizable labelings over subsets
    realizable_counts: dict[int, int]


def _labeling_realizable(G_sub: np.ndarray, y: np.ndarray, rng: np.random.Generator, budget: int) -> bool:
    """Search for coefficients whose Gram image sign-matches y.

    One-sided randomized check used when the Gram restriction is singular:
    a hit proves realizability, exhausting the budget does not disprove it.
    """
    for _ in range(budget):
        v = G_sub @ rng.standard_normal(G_sub.shape[0])
        if np.all(v * y > 0.0):
            return True
    return False


def shattering_probe(
    Z: np.ndarray,
    max_points: int,
    rng: np.random.Generator,
    search_budget: int = SEARCH_BUDGET,
) -> ShatteringResult:
    """Exhaustively test which subsets the Gram sign predictors shatter.

    Predictions at the sample points are G @ alpha with G = Z Z' restricted
    to a subset. A nonsingular restriction realizes every labeling by
    interpolation; a singular one falls back to the randomized column-space
    search. Requires 2^m <= 32 labelings (m <= 5) so enumeration stays exact.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise ParameterError("Z must be an (m, P) matrix")
    m = Z.shape[0]
    if not (1 <= max_points <= 5):
        raise ParameterError("max_points must be between 1 and 5")
    if m > max_points:
        raise ParameterError(f"instance has {m} points, exceeding max_points={max_points}")
    gram = Z @ Z.T
    top = float(np.max(np.linalg.eigvalsh(gram))) if m else 0.0
    realizable_counts: dict[int, int] = {0: 1}  # the empty subset is trivially shattered
    largest = 0
    for size in range(1, m + 1):
        best = 0
        for subset in itertools.combinations(range(m), size):
            G_sub = gram[np.ix_(subset, subset)]
            eigs = np.linalg.eigvalsh(G_sub)
            nonsingular = top > 0 and eigs[0] > RANK_TOLERANCE * top
            if nonsingular:
                count = 2 ** size  # interpolation alpha = G^{-1} y realizes every labeling
            else:
                count = 0
                for signs in itertools.product((-1.0, 1.0), repeat=size):
                    y = np.array(signs)
                    if _labeling_realizable(G_sub, y, rng, search_budget):
                        count += 1
            best = max(best, count)
            if best == 2 ** size:
                break
        realizable_counts[size] = best
        if best == 2 ** size:
            largest = size
    return ShatteringResult(largest_shattered=largest, realizable_counts=realizable_counts)
