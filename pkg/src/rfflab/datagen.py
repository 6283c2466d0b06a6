"""Simulated persistent predictor panels.

Predictors follow a diagonal VAR(1): x_t = diag(phi) x_{t-1} + u_t with
Gaussian shocks whose covariance is rho * 11' + (1 - rho) * I, mimicking the
high persistence and modest cross-correlation of monthly macro predictors.
Each panel carries a training window plus the chain states that immediately
follow it, used as query points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PredictorProcessSpec:
    """Parameters of the simulated predictor process."""

    dim: int
    phi_low: float = 0.82
    phi_high: float = 0.98
    rho: float = 0.1
    burn_in: int = 500

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim}")
        if not (0.0 <= self.phi_low <= self.phi_high < 1.0):
            raise ParameterError(
                f"need 0 <= phi_low <= phi_high < 1, got [{self.phi_low}, {self.phi_high}]"
            )
        _check_rho(self.dim, self.rho)
        if self.burn_in < 0:
            raise ParameterError("burn_in must be nonnegative")


@dataclass(frozen=True)
class PredictorPanel:
    """A training window, the following query states, and the drawn phi."""

    train: np.ndarray     # (T, K)
    queries: np.ndarray   # (Q, K)
    phi_diag: np.ndarray  # (K,)
    spec: PredictorProcessSpec

    def __post_init__(self):
        for name in ("train", "queries", "phi_diag"):
            a = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


def _check_rho(dim: int, rho: float) -> None:
    # Eigenvalues of rho*11' + (1-rho)*I are 1 + rho*(K-1) and (1-rho).
    lo = -1.0 / (dim - 1) if dim > 1 else -np.inf
    if not (lo < rho < 1.0):
        raise ParameterError(
            f"rho={rho} outside the positive-definite range ({lo:g}, 1) for K={dim}"
        )


def build_sigma_u(dim: int, rho: float) -> np.ndarray:
    """Shock covariance rho * 11' + (1 - rho) * I, validated positive definite."""
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    _check_rho(dim, rho)
    return rho * np.ones((dim, dim)) + (1.0 - rho) * np.eye(dim)


def simulate_panel(
    spec: PredictorProcessSpec, n_train: int, n_query: int, rng: np.random.Generator
) -> PredictorPanel:
    """Simulate one panel: burn in from zero, record T train and Q query states.

    phi entries are drawn uniformly from [phi_low, phi_high]; shocks are
    correlated through the Cholesky factor of the shock covariance. For
    T <= K + 1 the augmented training points are checked for affine
    independence (a rank failure raises rather than being ignored).
    """
    if n_train < 2:
        raise ParameterError(f"n_train must be >= 2, got {n_train}")
    if n_query < 1:
        raise ParameterError(f"n_query must be >= 1, got {n_query}")
    K = spec.dim
    phi = rng.uniform(spec.phi_low, spec.phi_high, size=K)
    chol = np.linalg.cholesky(build_sigma_u(K, spec.rho))
    n_steps = spec.burn_in + n_train + n_query
    shocks = rng.standard_normal((n_steps, K)) @ chol.T
    states = np.empty((n_train + n_query, K))
    x = np.zeros(K)
    for t in range(n_steps):
        x = phi * x + shocks[t]
        if t >= spec.burn_in:
            states[t - spec.burn_in] = x
    train, queries = states[:n_train], states[n_train:]
    _check_affine_independence(train)
    return PredictorPanel(train=train, queries=queries, phi_diag=phi, spec=spec)


def _check_affine_independence(train: np.ndarray) -> None:
    T, K = train.shape
    if T > K + 1:
        return  # rank T is impossible; the condition only applies to T <= K+1
    A = np.vstack([2.0 * train.T, 2.0 * np.ones(T)])
    if np.linalg.matrix_rank(A) != T:
        raise RuntimeError(
            "generated training window is affinely dependent; "
            "this is a measure-zero event for a continuous process"
        )
