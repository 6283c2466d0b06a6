"""Random Fourier feature banks and the kernels they induce.

A feature bank holds P frequency rows drawn from an isotropic Gaussian and P
uniform phases. The cosine feature map sends a point x in R^K to
sqrt(2) * cos(freq @ x + phase), and averaging feature products approximates
the Gaussian kernel exp(-gamma^2 ||x - x'||^2 / 2). Dividing each feature by a
scale estimated on a training window gives the standardized variant, whose
empirical kernel no longer targets the Gaussian kernel; quantifying that gap
is what the rest of the package does.

Sampling uses numpy's Generator (ziggurat normals), so banks are bit-identical
per seed within one numpy build.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateScale, ParameterError

# Scales below this floor mark a near-constant feature; violations raise
# rather than clamp (small denominators are a measure-zero tail, not a value
# to patch).
SCALE_FLOOR = 1e-12

_SQRT2 = float(np.sqrt(2.0))
_TWO_PI = 2.0 * np.pi


class ScaleMode(Enum):
    """How per-feature scales are estimated on a training window."""

    RMS = "rms"                # mean of squared feature values
    SAMPLE_STD = "samplestd"   # mean-subtracted variance


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FeatureBank:
    """Frozen draws defining a P-dimensional random Fourier map over R^K.

    frequencies: (P, K) array, rows in inverse predictor units.
    phases: (P,) array, each in [0, 2*pi).
    gamma: kernel bandwidth; frequencies are N(0, gamma^2) per component.
    """

    frequencies: np.ndarray
    phases: np.ndarray
    gamma: float

    def __post_init__(self):
        freq = _readonly(np.atleast_2d(self.frequencies))
        ph = _readonly(np.atleast_1d(self.phases))
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "phases", ph)
        if freq.ndim != 2 or freq.shape[0] < 1 or freq.shape[1] < 1:
            raise ParameterError("frequencies must be a nonempty P x K matrix")
        if ph.shape != (freq.shape[0],):
            raise ParameterError("phases must have one entry per frequency row")
        if not np.all((ph >= 0.0) & (ph < _TWO_PI)):
            raise ParameterError("phases must lie in [0, 2*pi)")
        if not (self.gamma > 0.0):
            raise ParameterError(f"gamma must be positive, got {self.gamma}")

    @property
    def n_features(self) -> int:
        return self.frequencies.shape[0]

    @property
    def input_dim(self) -> int:
        return self.frequencies.shape[1]


@dataclass(frozen=True)
class StandardizedBank:
    """A feature bank plus per-feature scales estimated on one training window."""

    bank: FeatureBank
    scales: np.ndarray
    mode: ScaleMode
    training_window_id: str

    def __post_init__(self):
        scales = _readonly(np.atleast_1d(self.scales))
        object.__setattr__(self, "scales", scales)
        if scales.shape != (self.bank.n_features,):
            raise ParameterError("scales must have one entry per feature")
        if np.any(scales < SCALE_FLOOR):
            bad = np.flatnonzero(scales < SCALE_FLOOR)
            raise DegenerateScale(bad, SCALE_FLOOR)


@dataclass(frozen=True)
class KernelValue:
    """A kernel evaluation together with the query pair it was taken at."""

    value: float
    x: np.ndarray
    x_prime: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(np.atleast_1d(self.x)))
        object.__setattr__(self, "x_prime", _readonly(np.atleast_1d(self.x_prime)))


def sample_features(input_dim: int, n_features: int, gamma: float, rng: np.random.Generator) -> FeatureBank:
    """Draw a feature bank: frequencies ~ N(0, gamma^2 I), phases ~ U[0, 2*pi).

    Fully determined by the generator state; frequencies are drawn first,
    then phases, so callers can rely on the draw order.
    """
    if input_dim < 1 or n_features < 1:
        raise ParameterError(f"dimensions must be >= 1, got K={input_dim}, P={n_features}")
    if not (gamma > 0.0):
        raise ParameterError(f"gamma must be positive, got {gamma}")
    freq = rng.normal(0.0, gamma, size=(n_features, input_dim))
    phases = rng.uniform(0.0, _TWO_PI, size=n_features)
    return FeatureBank(frequencies=freq, phases=phases, gamma=float(gamma))


def feature_map(bank: FeatureBank, x: np.ndarray) -> np.ndarray:
    """Evaluate the cosine features at x.

    x of shape (K,) gives a (P,) vector; a batch of shape (n, K) gives
    (n, P). Every output component lies in [-sqrt(2), sqrt(2)].
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != bank.input_dim:
        raise ParameterError(
            f"point has dimension {x.shape[-1]}, bank expects {bank.input_dim}"
        )
    return _SQRT2 * np.cos(x @ bank.frequencies.T + bank.phases)


def gaussian_kernel(x: np.ndarray, x_prime: np.ndarray, gamma: float) -> KernelValue:
    """Target Gaussian kernel exp(-gamma^2 ||x - x'||^2 / 2)."""
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(x_prime, dtype=np.float64)
    if x.shape != xp.shape:
        raise ParameterError(f"query points have shapes {x.shape} and {xp.shape}")
    if not (gamma > 0.0):
        raise ParameterError(f"gamma must be positive, got {gamma}")
    d2 = float(np.sum((x - xp) ** 2))
    return KernelValue(value=float(np.exp(-0.5 * gamma * gamma * d2)), x=x, x_prime=xp)


def empirical_kernel(bank: FeatureBank, x: np.ndarray, x_prime: np.ndarray) -> KernelValue:
    """Monte Carlo kernel estimate: mean over features of z_i(x) z_i(x')."""
    zx = feature_map(bank, x)
    zxp = feature_map(bank, x_prime)
    value = float(zx @ zxp) / bank.n_features
    return KernelValue(value=value, x=np.asarray(x, float), x_prime=np.asarray(x_prime, float))


def window_id(X_train: np.ndarray) -> str:
    """Opaque identifier for a training window (hash of its contents)."""
    X = np.ascontiguousarray(X_train, dtype=np.float64)
    digest = hashlib.sha256()
    digest.update(str(X.shape).encode())
    digest.update(X.tobytes())
    return digest.hexdigest()[:12]


def scale_variances(Z_train: np.ndarray, mode: ScaleMode) -> np.ndarray:
    """Per-feature variance statistic of a (T, P) feature matrix.

    RMS is the mean of squares; SAMPLE_STD subtracts the squared mean.
    Tiny negative values from cancellation are clipped to zero.
    """
    v = np.mean(Z_train * Z_train, axis=0)
    if mode is ScaleMode.SAMPLE_STD:
        m = np.mean(Z_train, axis=0)
        v = v - m * m
    return np.maximum(v, 0.0)


def compute_scales(bank: FeatureBank, X_train: np.ndarray, mode: ScaleMode) -> StandardizedBank:
    """Estimate per-feature scales on a training window.

    Raises DegenerateScale, naming the feature index, if any scale falls
    below SCALE_FLOOR; near-constant features are reported, never clamped.
    """
    X = np.asarray(X_train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ParameterError("X_train must be a (T, K) matrix with T >= 2")
    Z = feature_map(bank, X)
    scales = np.sqrt(scale_variances(Z, mode))
    return StandardizedBank(
        bank=bank, scales=scales, mode=mode, training_window_id=window_id(X)
    )


def standardized_empirical_kernel(sbank: StandardizedBank, x: np.ndarray, x_prime: np.ndarray) -> KernelValue:
    """Kernel estimate with each feature divided by its estimated variance."""
    zx = feature_map(sbank.bank, x)
    zxp = feature_map(sbank.bank, x_prime)
    s2 = sbank.scales * sbank.scales
    value = float(np.sum(zx * zxp / s2)) / sbank.bank.n_features
    return KernelValue(value=value, x=np.asarray(x, float), x_prime=np.asarray(x_prime, float))
