"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """An argument or configuration value is invalid; the message names it."""


class DegenerateScale(RuntimeError):
    """A feature's scale estimate fell below the scale floor on this window.

    Signals a near-constant feature; raised instead of clamping because a
    clamped scale would silently change the standardized kernel.
    """

    def __init__(self, indices, floor: float):
        self.indices = tuple(int(i) for i in indices)
        self.floor = float(floor)
        first = self.indices[0]
        extra = f" (and {len(self.indices) - 1} more)" if len(self.indices) > 1 else ""
        super().__init__(
            f"feature {first}{extra} has scale below {floor:g} on this training window"
        )


class DegenerateOracle(RuntimeError):
    """Too many degenerate Monte Carlo samples for a reliable estimate.

    Indicates the training window is too small or pathological: the
    standardization denominator vanished on more than the tolerated
    fraction of draws.
    """


class DegenerateDenominator(RuntimeError):
    """Baseline mean error is zero, so a degradation ratio is undefined."""
