"""Piecewise-constant step functions of time.

Used for the long-term volatility term sigma2(tau) and for deterministic
model coefficients that are constant on delivery periods. Values are
right-continuous at the breakpoints and flat-extrapolated on both sides,
which keeps evaluation predictable on open-ended domains.
"""

from __future__ import annotations

import numpy as np


class PiecewiseConstant:
    """Right-continuous step function: ``values[i]`` on ``[starts[i], starts[i+1])``."""

    __slots__ = ("starts", "values")

    def __init__(self, starts, values):
        starts = np.asarray(starts, dtype=float)
        values = np.asarray(values, dtype=float)
        if starts.ndim != 1 or starts.size == 0:
            raise ValueError("starts must be a non-empty 1-D sequence")
        if starts.shape != values.shape:
            raise ValueError("starts and values must have the same length")
        if starts.size > 1 and np.any(np.diff(starts) <= 0.0):
            raise ValueError("starts must be strictly increasing")
        if not (np.all(np.isfinite(starts)) and np.all(np.isfinite(values))):
            raise ValueError("starts and values must be finite")
        self.starts = starts
        self.values = values

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls([0.0], [float(value)])

    @classmethod
    def from_config(cls, spec) -> "PiecewiseConstant":
        """Build from a plain number or a list of ``{start_hours, value}`` dicts."""
        if np.isscalar(spec):
            return cls.constant(float(spec))
        starts = [entry["start_hours"] for entry in spec]
        values = [entry["value"] for entry in spec]
        return cls(starts, values)

    def to_config(self) -> list[dict]:
        return [
            {"start_hours": float(s), "value": float(v)}
            for s, v in zip(self.starts, self.values)
        ]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.starts, x, side="right") - 1
        idx = np.clip(idx, 0, self.starts.size - 1)
        out = self.values[idx]
        return float(out) if x.ndim == 0 else out

    def breakpoints_in(self, a: float, b: float) -> np.ndarray:
        """Breakpoints strictly inside the open interval ``(a, b)``."""
        lo = np.searchsorted(self.starts, a, side="right")
        hi = np.searchsorted(self.starts, b, side="left")
        return self.starts[lo:hi]
