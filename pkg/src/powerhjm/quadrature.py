"""Composite Gauss-Legendre quadrature for piecewise-smooth integrands.

Delivery-time integrands in this package are smooth between breakpoints of
the price forward curve, the long-term volatility, and deterministic model
coefficients, so the composite rule splits at those points and applies a
fixed-order Gauss-Legendre rule per segment. Long smooth segments are
subdivided so the per-segment polynomial approximation stays accurate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule configuration: nodes per segment and maximum segment length."""

    nodes_per_segment: int = 16
    max_segment_hours: float = 24.0

    def __post_init__(self):
        if self.nodes_per_segment < 1:
            raise ValueError("nodes_per_segment must be >= 1")
        if not self.max_segment_hours > 0.0:
            raise ValueError("max_segment_hours must be > 0")

    def to_dict(self) -> dict:
        return {
            "nodes_per_segment": self.nodes_per_segment,
            "max_segment_hours": self.max_segment_hours,
        }


DEFAULT_QUADRATURE = QuadratureSpec()


def segment_edges(a: float, b: float, breakpoints=(), max_len: float = np.inf) -> np.ndarray:
    """Cut points for ``[a, b]``: interior breakpoints plus length-capped subdivision."""
    if not b > a:
        raise ValueError("interval must satisfy a < b")
    pts = np.asarray(breakpoints, dtype=float)
    pts = pts[(pts > a) & (pts < b)]
    edges = np.unique(np.concatenate(([a], pts, [b])))
    if not np.isfinite(max_len):
        return edges
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, int(np.ceil((hi - lo) / max_len)))
        pieces.append(np.linspace(lo, hi, k + 1)[:-1])
    pieces.append(np.array([b]))
    return np.concatenate(pieces)


def nodes_weights(
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints=(),
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule on ``[a, b]``; weights sum to ``b - a``."""
    edges = segment_edges(a, b, breakpoints, spec.max_segment_hours)
    xi, wi = _leggauss(spec.nodes_per_segment)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


def integrate(f, a, b, spec: QuadratureSpec = DEFAULT_QUADRATURE, breakpoints=()) -> float:
    """Integral of a vectorized callable ``f`` over ``[a, b]``."""
    x, w = nodes_weights(a, b, spec, breakpoints)
    return float(np.dot(np.asarray(f(x), dtype=float), w))
