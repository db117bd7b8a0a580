"""Forward kernels, futures, day-ahead spot, intraday indices, discounting.

The forward kernel f_t(tau) is the price at trading time t of 1 MW
delivered instantly at tau: the product of the market noise and the
structural conditional mean. Every traded product is an average of the
kernel over its delivery period, evaluated by composite Gauss-Legendre
quadrature split at the breakpoints of the curve, the long-term
volatility, and the model coefficients. Interest is zero by default;
:func:`discounted_futures` provides the two settlement variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, DomainError
from .noise import NoiseState, VolatilityStructure
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec, nodes_weights
from .structural import StructuralModel


@dataclass(frozen=True)
class MarketState:
    """Everything needed to evaluate the kernel at one trading time.

    ``y`` has shape ``(dim,)`` for a single path or ``(n_paths, dim)``;
    ``noise`` must carry matching factor arrays at the same time.
    """

    t: float
    y: np.ndarray
    noise: NoiseState

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.noise.t != self.t:
            raise ValueError(f"noise state time {self.noise.t} differs from t={self.t}")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("structural state must be finite")


def initial_state(model: StructuralModel, vol: VolatilityStructure, n_paths: int | None = None) -> MarketState:
    """The deterministic time-0 state: initial model state, unit noise."""
    y = model.y0 if n_paths is None else np.tile(model.y0, (n_paths, 1))
    return MarketState(0.0, y, NoiseState.initial(vol, n_paths))


def forward_kernel(state: MarketState, model: StructuralModel, tau):
    """Kernel value(s) at delivery time(s) ``tau``; vectorized over paths."""
    taus = np.asarray(tau, dtype=float)
    if np.any(taus < state.t):
        raise ValueError("requires t <= tau")
    cm = model.conditional_mean(state.y, state.t, tau)
    if taus.ndim == 0:
        x = state.noise.value(float(tau))
    else:
        x = state.noise.values_grid(taus)
    return x * cm


def _delivery_breakpoints(model: StructuralModel, vol: VolatilityStructure, tau1: float, tau2: float) -> np.ndarray:
    return np.concatenate((model.breakpoints_in(tau1, tau2), vol.breakpoints_in(tau1, tau2)))


def delivery_rule(
    model: StructuralModel,
    vol: VolatilityStructure,
    tau1: float,
    tau2: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights over a delivery period, split at breakpoints."""
    return nodes_weights(tau1, tau2, quad, _delivery_breakpoints(model, vol, tau1, tau2))


def futures_price(
    state: MarketState,
    model: StructuralModel,
    tau1: float,
    tau2: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
):
    """Price of 1 MW delivered continuously over ``[tau1, tau2]``: the kernel average."""
    tau1 = float(tau1)
    tau2 = float(tau2)
    if not tau1 < tau2:
        raise ValueError("requires tau1 < tau2")
    if state.t > tau1:
        raise ValueError("requires t <= tau1")
    x, w = delivery_rule(model, state.noise.vol, tau1, tau2, quad)
    vals = forward_kernel(state, model, x)
    return vals @ w / (tau2 - tau1)


def day_ahead_spot(
    state: MarketState,
    model: StructuralModel,
    day: int,
    hour: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
):
    """Day-ahead spot for delivery day ``day``, hour ``hour``: an hourly futures.

    Hour ``h`` of day ``d`` starts ``24 d + h`` hours after the epoch; the
    state must be at or before the delivery start (the auction time).
    """
    day = int(day)
    hour = int(hour)
    if day < 0:
        raise ValueError("day must be >= 0")
    if not 0 <= hour <= 23:
        raise ValueError("hour must lie in 0..23")
    start = 24.0 * day + hour
    return futures_price(state, model, start, start + 1.0, quad)


def id_index(times, values, n: int, tau1: float, tau2: float):
    """Intraday index: time-averaged futures price over the pre-delivery window.

    Averages the sampled path ``values`` of the futures price over
    ``[tau1 - n, tau1 - 0.5]`` (hours) with the trapezoid rule on the sample
    grid, window endpoints interpolated linearly. ``n`` is 1 or 3, matching
    the one- and three-hour exchange indices; volume weighting is
    approximated by time weighting.
    """
    if n not in (1, 3):
        raise ValueError("n must be 1 or 3")
    if not float(tau1) < float(tau2):
        raise ValueError("requires tau1 < tau2")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise CoverageError("path needs at least 2 samples")
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("sample times must be strictly increasing")
    if values.shape[-1] != times.size:
        raise ValueError("values must have sample times along the last axis")
    lo = float(tau1) - n
    hi = float(tau1) - 0.5
    if times[0] > lo or times[-1] < hi:
        raise CoverageError(
            f"path covers [{times[0]}, {times[-1]}] but the index needs [{lo}, {hi}]"
        )
    inside = (times > lo) & (times < hi)
    grid = np.concatenate(([lo], times[inside], [hi]))
    vals_lo = _interp_path(times, values, lo)
    vals_hi = _interp_path(times, values, hi)
    vals = np.concatenate(
        (vals_lo[..., None], values[..., inside], vals_hi[..., None]), axis=-1
    )
    dx = np.diff(grid)
    integral = 0.5 * ((vals[..., :-1] + vals[..., 1:]) * dx).sum(axis=-1)
    out = 2.0 / (2.0 * n - 1.0) * integral
    return float(out) if np.ndim(out) == 0 else out


def _interp_path(times, values, x):
    """Linear interpolation of a (possibly multi-path) sampled curve at ``x``."""
    i = np.searchsorted(times, x, side="right")
    i = min(max(i, 1), times.size - 1)
    t0, t1 = times[i - 1], times[i]
    weight = (x - t0) / (t1 - t0)
    return np.asarray((1.0 - weight) * values[..., i - 1] + weight * values[..., i])


@dataclass(frozen=True)
class FlatDiscountCurve:
    """Flat continuously-compounded rate per hour; factor(t, tau) = exp(-r (tau-t))."""

    rate: float = 0.0

    def factor(self, t, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < t):
            raise ValueError("requires t <= tau")
        out = np.exp(-self.rate * (tau - t))
        return float(out) if out.ndim == 0 else out


class TabulatedDiscountCurve:
    """Discount factors tabulated from the epoch, log-linear between pillars.

    ``factor(t, tau)`` is the ratio d(tau) / d(t); it equals 1 at tau = t and
    is non-increasing whenever the tabulated factors are.
    """

    def __init__(self, times, factors):
        times = np.asarray(times, dtype=float)
        factors = np.asarray(factors, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("need at least 2 pillars")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("pillar times must be strictly increasing")
        if np.any(factors <= 0.0):
            raise ValueError("discount factors must be > 0")
        self.times = times
        self.log_factors = np.log(factors)

    def _log_df(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.times[0]) or np.any(x > self.times[-1]):
            raise DomainError("time outside tabulated discount range")
        return np.interp(x, self.times, self.log_factors)

    def factor(self, t, tau):
        out = np.exp(self._log_df(tau) - self._log_df(t))
        return float(out) if out.ndim == 0 else out


def discounted_futures(
    state: MarketState,
    model: StructuralModel,
    tau1: float,
    tau2: float,
    discount,
    mode: str = "continuous",
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
):
    """Futures price under a non-zero rate, for either settlement convention.

    ``continuous`` weights the kernel by discount factors and renormalizes by
    their integral; ``terminal`` discounts a single payment at the delivery
    end. With a zero rate both coincide with :func:`futures_price`.
    """
    if mode not in ("continuous", "terminal"):
        raise ValueError("mode must be 'continuous' or 'terminal'")
    tau1 = float(tau1)
    tau2 = float(tau2)
    if not tau1 < tau2:
        raise ValueError("requires tau1 < tau2")
    if state.t > tau1:
        raise ValueError("requires t <= tau1")
    x, w = delivery_rule(model, state.noise.vol, tau1, tau2, quad)
    d = discount.factor(state.t, x)
    vals = forward_kernel(state, model, x)
    weighted = (vals * d) @ w
    if mode == "continuous":
        return weighted / float(np.dot(d, w))
    return weighted / ((tau2 - tau1) * discount.factor(state.t, tau2))
