"""Market noise: a positive, unit-mean lognormal martingale per delivery time.

The noise X_t(tau) multiplies the structural prediction of the delivery
price and captures trading-time disturbances (partial information,
illiquidity). It is modelled as a driftless geometric Brownian motion with
a deterministic two-factor volatility

    Sigma(t, tau) = (exp(-kappa (tau - t)) * sigma1, sigma2(tau)),

i.e. a short-term component decaying towards delivery plus a long-term
component that is piecewise constant on delivery periods. Only this GBM
family is provided; the framework itself admits any positive unit-mean
martingale, but no tractable non-GBM example is shipped.

The state of the whole noise surface is two scalar factors per path:

    s1(t) = sigma1 * int_0^t exp(-kappa (t-v)) dW1_v      (an OU process)
    w2(t) = W2_t

from which the noise at *any* delivery time is recovered exactly:

    ln X_t(tau) = exp(-kappa (tau-t)) s1(t) + sigma2(tau) w2(t) - V(t,tau)/2,

with V the accumulated log-variance. Factor transitions are exact Gaussian
steps, so simulation carries no discretization error and the same factor
draws drive every delivery time (the noise surface is perfectly dependent
across delivery times through the two Brownian motions).
"""

from __future__ import annotations

import json
import math

import numpy as np

from .piecewise import PiecewiseConstant
from . import quadrature


class VolatilityStructure:
    """Two-factor volatility for the market noise, with closed-form integrals."""

    __slots__ = ("kappa", "sigma1", "sigma2")

    def __init__(self, kappa: float, sigma1: float, sigma2):
        kappa = float(kappa)
        sigma1 = float(sigma1)
        if not (math.isfinite(kappa) and kappa > 0.0):
            raise ValueError("kappa must be finite and > 0")
        if not (math.isfinite(sigma1) and sigma1 >= 0.0):
            raise ValueError("sigma1 must be finite and >= 0")
        if not isinstance(sigma2, PiecewiseConstant):
            sigma2 = PiecewiseConstant.from_config(sigma2)
        if np.any(sigma2.values < 0.0):
            raise ValueError("sigma2 must be >= 0 on every segment")
        self.kappa = kappa
        self.sigma1 = sigma1
        self.sigma2 = sigma2

    # -- closed-form integrals ------------------------------------------

    def log_covariance(self, t, tau_a, tau_b):
        """Covariance of ln X_t(tau_a) and ln X_t(tau_b) accumulated over [0, t].

        Equals the time integral of Sigma(v, tau_a) . Sigma(v, tau_b); closed
        form, written to stay stable for large time arguments.
        """
        t = np.asarray(t, dtype=float)
        tau_a = np.asarray(tau_a, dtype=float)
        tau_b = np.asarray(tau_b, dtype=float)
        if np.any(t < 0.0) or np.any(t > tau_a) or np.any(t > tau_b):
            raise ValueError("requires 0 <= t <= min(tau_a, tau_b)")
        short = (
            self.sigma1**2
            / (2.0 * self.kappa)
            * (np.exp(-self.kappa * (tau_a + tau_b - 2.0 * t)) - np.exp(-self.kappa * (tau_a + tau_b)))
        )
        long = self.sigma2(tau_a) * self.sigma2(tau_b) * t
        out = short + long
        return float(out) if out.ndim == 0 else out

    def log_variance(self, t, tau):
        return self.log_covariance(t, tau, tau)

    def cross_moment(self, t, u, s):
        """Expected product E[X_t(u) X_t(s)]; symmetric, >= 1, and 1 at t = 0."""
        cov = self.log_covariance(t, u, s)
        out = np.exp(cov)
        return float(out) if np.ndim(out) == 0 else out

    def step_log_covariance(self, t0, t1, tau_a, tau_b):
        """Same integral restricted to a step [t0, t1]."""
        return self.log_covariance(t1, tau_a, tau_b) - self.log_covariance(t0, tau_a, tau_b)

    def breakpoints_in(self, a: float, b: float) -> np.ndarray:
        return self.sigma2.breakpoints_in(a, b)

    # -- configuration ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2.to_config(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VolatilityStructure":
        return cls(d["kappa"], d["sigma1"], PiecewiseConstant.from_config(d["sigma2"]))

    @classmethod
    def from_json(cls, text: str) -> "VolatilityStructure":
        return cls.from_dict(json.loads(text))


class GeneralVolatility:
    """Noise volatility given as an arbitrary callable ``sigma(t, tau) -> vector``.

    Covariance integrals fall back to composite 64-node Gauss-Legendre in
    trading time. Supports pricing-side quantities only; path simulation is
    restricted to :class:`VolatilityStructure`.
    """

    def __init__(self, sigma, nodes_per_segment: int = 64, max_segment_hours: float = 24.0):
        self.sigma = sigma
        self._spec = quadrature.QuadratureSpec(nodes_per_segment, max_segment_hours)

    def log_covariance(self, t: float, tau_a: float, tau_b: float) -> float:
        t = float(t)
        if t < 0.0 or t > min(tau_a, tau_b):
            raise ValueError("requires 0 <= t <= min(tau_a, tau_b)")
        if t == 0.0:
            return 0.0

        def integrand(v):
            v = np.atleast_1d(v)
            return np.array(
                [np.dot(np.asarray(self.sigma(vi, tau_a)), np.asarray(self.sigma(vi, tau_b))) for vi in v]
            )

        return quadrature.integrate(integrand, 0.0, t, self._spec)

    def log_variance(self, t: float, tau: float) -> float:
        return self.log_covariance(t, tau, tau)

    def cross_moment(self, t: float, u: float, s: float) -> float:
        return math.exp(self.log_covariance(t, u, s))


class NoiseState:
    """Noise factors of one or many paths at a single trading time.

    ``short_factor`` and ``long_factor`` are scalars (single path) or arrays
    of shape ``(n_paths,)``. ``values_grid`` reconstructs the noise exactly at
    any delivery times; ``values`` evaluates it on the attached delivery grid.
    """

    __slots__ = ("vol", "t", "short_factor", "long_factor", "delivery_grid")

    def __init__(self, vol: VolatilityStructure, t: float, short_factor, long_factor, delivery_grid=None):
        self.vol = vol
        self.t = float(t)
        self.short_factor = np.asarray(short_factor, dtype=float)
        self.long_factor = np.asarray(long_factor, dtype=float)
        if self.short_factor.shape != self.long_factor.shape:
            raise ValueError("factor arrays must have the same shape")
        self.delivery_grid = None if delivery_grid is None else np.asarray(delivery_grid, dtype=float)

    @classmethod
    def initial(cls, vol: VolatilityStructure, n_paths: int | None = None, delivery_grid=None) -> "NoiseState":
        shape = () if n_paths is None else (int(n_paths),)
        return cls(vol, 0.0, np.zeros(shape), np.zeros(shape), delivery_grid)

    @property
    def n_paths(self) -> int:
        return 1 if self.short_factor.ndim == 0 else self.short_factor.shape[0]

    def expand(self, n_paths: int) -> "NoiseState":
        """Broadcast a single-path state to ``n_paths`` identical paths."""
        if self.short_factor.ndim != 0:
            raise ValueError("expand applies to single-path states")
        return NoiseState(
            self.vol,
            self.t,
            np.full(n_paths, float(self.short_factor)),
            np.full(n_paths, float(self.long_factor)),
            self.delivery_grid,
        )

    def value(self, tau: float):
        """Noise at a single delivery time; shape follows the factor arrays."""
        tau = float(tau)
        if tau < self.t:
            raise ValueError("delivery time must be >= trading time")
        log_x = (
            math.exp(-self.vol.kappa * (tau - self.t)) * self.short_factor
            + self.vol.sigma2(tau) * self.long_factor
            - 0.5 * self.vol.log_variance(self.t, tau)
        )
        out = np.exp(log_x)
        return float(out) if out.ndim == 0 else out

    def values_grid(self, taus) -> np.ndarray:
        """Noise at delivery times ``taus``; shape ``(n_paths, len(taus))`` or ``(len(taus),)``."""
        taus = np.asarray(taus, dtype=float)
        if np.any(taus < self.t):
            raise ValueError("delivery times must be >= trading time")
        decay = np.exp(-self.vol.kappa * (taus - self.t))
        s2 = self.vol.sigma2(taus)
        half_var = 0.5 * self.vol.log_variance(np.full_like(taus, self.t), taus)
        log_x = (
            self.short_factor[..., None] * decay
            + self.long_factor[..., None] * s2
            - half_var
        )
        return np.exp(log_x)

    @property
    def values(self) -> np.ndarray:
        if self.delivery_grid is None:
            raise ValueError("state has no delivery grid attached")
        return self.values_grid(self.delivery_grid)

    def log_variance(self, tau):
        return self.vol.log_variance(self.t, tau)


def advance_noise(state: NoiseState, t_next: float, rng: np.random.Generator) -> NoiseState:
    """One exact factor step from ``state.t`` to ``t_next``.

    Two standard normals are drawn per path and step, in a fixed order, so a
    seeded stream reproduces the same surface regardless of which delivery
    times are later evaluated.
    """
    t_next = float(t_next)
    dt = t_next - state.t
    if dt < 0.0:
        raise ValueError("t_next must be >= state.t")
    vol = state.vol
    if dt == 0.0:
        return NoiseState(vol, t_next, state.short_factor.copy(), state.long_factor.copy(), state.delivery_grid)
    shape = state.short_factor.shape
    z1 = rng.standard_normal(shape)
    z2 = rng.standard_normal(shape)
    decay = math.exp(-vol.kappa * dt)
    sd1 = vol.sigma1 * math.sqrt(-math.expm1(-2.0 * vol.kappa * dt) / (2.0 * vol.kappa))
    s1 = decay * state.short_factor + sd1 * z1
    w2 = state.long_factor + math.sqrt(dt) * z2
    return NoiseState(vol, t_next, s1, w2, state.delivery_grid)


def simulate_noise(
    vol: VolatilityStructure,
    trading_grid,
    delivery_grid,
    rng: np.random.Generator,
    n_paths: int | None = None,
) -> list[NoiseState]:
    """Exact joint simulation of the noise surface along a trading grid.

    Returns one :class:`NoiseState` per trading time. The states evaluate the
    noise on ``delivery_grid`` (and at any other delivery time) with the exact
    lognormal law; the noise starts at 1 and stays a unit-mean martingale.
    """
    trading_grid = np.asarray(trading_grid, dtype=float)
    delivery_grid = np.asarray(delivery_grid, dtype=float)
    if trading_grid.size == 0 or delivery_grid.size == 0:
        raise ValueError("grids must be non-empty")
    if np.any(np.diff(trading_grid) <= 0.0) or np.any(np.diff(delivery_grid) <= 0.0):
        raise ValueError("grids must be strictly increasing")
    if trading_grid[0] < 0.0 or trading_grid[-1] > delivery_grid[0]:
        raise ValueError("trading grid must lie within [0, first delivery]")
    state = NoiseState.initial(vol, n_paths, delivery_grid)
    out = []
    for t in trading_grid:
        if t > state.t:
            state = advance_noise(state, t, rng)
        out.append(state)
    return out
