"""Structural component: market-state processes and their price maps.

A structural model is a pair ``(g, Y)``: an R^n-valued state process Y
(demand, load, long-run level, ...) and a map ``g`` turning the state into
a delivery price. The quantity the rest of the package consumes is the
conditional mean ``E[g(Y_tau) | Y_t = y]``, which for every shipped model
decomposes affinely,

    E[g(Y_tau) | Y_t = y] = g(A(t, tau) y + B(t, tau)),

with deterministic coefficients. Four concrete models are provided:

- :class:`SchwartzSmithModel`: exponential of an OU factor plus a drifted
  Brownian factor (two-factor spot model, multiplicative).
- :class:`LuciaSchwartzModel`: the arithmetic two-factor variant, the sum
  of the same two factors.
- :class:`MeritOrderSinhModel`: price through a sinh-shaped merit order
  curve driven by an OU demand process.
- :class:`OUFactorModel`: a sum of independent Ornstein-Uhlenbeck factors
  driven by drift + Brownian motion + compound-Poisson jumps.

State transitions are sampled from their exact laws; there is no Euler
error anywhere. :func:`wrap_with_pfc` recenters any model on a given price
forward curve, either additively or multiplicatively, so that the model's
unconditional mean reproduces the curve.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .curve import PriceForwardCurve
from .errors import DegenerateModelError
from .piecewise import PiecewiseConstant


@dataclass(frozen=True)
class AffineCoefficients:
    """Coefficients of the conditional-mean decomposition: a matrix and an offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __iter__(self):
        return iter((self.matrix, self.offset))


class StructuralModel(ABC):
    """Interface every structural component implements.

    States are arrays of shape ``(dim,)`` (one path) or ``(n_paths, dim)``;
    delivery times may be scalars or 1-D arrays. All operations are pure and
    models are immutable after construction; simulation draws from an
    explicitly passed generator.
    """

    dim: int
    y0: np.ndarray

    # -- shaping helpers -------------------------------------------------

    def _states(self, y) -> tuple[np.ndarray, bool]:
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 1 and arr.shape[0] == self.dim:
            return arr[None, :], True
        if arr.ndim == 2 and arr.shape[1] == self.dim:
            return arr, False
        raise ValueError(f"state must have shape ({self.dim},) or (n_paths, {self.dim})")

    # -- core operations --------------------------------------------------

    @abstractmethod
    def _cond_mean_grid(self, states: np.ndarray, t: float, taus: np.ndarray) -> np.ndarray:
        """Conditional means, shape ``(n_paths, len(taus))``."""

    @abstractmethod
    def _transition(self, states: np.ndarray, t: float, tau: float, rng: np.random.Generator) -> np.ndarray:
        """One exact draw of the state at ``tau`` per row of ``states``."""

    def conditional_mean(self, y, t: float, tau):
        """Expected delivery price ``E[g(Y_tau) | Y_t = y]``.

        Vectorized over paths (rows of ``y``) and delivery times ``tau``.
        """
        states, single = self._states(y)
        if not np.all(np.isfinite(states)):
            raise ValueError("state must be finite")
        t = float(t)
        taus = np.asarray(tau, dtype=float)
        scalar_tau = taus.ndim == 0
        taus = np.atleast_1d(taus)
        if np.any(taus < t):
            raise ValueError("requires t <= tau")
        out = self._cond_mean_grid(states, t, taus)
        if single and scalar_tau:
            return float(out[0, 0])
        if single:
            return out[0]
        if scalar_tau:
            return out[:, 0]
        return out

    def mean_product(self, y, t: float, u, s):
        """Product of conditional means for two delivery times (symmetric in u, s)."""
        return self.conditional_mean(y, t, u) * self.conditional_mean(y, t, s)

    def unconditional_mean(self, tau):
        """Expected delivery price seen from time 0 at the initial state."""
        return self.conditional_mean(self.y0, 0.0, tau)

    def simulate_transition(self, y, t: float, tau: float, rng: np.random.Generator):
        """Exact draw of the state at ``tau`` given the state ``y`` at ``t``."""
        states, single = self._states(y)
        t = float(t)
        tau = float(tau)
        if tau < t:
            raise ValueError("requires t <= tau")
        out = states.copy() if tau == t else self._transition(states, t, tau, rng)
        return out[0] if single else out

    def breakpoints_in(self, a: float, b: float) -> np.ndarray:
        """Delivery times in ``(a, b)`` where the conditional mean may kink or jump."""
        return np.empty(0)

    @abstractmethod
    def to_dict(self) -> dict:
        """Configuration dictionary; inverse of :func:`model_from_config`."""


class AffineModel(StructuralModel):
    """Structural model with an explicit price map and affine decomposition."""

    @abstractmethod
    def _g(self, arr: np.ndarray) -> np.ndarray:
        """Price map applied along the last axis."""

    def g(self, y):
        arr = np.asarray(y, dtype=float)
        if arr.shape[-1] != self.dim:
            raise ValueError(f"state must have last dimension {self.dim}")
        out = self._g(arr)
        return float(out) if np.ndim(out) == 0 else out

    @abstractmethod
    def affine_coefficients(self, t: float, tau: float) -> AffineCoefficients:
        """Deterministic ``(matrix, offset)`` with conditional mean ``g(A y + B)``."""


def _two_factor_step(states, dt, kappa, sigma1, sigma2, rho, mu2, rng):
    """Exact joint step of (OU factor, correlated drifted BM)."""
    c11 = sigma1**2 * (-math.expm1(-2.0 * kappa * dt)) / (2.0 * kappa)
    c22 = sigma2**2 * dt
    c12 = rho * sigma1 * sigma2 * (-math.expm1(-kappa * dt)) / kappa
    if c11 > 0.0:
        l11 = math.sqrt(c11)
        l21 = c12 / l11
        l22 = math.sqrt(max(c22 - l21**2, 0.0))
    else:
        l11 = 0.0
        l21 = 0.0
        l22 = math.sqrt(c22)
    z = rng.standard_normal((states.shape[0], 2))
    out = np.empty_like(states)
    out[:, 0] = math.exp(-kappa * dt) * states[:, 0] + l11 * z[:, 0]
    out[:, 1] = states[:, 1] + mu2 * dt + l21 * z[:, 0] + l22 * z[:, 1]
    return out


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be finite and > 0")
    return float(value)


class SchwartzSmithModel(AffineModel):
    """Exponential two-factor model: price = exp(short OU factor + long drifted BM).

    The conditional mean is log-affine in the state; the entire scalar
    offset of the decomposition sits in the second (drift) coordinate of
    the offset vector, the first coordinate being zero by convention.
    """

    dim = 2

    def __init__(self, kappa, sigma1, sigma2, rho, mu2, y0=(0.0, 0.0)):
        self.kappa = _check_positive("kappa", kappa)
        self.sigma1 = _check_positive("sigma1", sigma1)
        self.sigma2 = _check_positive("sigma2", sigma2)
        rho = float(rho)
        if not -1.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [-1, 1]")
        self.rho = rho
        self.mu2 = float(mu2)
        self.y0 = np.asarray(y0, dtype=float)
        if self.y0.shape != (2,):
            raise ValueError("y0 must have shape (2,)")

    def _log_offset(self, dt):
        """Scalar part of the log conditional mean over a horizon ``dt``."""
        e2k = -np.expm1(-2.0 * self.kappa * dt)
        e1k = -np.expm1(-self.kappa * dt)
        return (
            (self.mu2 + 0.5 * self.sigma2**2) * dt
            + self.sigma1**2 / (4.0 * self.kappa) * e2k
            + self.rho * self.sigma1 * self.sigma2 / self.kappa * e1k
        )

    def _cond_mean_grid(self, states, t, taus):
        dt = taus - t
        decay = np.exp(-self.kappa * dt)
        log_mean = states[:, 0:1] * decay[None, :] + states[:, 1:2] + self._log_offset(dt)[None, :]
        return np.exp(log_mean)

    def _g(self, arr):
        return np.exp(arr.sum(axis=-1))

    def affine_coefficients(self, t, tau):
        dt = float(tau) - float(t)
        if dt < 0.0:
            raise ValueError("requires t <= tau")
        matrix = np.diag([math.exp(-self.kappa * dt), 1.0])
        offset = np.array([0.0, float(self._log_offset(np.float64(dt)))])
        return AffineCoefficients(matrix, offset)

    def _transition(self, states, t, tau, rng):
        return _two_factor_step(states, tau - t, self.kappa, self.sigma1, self.sigma2, self.rho, self.mu2, rng)

    def to_dict(self):
        return {
            "model": "schwartz_smith",
            "kappa": self.kappa,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "rho": self.rho,
            "mu2": self.mu2,
            "y0": [float(x) for x in self.y0],
        }


class LuciaSchwartzModel(AffineModel):
    """Arithmetic two-factor model: price = short OU factor + long drifted BM."""

    dim = 2

    def __init__(self, kappa, sigma1, sigma2, rho, mu2, y0=(0.0, 0.0)):
        self.kappa = _check_positive("kappa", kappa)
        self.sigma1 = _check_positive("sigma1", sigma1)
        self.sigma2 = _check_positive("sigma2", sigma2)
        rho = float(rho)
        if not -1.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [-1, 1]")
        self.rho = rho
        self.mu2 = float(mu2)
        self.y0 = np.asarray(y0, dtype=float)
        if self.y0.shape != (2,):
            raise ValueError("y0 must have shape (2,)")

    def _cond_mean_grid(self, states, t, taus):
        dt = taus - t
        decay = np.exp(-self.kappa * dt)
        return states[:, 0:1] * decay[None, :] + states[:, 1:2] + self.mu2 * dt[None, :]

    def _g(self, arr):
        return arr.sum(axis=-1)

    def affine_coefficients(self, t, tau):
        dt = float(tau) - float(t)
        if dt < 0.0:
            raise ValueError("requires t <= tau")
        matrix = np.diag([math.exp(-self.kappa * dt), 1.0])
        offset = np.array([0.0, self.mu2 * dt])
        return AffineCoefficients(matrix, offset)

    def _transition(self, states, t, tau, rng):
        return _two_factor_step(states, tau - t, self.kappa, self.sigma1, self.sigma2, self.rho, self.mu2, rng)

    def to_dict(self):
        return {
            "model": "lucia_schwartz",
            "kappa": self.kappa,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "rho": self.rho,
            "mu2": self.mu2,
            "y0": [float(x) for x in self.y0],
        }


class MeritOrderSinhModel(AffineModel):
    """Merit-order model: price = gamma + beta(t) * sinh(alpha * demand).

    Demand follows a Gaussian OU process starting at ``d0``; ``beta`` is a
    positive deterministic scale, piecewise constant in time. The state is
    ``(beta(t), demand)``, so the decomposition matrix rescales the first
    coordinate between the beta segments.
    """

    dim = 2

    def __init__(self, gamma, alpha, lam, sigma, beta, d0: float = 0.0):
        self.gamma = _check_positive("gamma", gamma)
        self.alpha = _check_positive("alpha", alpha)
        self.lam = _check_positive("lam", lam)
        self.sigma = _check_positive("sigma", sigma)
        if not isinstance(beta, PiecewiseConstant):
            beta = PiecewiseConstant.from_config(beta)
        if np.any(beta.values <= 0.0):
            raise ValueError("beta must be > 0 on every segment")
        self.beta = beta
        self.d0 = float(d0)
        self.y0 = np.array([beta(0.0), self.d0])

    def _nu2(self, dt):
        """Variance of the demand increment over a horizon ``dt``."""
        return self.sigma**2 * (-np.expm1(-2.0 * self.lam * dt)) / (2.0 * self.lam)

    def _cond_mean_grid(self, states, t, taus):
        dt = taus - t
        scale = self.beta(taus) / self.beta(t) * np.exp(0.5 * self.alpha**2 * self._nu2(dt))
        inner = self.alpha * np.exp(-self.lam * dt)[None, :] * states[:, 1:2]
        return self.gamma + states[:, 0:1] * scale[None, :] * np.sinh(inner)

    def _g(self, arr):
        return self.gamma + arr[..., 0] * np.sinh(self.alpha * arr[..., 1])

    def affine_coefficients(self, t, tau):
        dt = float(tau) - float(t)
        if dt < 0.0:
            raise ValueError("requires t <= tau")
        scale = self.beta(tau) / self.beta(t) * math.exp(0.5 * self.alpha**2 * float(self._nu2(np.float64(dt))))
        matrix = np.diag([scale, math.exp(-self.lam * dt)])
        return AffineCoefficients(matrix, np.zeros(2))

    def _transition(self, states, t, tau, rng):
        dt = tau - t
        z = rng.standard_normal(states.shape[0])
        out = np.empty_like(states)
        out[:, 0] = states[:, 0] * (self.beta(tau) / self.beta(t))
        out[:, 1] = math.exp(-self.lam * dt) * states[:, 1] + math.sqrt(float(self._nu2(np.float64(dt)))) * z
        return out

    def breakpoints_in(self, a, b):
        return self.beta.breakpoints_in(a, b)

    def to_dict(self):
        return {
            "model": "structural_sinh",
            "gamma": self.gamma,
            "alpha": self.alpha,
            "lambda": self.lam,
            "sigma": self.sigma,
            "beta": self.beta.to_config(),
            "d0": self.d0,
        }


@dataclass(frozen=True)
class OUFactor:
    """One mean-reverting factor: drift + Brownian + compound-Poisson jumps.

    Jump sizes are exponential with mean ``|jump_mean|`` and the sign of
    ``jump_mean``; only the mean enters the conditional-mean formulas.
    """

    decay: float
    drift: float = 0.0
    sigma: float = 0.0
    jump_rate: float = 0.0
    jump_mean: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.decay) and self.decay > 0.0):
            raise ValueError("decay must be finite and > 0")
        if self.sigma < 0.0 or self.jump_rate < 0.0:
            raise ValueError("sigma and jump_rate must be >= 0")

    @property
    def mean_rate(self) -> float:
        """Expected driver increment per hour (drift plus jump compensator)."""
        return self.drift + self.jump_rate * self.jump_mean


class OUFactorModel(AffineModel):
    """Sum of independent OU factors; price = sum of the coordinates."""

    def __init__(self, factors, y0=None):
        factors = [f if isinstance(f, OUFactor) else OUFactor(**f) for f in factors]
        if not factors:
            raise ValueError("at least one factor is required")
        self.factors = tuple(factors)
        self.dim = len(factors)
        self._decay = np.array([f.decay for f in factors])
        self._drift = np.array([f.drift for f in factors])
        self._sigma = np.array([f.sigma for f in factors])
        self._jump_rate = np.array([f.jump_rate for f in factors])
        self._jump_mean = np.array([f.jump_mean for f in factors])
        self._mean_rate = np.array([f.mean_rate for f in factors])
        self.y0 = np.zeros(self.dim) if y0 is None else np.asarray(y0, dtype=float)
        if self.y0.shape != (self.dim,):
            raise ValueError(f"y0 must have shape ({self.dim},)")

    def _offset(self, dt):
        """Expected accumulated driver contribution, shape (dim, len(dt))."""
        return (self._mean_rate / self._decay)[:, None] * (-np.expm1(-self._decay[:, None] * dt[None, :]))

    def _cond_mean_grid(self, states, t, taus):
        dt = taus - t
        decay = np.exp(-self._decay[:, None] * dt[None, :])
        return states @ decay + self._offset(dt).sum(axis=0)[None, :]

    def _g(self, arr):
        return arr.sum(axis=-1)

    def affine_coefficients(self, t, tau):
        dt = float(tau) - float(t)
        if dt < 0.0:
            raise ValueError("requires t <= tau")
        matrix = np.diag(np.exp(-self._decay * dt))
        offset = self._offset(np.array([dt]))[:, 0]
        return AffineCoefficients(matrix, offset)

    def _transition(self, states, t, tau, rng):
        dt = tau - t
        decay = np.exp(-self._decay * dt)
        out = states * decay[None, :] + (self._drift / self._decay * (-np.expm1(-self._decay * dt)))[None, :]
        sd = self._sigma * np.sqrt(-np.expm1(-2.0 * self._decay * dt) / (2.0 * self._decay))
        out = out + sd[None, :] * rng.standard_normal(states.shape)
        for i, f in enumerate(self.factors):
            if f.jump_rate == 0.0:
                continue
            counts = rng.poisson(f.jump_rate * dt, states.shape[0])
            total = int(counts.sum())
            times = rng.uniform(t, tau, total)
            sizes = math.copysign(1.0, f.jump_mean) * rng.exponential(abs(f.jump_mean), total)
            contrib = np.zeros(states.shape[0])
            np.add.at(contrib, np.repeat(np.arange(states.shape[0]), counts), sizes * np.exp(-f.decay * (tau - times)))
            out[:, i] += contrib
        return out

    def to_dict(self):
        return {
            "model": "levy_ou_factor",
            "factors": [
                {
                    "lambda": f.decay,
                    "mu": f.drift,
                    "sigma": f.sigma,
                    "jump_rate": f.jump_rate,
                    "jump_mean": f.jump_mean,
                }
                for f in self.factors
            ],
            "y0": [float(x) for x in self.y0],
        }


class CurveConsistentModel(StructuralModel):
    """A structural model recentred so its unconditional mean is a given curve.

    ``arithmetic`` shifts the price by ``f0(tau) - E g(Y_tau)``;
    ``geometric`` rescales it by ``f0(tau) / E g(Y_tau)``. Either way the
    wrapped conditional mean at time 0 reproduces the curve exactly. The
    arithmetic wrap can produce negative kernels when the base model swings
    below its mean by more than the curve level; that is allowed (negative
    prices occur) and deliberately not clamped.
    """

    def __init__(self, base: StructuralModel, pfc: PriceForwardCurve, mode: str = "arithmetic"):
        if isinstance(base, CurveConsistentModel):
            raise ValueError("model is already curve-consistent")
        if mode not in ("arithmetic", "geometric"):
            raise ValueError("mode must be 'arithmetic' or 'geometric'")
        self.base = base
        self.pfc = pfc
        self.mode = mode
        self.dim = base.dim
        self.y0 = base.y0
        if mode == "geometric":
            probe = np.linspace(pfc.start, pfc.horizon, 257)[:-1]
            probe = np.unique(np.concatenate((probe, pfc.breakpoints)))
            means = np.atleast_1d(base.unconditional_mean(probe))
            floor = 1e-12 * max(1.0, float(np.abs(means).max()))
            if means.min() <= floor:
                raise DegenerateModelError(
                    "geometric wrap needs the base unconditional mean bounded away from zero"
                )

    def _base_mean(self, taus):
        return self.base._cond_mean_grid(self.base.y0[None, :], 0.0, taus)[0]

    def _cond_mean_grid(self, states, t, taus):
        base_cm = self.base._cond_mean_grid(states, t, taus)
        mean = self._base_mean(taus)
        f0 = np.atleast_1d(self.pfc.value(taus))
        if self.mode == "arithmetic":
            return f0[None, :] + base_cm - mean[None, :]
        if np.any(mean <= 0.0):
            raise DegenerateModelError("base unconditional mean hit zero under geometric wrap")
        return f0[None, :] * base_cm / mean[None, :]

    def _transition(self, states, t, tau, rng):
        return self.base._transition(states, t, tau, rng)

    def breakpoints_in(self, a, b):
        return np.unique(np.concatenate((self.base.breakpoints_in(a, b), self.pfc.breakpoints_in(a, b))))

    def to_dict(self):
        return {
            "model": "pfc_wrapped",
            "mode": self.mode,
            "base": self.base.to_dict(),
            "pfc": self.pfc.to_dict(),
        }


def wrap_with_pfc(model: StructuralModel, pfc: PriceForwardCurve, mode: str = "arithmetic") -> CurveConsistentModel:
    """Make ``model`` consistent with the curve: E[kernel] = pfc on its domain."""
    return CurveConsistentModel(model, pfc, mode)


_MODEL_KEYS = {"schwartz_smith", "lucia_schwartz", "structural_sinh", "levy_ou_factor"}


def model_from_config(d: dict) -> StructuralModel:
    """Build a structural model from its configuration dictionary."""
    kind = d.get("model")
    if kind == "schwartz_smith":
        return SchwartzSmithModel(d["kappa"], d["sigma1"], d["sigma2"], d["rho"], d["mu2"], d.get("y0", (0.0, 0.0)))
    if kind == "lucia_schwartz":
        return LuciaSchwartzModel(d["kappa"], d["sigma1"], d["sigma2"], d["rho"], d["mu2"], d.get("y0", (0.0, 0.0)))
    if kind == "structural_sinh":
        return MeritOrderSinhModel(
            d["gamma"], d["alpha"], d["lambda"], d["sigma"], PiecewiseConstant.from_config(d["beta"]), d.get("d0", 0.0)
        )
    if kind == "levy_ou_factor":
        factors = [
            OUFactor(
                decay=f["lambda"],
                drift=f.get("mu", 0.0),
                sigma=f.get("sigma", 0.0),
                jump_rate=f.get("jump_rate", 0.0),
                jump_mean=f.get("jump_mean", 0.0),
            )
            for f in d["factors"]
        ]
        return OUFactorModel(factors, d.get("y0"))
    if kind == "pfc_wrapped":
        base = model_from_config(d["base"])
        return CurveConsistentModel(base, PriceForwardCurve.from_dict(d["pfc"]), d["mode"])
    raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(_MODEL_KEYS)}")


def model_from_json(text: str) -> StructuralModel:
    return model_from_config(json.loads(text))
