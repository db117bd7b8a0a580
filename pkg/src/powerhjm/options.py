"""Options on futures: moments, lognormal moment matching, and MC pricing.

Conditioned on the structural state at maturity, the futures price is an
average of correlated lognormals (one per delivery instant), whose first
two moments have closed double-integral forms. Matching a lognormal to
those moments turns the conditional option price into a Black-Scholes
formula; the unconditional price averages the conditional one over draws
of the state at maturity. :func:`mc_option_price` prices the same payoff
by full joint simulation with no lognormal assumption and serves as the
approximation's independent check.

All option values are struck at valuation time 0 with zero interest; the
payoff of a call is ``(tau2 - tau1) * (F_T(tau1, tau2) - K)^+``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import InfeasibleFitError
from .noise import NoiseState, VolatilityStructure, advance_noise
from .pricing import delivery_rule
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec
from .structural import StructuralModel


@dataclass(frozen=True)
class OptionSpec:
    """European option on a futures contract.

    ``maturity`` (hours) must not exceed the delivery start; a zero strike
    is allowed as the degenerate contract paying the full futures leg.
    """

    maturity: float
    strike: float
    tau1: float
    tau2: float
    kind: str = "call"

    def __post_init__(self):
        if not 0.0 <= self.maturity <= self.tau1:
            raise ValueError("requires 0 <= maturity <= tau1")
        if not self.tau1 < self.tau2:
            raise ValueError("requires tau1 < tau2")
        if not self.strike >= 0.0:
            raise ValueError("strike must be >= 0")
        if self.kind not in ("call", "put"):
            raise ValueError("kind must be 'call' or 'put'")

    @property
    def delivery_length(self) -> float:
        return self.tau2 - self.tau1

    @classmethod
    def from_config(cls, d: dict) -> "OptionSpec":
        return cls(d["T"], d["K"], d["tau1"], d["tau2"], d.get("kind", "call"))

    @classmethod
    def from_json(cls, text: str) -> "OptionSpec":
        return cls.from_config(json.loads(text))

    def to_dict(self) -> dict:
        return {"T": self.maturity, "K": self.strike, "tau1": self.tau1, "tau2": self.tau2, "kind": self.kind}


@dataclass(frozen=True)
class LognormalFit:
    """Matched lognormal for the futures price conditioned on the state ``y``."""

    mu: float
    sigma: float
    y: np.ndarray

    @property
    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    @property
    def second_moment(self) -> float:
        return math.exp(2.0 * self.mu + 2.0 * self.sigma**2)


@dataclass(frozen=True)
class PriceEstimate:
    """A price with its Monte Carlo standard error and provenance."""

    price: float
    se: float
    method: str
    n_paths: int
    n_infeasible: int = 0

    def to_dict(self) -> dict:
        return {
            "price": self.price,
            "se": self.se,
            "method": self.method,
            "n_paths": self.n_paths,
            "n_infeasible": self.n_infeasible,
        }


def _seeded_rng(seed: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _moment_blocks(model, vol, states, t, tau1, tau2, quad):
    """First moment, raw second moment and variance per state row."""
    nodes, w = delivery_rule(model, vol, tau1, tau2, quad)
    length = tau2 - tau1
    h = model.conditional_mean(states, t, nodes)
    h = np.atleast_2d(h)
    m1 = h @ w / length
    wx = vol.cross_moment(t, nodes[:, None], nodes[None, :])
    ww = w[:, None] * w[None, :]
    m2 = ((h @ (wx * ww)) * h).sum(axis=1) / length**2
    var = ((h @ ((wx - 1.0) * ww)) * h).sum(axis=1) / length**2
    return m1, m2, np.maximum(var, 0.0)


def futures_moments(
    model: StructuralModel,
    vol: VolatilityStructure,
    y,
    t: float,
    tau1: float,
    tau2: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
):
    """First two moments of the futures price given the structural state ``y`` at ``t``.

    The first moment averages the conditional mean over delivery; the second
    couples delivery instants through the expected noise products via a
    tensor-product rule on the same node set.
    """
    if not float(tau1) < float(tau2):
        raise ValueError("requires tau1 < tau2")
    if float(t) > float(tau1):
        raise ValueError("requires t <= tau1")
    states, single = model._states(y)
    m1, m2, _ = _moment_blocks(model, vol, states, float(t), float(tau1), float(tau2), quad)
    if single:
        return float(m1[0]), float(m2[0])
    return m1, m2


def futures_variance(
    model: StructuralModel,
    vol: VolatilityStructure,
    y,
    t: float,
    tau1: float,
    tau2: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
):
    """Conditional variance of the futures price; equals m2 - m1^2 up to roundoff."""
    if not float(tau1) < float(tau2):
        raise ValueError("requires tau1 < tau2")
    if float(t) > float(tau1):
        raise ValueError("requires t <= tau1")
    states, single = model._states(y)
    _, _, var = _moment_blocks(model, vol, states, float(t), float(tau1), float(tau2), quad)
    return float(var[0]) if single else var


def lognormal_fit(
    model: StructuralModel,
    vol: VolatilityStructure,
    y,
    maturity: float,
    tau1: float,
    tau2: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> LognormalFit:
    """Match a lognormal to the conditional futures moments at ``maturity``.

    Requires a positive first moment; an arithmetic curve wrap can push the
    conditional mean negative, in which case the approximation has no
    lognormal representative and this raises :class:`InfeasibleFitError`.
    """
    states, single = model._states(y)
    if not single:
        raise ValueError("lognormal_fit takes a single state")
    m1, _, var = _moment_blocks(model, vol, states, float(maturity), float(tau1), float(tau2), quad)
    m1 = float(m1[0])
    var = float(var[0])
    if m1 <= 0.0:
        raise InfeasibleFitError(f"first futures moment {m1} is not positive")
    sigma2 = math.log1p(var / m1**2)
    return LognormalFit(mu=math.log(m1) - 0.5 * sigma2, sigma=math.sqrt(sigma2), y=states[0])


def _black_value(m1, sigma_f, strike, length, kind):
    """Vectorized Black formula on matched parameters; zero vol gives intrinsic."""
    m1 = np.asarray(m1, dtype=float)
    sigma_f = np.asarray(sigma_f, dtype=float)
    if strike == 0.0:
        values = length * m1 if kind == "call" else np.zeros_like(m1)
        return values
    values = np.empty_like(m1)
    degenerate = sigma_f <= 0.0
    if np.any(degenerate):
        intrinsic = m1[degenerate] - strike if kind == "call" else strike - m1[degenerate]
        values[degenerate] = length * np.maximum(intrinsic, 0.0)
    live = ~degenerate
    if np.any(live):
        s = sigma_f[live]
        d2 = (np.log(m1[live] / strike) - 0.5 * s**2) / s
        d1 = d2 + s
        if kind == "call":
            values[live] = length * (m1[live] * norm.cdf(d1) - strike * norm.cdf(d2))
        else:
            values[live] = length * (strike * norm.cdf(-d2) - m1[live] * norm.cdf(-d1))
    return values


def _conditional_value(model, vol, y, spec, quad, kind):
    fit = lognormal_fit(model, vol, y, spec.maturity, spec.tau1, spec.tau2, quad)
    m1 = fit.mean
    return float(_black_value(np.array([m1]), np.array([fit.sigma]), spec.strike, spec.delivery_length, kind)[0])


def conditional_call(
    model: StructuralModel,
    vol: VolatilityStructure,
    y,
    spec: OptionSpec,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Call value conditioned on the state ``y`` at maturity, via the matched lognormal."""
    return _conditional_value(model, vol, y, spec, quad, "call")


def conditional_put(
    model: StructuralModel,
    vol: VolatilityStructure,
    y,
    spec: OptionSpec,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Put value conditioned on the state ``y``; satisfies parity with the call."""
    return _conditional_value(model, vol, y, spec, quad, "put")


def moment_matched_price(
    model: StructuralModel,
    vol: VolatilityStructure,
    spec: OptionSpec,
    n_paths: int,
    seed: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> PriceEstimate:
    """Option price at time 0: conditional Black values averaged over state draws.

    Draws the structural state at maturity from its exact transition law,
    prices each draw with the matched lognormal, and reports the mean with
    its standard error. Draws whose conditional first moment is not positive
    cannot be matched; they are counted, and more than 1% of them aborts the
    estimate.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    rng = _seeded_rng(seed)
    states = np.tile(model.y0, (int(n_paths), 1))
    states = model.simulate_transition(states, 0.0, spec.maturity, rng)
    nodes, w = delivery_rule(model, vol, spec.tau1, spec.tau2, quad)
    length = spec.delivery_length
    h = np.atleast_2d(model.conditional_mean(states, spec.maturity, nodes))
    m1 = h @ w / length
    wx = vol.cross_moment(spec.maturity, nodes[:, None], nodes[None, :])
    ww = w[:, None] * w[None, :]
    var = np.maximum(((h @ ((wx - 1.0) * ww)) * h).sum(axis=1) / length**2, 0.0)

    feasible = m1 > 0.0
    n_bad = int(np.count_nonzero(~feasible))
    if n_bad > 0.01 * n_paths or n_paths - n_bad < 2:
        raise InfeasibleFitError(
            f"{n_bad} of {n_paths} state draws have non-positive futures mean; "
            "the lognormal approximation does not apply"
        )
    m1f = m1[feasible]
    sigma_f = np.sqrt(np.log1p(var[feasible] / m1f**2))
    values = _black_value(m1f, sigma_f, spec.strike, length, spec.kind)
    se = float(values.std(ddof=1) / math.sqrt(values.size))
    return PriceEstimate(float(values.mean()), se, "lognormal_mc", int(n_paths), n_bad)


def call_price(model, vol, spec: OptionSpec, n_paths: int, seed: int, quad=DEFAULT_QUADRATURE) -> PriceEstimate:
    """Unconditional call price by moment matching; ``spec.kind`` must be 'call'."""
    if spec.kind != "call":
        raise ValueError("spec.kind must be 'call'")
    return moment_matched_price(model, vol, spec, n_paths, seed, quad)


def put_price(model, vol, spec: OptionSpec, n_paths: int, seed: int, quad=DEFAULT_QUADRATURE) -> PriceEstimate:
    """Unconditional put price by moment matching; ``spec.kind`` must be 'put'."""
    if spec.kind != "put":
        raise ValueError("spec.kind must be 'put'")
    return moment_matched_price(model, vol, spec, n_paths, seed, quad)


def mc_option_price(
    model: StructuralModel,
    vol: VolatilityStructure,
    spec: OptionSpec,
    n_paths: int,
    seed: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    grid=None,
) -> PriceEstimate:
    """Full-simulation option price with no lognormal assumption.

    Simulates noise and state jointly to maturity (transitions are exact, so
    a single step suffices; ``grid`` may interpose trading times), evaluates
    the futures price by quadrature on each path, and averages the payoff.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    if grid is None:
        grid = [spec.maturity]
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or grid[-1] != spec.maturity:
        raise ValueError("simulation grid must end at the option maturity")
    if np.any(np.diff(grid) <= 0.0) or grid[0] < 0.0:
        raise ValueError("simulation grid must be ascending and non-negative")
    rng = _seeded_rng(seed)
    noise = NoiseState.initial(vol, int(n_paths))
    states = np.tile(model.y0, (int(n_paths), 1))
    t_prev = 0.0
    for t in grid:
        noise = advance_noise(noise, t, rng)
        states = model.simulate_transition(states, t_prev, float(t), rng)
        t_prev = float(t)
    nodes, w = delivery_rule(model, vol, spec.tau1, spec.tau2, quad)
    x = noise.values_grid(nodes)
    h = np.atleast_2d(model.conditional_mean(states, spec.maturity, nodes))
    futures = (x * h) @ w / spec.delivery_length
    if spec.kind == "call":
        payoff = spec.delivery_length * np.maximum(futures - spec.strike, 0.0)
    else:
        payoff = spec.delivery_length * np.maximum(spec.strike - futures, 0.0)
    se = float(payoff.std(ddof=1) / math.sqrt(payoff.size))
    return PriceEstimate(float(payoff.mean()), se, "mc", int(n_paths))
