"""Joint scenario engine for the market noise and the structural state.

Paths are simulated in fixed-size blocks, each drawing from its own
counter-based Philox stream keyed by ``(seed, block_index)``. The work can
be spread over any number of threads without changing a single bit of the
output: a path's numbers depend only on the seed, the configuration, and
the path's position, never on scheduling. Transitions are exact for both
processes, so the trading grid controls only where states are observed,
not accuracy.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .noise import NoiseState, VolatilityStructure, advance_noise
from .pricing import MarketState, forward_kernel, futures_price
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec
from .structural import StructuralModel


@dataclass(frozen=True)
class SimulationConfig:
    """Grids, path count, seed and quadrature of one scenario run."""

    trading_grid: np.ndarray
    delivery_grid: np.ndarray
    n_paths: int
    seed: int
    quad: QuadratureSpec = DEFAULT_QUADRATURE
    block_size: int = 8192

    def __post_init__(self):
        object.__setattr__(self, "trading_grid", np.asarray(self.trading_grid, dtype=float))
        object.__setattr__(self, "delivery_grid", np.asarray(self.delivery_grid, dtype=float))
        if self.trading_grid.size == 0 or self.delivery_grid.size == 0:
            raise ValueError("grids must be non-empty")
        if np.any(np.diff(self.trading_grid) <= 0.0) or np.any(np.diff(self.delivery_grid) <= 0.0):
            raise ValueError("grids must be strictly increasing")
        if self.trading_grid[0] < 0.0 or self.trading_grid[-1] > self.delivery_grid[0]:
            raise ValueError("trading grid must lie within [0, first delivery]")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")

    def to_dict(self) -> dict:
        return {
            "trading_grid": [float(x) for x in self.trading_grid],
            "delivery_grid": [float(x) for x in self.delivery_grid],
            "n_paths": int(self.n_paths),
            "seed": int(self.seed),
            "quad": self.quad.to_dict(),
            "block_size": int(self.block_size),
        }

    def fingerprint(self, model: StructuralModel, vol: VolatilityStructure) -> str:
        payload = {"config": self.to_dict(), "model": model.to_dict(), "vol": vol.to_dict()}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


class ScenarioEnsemble:
    """Simulated joint paths, stored as factor and state arrays per grid time."""

    def __init__(self, config, model, vol, short_factors, long_factors, states, fingerprint):
        self.config = config
        self.model = model
        self.vol = vol
        self._s1 = short_factors
        self._w2 = long_factors
        self._y = states
        self.fingerprint = fingerprint

    @property
    def n_paths(self) -> int:
        return self._y.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.config.trading_grid

    def _time_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.times.size:
            raise IndexError(f"time index {i} out of range")
        return i

    def noise_at(self, i: int) -> NoiseState:
        i = self._time_index(i)
        return NoiseState(self.vol, self.times[i], self._s1[:, i], self._w2[:, i], self.config.delivery_grid)

    def states_at(self, i: int) -> MarketState:
        """All paths at grid time ``i`` as one vectorized market state."""
        i = self._time_index(i)
        return MarketState(float(self.times[i]), self._y[:, i, :], self.noise_at(i))

    def state(self, p: int, i: int) -> MarketState:
        i = self._time_index(i)
        noise = NoiseState(
            self.vol, self.times[i], self._s1[p, i], self._w2[p, i], self.config.delivery_grid
        )
        return MarketState(float(self.times[i]), self._y[p, i, :], noise)

    def path(self, p: int) -> list[MarketState]:
        return [self.state(p, i) for i in range(self.times.size)]

    def kernel_values(self, i: int, taus=None) -> np.ndarray:
        """Forward kernels of all paths at grid time ``i``, shape (n_paths, len(taus))."""
        taus = self.config.delivery_grid if taus is None else np.asarray(taus, dtype=float)
        return forward_kernel(self.states_at(i), self.model, taus)

    def futures_values(self, i: int, tau1: float, tau2: float) -> np.ndarray:
        """Futures prices of all paths at grid time ``i``."""
        return futures_price(self.states_at(i), self.model, tau1, tau2, self.config.quad)

    def to_csv(self, target, taus=None) -> None:
        """Long-format export: one ``path,t,tau,f`` row per path, time, delivery."""
        taus = self.config.delivery_grid if taus is None else np.asarray(taus, dtype=float)
        n_p, n_t, n_tau = self.n_paths, self.times.size, taus.size
        rows = np.empty((n_p * n_t * n_tau, 4))
        for i in range(n_t):
            f = self.kernel_values(i, taus)
            block = rows[i * n_p * n_tau : (i + 1) * n_p * n_tau]
            block[:, 0] = np.repeat(np.arange(n_p), n_tau)
            block[:, 1] = self.times[i]
            block[:, 2] = np.tile(taus, n_p)
            block[:, 3] = f.ravel()
        order = np.lexsort((rows[:, 1], rows[:, 0]))
        np.savetxt(
            target,
            rows[order],
            fmt=["%d", "%.17g", "%.17g", "%.17g"],
            delimiter=",",
            header="path,t,tau,f",
            comments="",
        )

    def summary(self) -> dict:
        """Seed, fingerprint, and per-(t, tau) kernel mean and standard error."""
        means = []
        ses = []
        for i in range(self.times.size):
            f = self.kernel_values(i)
            m, se = mean_se(f)
            means.append([float(x) for x in np.atleast_1d(m)])
            ses.append([float(x) for x in np.atleast_1d(se)])
        return {
            "seed": int(self.config.seed),
            "fingerprint": self.fingerprint,
            "n_paths": self.n_paths,
            "trading_grid": [float(x) for x in self.times],
            "delivery_grid": [float(x) for x in self.config.delivery_grid],
            "kernel_mean": means,
            "kernel_se": ses,
        }


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    key = np.array([seed, block_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_ensemble(
    config: SimulationConfig,
    model: StructuralModel,
    vol: VolatilityStructure,
    n_threads: int = 1,
) -> ScenarioEnsemble:
    """Simulate the joint ensemble; bit-identical for any ``n_threads``.

    The noise and the structural state are driven by disjoint draws of the
    same per-block stream (noise factors first, state second, per step), so
    they are independent as the framework requires.
    """
    times = config.trading_grid
    n_p, n_t, dim = config.n_paths, times.size, model.dim
    s1 = np.empty((n_p, n_t))
    w2 = np.empty((n_p, n_t))
    y = np.empty((n_p, n_t, dim))

    def run_block(block):
        index, start, stop = block
        rng = _block_rng(config.seed, index)
        noise = NoiseState.initial(vol, stop - start)
        states = np.tile(model.y0, (stop - start, 1))
        t_prev = 0.0
        for i, t in enumerate(times):
            if t > t_prev:
                noise = advance_noise(noise, float(t), rng)
                states = model.simulate_transition(states, t_prev, float(t), rng)
                t_prev = float(t)
            s1[start:stop, i] = noise.short_factor
            w2[start:stop, i] = noise.long_factor
            y[start:stop, i, :] = states

    blocks = [
        (index, start, min(start + config.block_size, n_p))
        for index, start in enumerate(range(0, n_p, config.block_size))
    ]
    if n_threads <= 1 or len(blocks) == 1:
        for block in blocks:
            run_block(block)
    else:
        with ThreadPoolExecutor(max_workers=int(n_threads)) as pool:
            list(pool.map(run_block, blocks))
    return ScenarioEnsemble(config, model, vol, s1, w2, y, config.fingerprint(model, vol))


def simulate_state(
    model: StructuralModel,
    vol: VolatilityStructure,
    t: float,
    seed: int,
    n_paths: int | None = None,
) -> MarketState:
    """One seeded scenario state at time ``t`` (deterministic initial state at 0)."""
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be >= 0")
    rng = _block_rng(int(seed), 0)
    noise = advance_noise(NoiseState.initial(vol, n_paths), t, rng)
    y = model.y0 if n_paths is None else np.tile(model.y0, (int(n_paths), 1))
    if t > 0.0:
        y = model.simulate_transition(y, 0.0, t, rng)
    return MarketState(t, y, noise)


def mean_se(values):
    """Sample mean and standard error along the first axis."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    mean = values.mean(axis=0)
    se = values.std(axis=0, ddof=1) / np.sqrt(n)
    if values.ndim == 1:
        return float(mean), float(se)
    return mean, se


def estimate(ensemble: ScenarioEnsemble, functional) -> tuple[float, float]:
    """Mean and standard error of a per-path functional over the ensemble.

    ``functional`` receives one path as a list of :class:`MarketState` and
    returns a real number.
    """
    if ensemble.n_paths < 2:
        raise ValueError("need at least 2 paths")
    values = np.array([float(functional(ensemble.path(p))) for p in range(ensemble.n_paths)])
    return mean_se(values)
