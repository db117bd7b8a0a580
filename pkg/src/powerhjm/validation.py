"""Self-contained validation suite over shipped reference configurations.

Each check exercises one of the framework's structural identities on small
but non-trivial configurations: curve consistency of simulated kernels,
cascading of futures prices, the affine decomposition, moment formulas
against simulation, the Black-76 degenerate case, the lognormal
approximation against the full-simulation price, and the intraday index
identities. All randomness is seeded; the suite is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import options, pricing, sim
from .curve import PriceForwardCurve
from .noise import NoiseState, VolatilityStructure, advance_noise
from .structural import (
    LuciaSchwartzModel,
    MeritOrderSinhModel,
    OUFactorModel,
    SchwartzSmithModel,
    wrap_with_pfc,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def reference_pfc() -> PriceForwardCurve:
    """Two weeks of daily segments with a weekly shape."""
    starts = np.arange(0.0, 336.0, 24.0)
    values = 40.0 + 6.0 * np.sin(np.arange(starts.size) * 0.9) + 2.0 * (np.arange(starts.size) % 2)
    return PriceForwardCurve(starts, values, 360.0)


def reference_vol() -> VolatilityStructure:
    return VolatilityStructure(
        kappa=0.03,
        sigma1=0.004,
        sigma2=[{"start_hours": 0.0, "value": 0.003}, {"start_hours": 168.0, "value": 0.0035}],
    )


def reference_models() -> dict:
    return {
        "schwartz_smith": SchwartzSmithModel(kappa=0.02, sigma1=0.004, sigma2=0.002, rho=-0.3, mu2=1e-5),
        "lucia_schwartz": LuciaSchwartzModel(kappa=0.03, sigma1=0.5, sigma2=0.05, rho=0.2, mu2=0.001),
        "structural_sinh": MeritOrderSinhModel(gamma=40.0, alpha=0.8, lam=0.02, sigma=0.15, beta=8.0),
        "levy_ou_factor": OUFactorModel(
            [
                {"decay": 0.5, "drift": 0.0, "sigma": 2.0, "jump_rate": 0.05, "jump_mean": 15.0},
                {"decay": 0.01, "drift": 0.0, "sigma": 0.3},
            ]
        ),
    }


def _wrap_mode(name: str) -> str:
    return "geometric" if name == "schwartz_smith" else "arithmetic"


def check_kernel_martingale(seed: int = 2024, n_paths: int = 20_000) -> CheckResult:
    """Ensemble mean of the kernel must match the curve within 3 standard errors."""
    pfc = reference_pfc()
    vol = reference_vol()
    taus = np.array([120.0, 192.0, 288.0])
    worst = 0.0
    for name, base in reference_models().items():
        model = wrap_with_pfc(base, pfc, _wrap_mode(name))
        config = sim.SimulationConfig([24.0, 72.0], taus, n_paths, seed)
        ensemble = sim.simulate_ensemble(config, model, vol)
        for i in range(2):
            mean, se = sim.mean_se(ensemble.kernel_values(i))
            z = np.abs(mean - pfc.value(taus)) / se
            worst = max(worst, float(z.max()))
    return CheckResult("kernel martingale vs curve", worst <= 3.0, f"max |z| = {worst:.2f} (limit 3)")


def check_cascading(seed: int = 7, trials: int = 20) -> CheckResult:
    """Length-weighted sub-period futures must re-sum to the full-period price."""
    pfc = reference_pfc()
    vol = reference_vol()
    model = wrap_with_pfc(reference_models()["schwartz_smith"], pfc, "geometric")
    state = pricing.initial_state(model, vol)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        cuts = np.sort(rng.uniform(0.0, 336.0, rng.integers(1, 6)))
        edges = np.concatenate(([0.0], cuts, [336.0]))
        edges = np.unique(edges)
        total = (336.0 - 0.0) * pricing.futures_price(state, model, 0.0, 336.0)
        parts = sum(
            (b - a) * pricing.futures_price(state, model, a, b)
            for a, b in zip(edges[:-1], edges[1:])
        )
        worst = max(worst, abs(parts - total) / abs(total))
    return CheckResult("futures cascading", worst <= 1e-10, f"max rel err = {worst:.2e} (limit 1e-10)")


def check_affine_identity(seed: int = 11, trials: int = 40) -> CheckResult:
    """Closed-form conditional means must equal g(A y + B) for every model."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model in reference_models().values():
        for _ in range(trials):
            t = rng.uniform(0.0, 100.0)
            tau = t + rng.uniform(0.0, 200.0)
            y = model.y0 + rng.normal(0.0, 0.5, model.dim)
            direct = model.conditional_mean(y, t, tau)
            a, b = model.affine_coefficients(t, tau)
            via_coeffs = model.g(a @ y + b)
            scale = max(abs(direct), abs(via_coeffs), 1e-8)
            worst = max(worst, abs(direct - via_coeffs) / scale)
    return CheckResult("affine decomposition identity", worst <= 1e-10, f"max rel err = {worst:.2e}")


def check_moments_vs_mc(seed: int = 23, n_paths: int = 40_000) -> CheckResult:
    """Quadrature moments of the futures price vs direct simulation, 3 SE."""
    pfc = reference_pfc()
    vol = reference_vol()
    model = wrap_with_pfc(reference_models()["schwartz_smith"], pfc, "geometric")
    t, tau1, tau2 = 48.0, 96.0, 168.0
    y = model.y0
    m1, _ = options.futures_moments(model, vol, y, t, tau1, tau2)
    var = options.futures_variance(model, vol, y, t, tau1, tau2)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    noise = advance_noise(NoiseState.initial(vol, n_paths), t, rng)
    state = pricing.MarketState(t, np.tile(y, (n_paths, 1)), noise)
    futures = pricing.futures_price(state, model, tau1, tau2)
    mean, se_mean = sim.mean_se(futures)
    z_mean = abs(mean - m1) / se_mean
    sample_var = futures.var(ddof=1)
    centered = (futures - futures.mean()) ** 2
    se_var = centered.std(ddof=1) / np.sqrt(n_paths)
    z_var = abs(sample_var - var) / se_var
    ok = z_mean <= 3.0 and z_var <= 3.0
    return CheckResult("futures moments vs simulation", ok, f"|z| mean {z_mean:.2f}, var {z_var:.2f}")


def check_black76(seed: int = 5, n_paths: int = 100_000) -> CheckResult:
    """Constant-price model with flat long-term vol reduces to Black-76 exactly."""
    level = 40.0
    model = OUFactorModel([{"decay": 1.0, "drift": level}], y0=[level])
    vol = VolatilityStructure(kappa=1.0, sigma1=0.0, sigma2=0.2)
    spec = options.OptionSpec(maturity=1.0, strike=level, tau1=2.0, tau2=3.0)
    value = options.conditional_call(model, vol, model.y0, spec)
    sig = 0.2
    d1 = 0.5 * sig
    d2 = -0.5 * sig
    reference = level * norm.cdf(d1) - level * norm.cdf(d2)
    rel = abs(value - reference) / reference
    oracle = options.mc_option_price(model, vol, spec, n_paths, seed)
    z = abs(oracle.price - reference) / oracle.se
    ok = rel <= 1e-10 and z <= 3.0
    return CheckResult("Black-76 degenerate case", ok, f"rel err {rel:.2e}, simulated |z| {z:.2f}")


def check_lognormal_vs_mc(seed: int = 40) -> CheckResult:
    """Moment-matched price against the full-simulation price on one config."""
    pfc = reference_pfc()
    vol = VolatilityStructure(kappa=0.03, sigma1=0.005, sigma2=0.004)
    model = wrap_with_pfc(reference_models()["schwartz_smith"], pfc, "geometric")
    spec = options.OptionSpec(maturity=96.0, strike=pfc.average(120.0, 288.0), tau1=120.0, tau2=288.0)
    approx = options.call_price(model, vol, spec, 20_000, seed)
    oracle = options.mc_option_price(model, vol, spec, 100_000, seed + 1)
    se = float(np.hypot(approx.se, oracle.se))
    gap = abs(approx.price - oracle.price)
    limit = max(3.0 * se, 0.01 * oracle.price)
    return CheckResult(
        "lognormal approximation vs simulation", gap <= limit, f"gap {gap:.4f}, limit {limit:.4f}"
    )


def check_id_index() -> CheckResult:
    """Constant path reproduces the constant; linear path matches the integral."""
    times = np.linspace(20.0, 24.0, 41)
    const = pricing.id_index(times, np.full_like(times, 50.0), 3, tau1=24.0, tau2=25.0)
    linear = pricing.id_index(times, 2.0 * times + 1.0, 3, tau1=24.0, tau2=25.0)
    expected = 2.0 * (24.0 - 1.75) + 1.0
    ok = abs(const - 50.0) <= 1e-12 and abs(linear - expected) <= 1e-10
    return CheckResult("intraday index identities", ok, f"const err {abs(const - 50.0):.1e}, linear err {abs(linear - expected):.1e}")


def run_validation(seed: int = 0) -> list[CheckResult]:
    """Run every check; a nonzero ``seed`` offsets each check's base seed."""
    checks = [
        ("affine decomposition identity", lambda: check_affine_identity(seed=11 + seed)),
        ("futures cascading", lambda: check_cascading(seed=7 + seed)),
        ("intraday index identities", check_id_index),
        ("Black-76 degenerate case", lambda: check_black76(seed=5 + seed)),
        ("kernel martingale vs curve", lambda: check_kernel_martingale(seed=2024 + seed)),
        ("futures moments vs simulation", lambda: check_moments_vs_mc(seed=23 + seed)),
        ("lognormal approximation vs simulation", lambda: check_lognormal_vs_mc(seed=40 + seed)),
    ]
    results = []
    for name, check in checks:
        try:
            results.append(check())
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            results.append(CheckResult(name, False, f"raised {exc!r}"))
    return results
