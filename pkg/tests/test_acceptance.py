"""Acceptance suite: one test per exit criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report. Every tolerance is fixed here; statistical checks use three
standard errors with pinned seeds, so the suite is deterministic.
"""

import json
import time

import numpy as np
import pytest
from scipy.stats import norm

from powerhjm import (
    MarketState,
    NoiseState,
    OptionSpec,
    OUFactor,
    OUFactorModel,
    PriceForwardCurve,
    SchwartzSmithModel,
    SimulationConfig,
    LuciaSchwartzModel,
    MeritOrderSinhModel,
    VolatilityStructure,
    advance_noise,
    call_price,
    conditional_call,
    forward_kernel,
    futures_moments,
    futures_price,
    futures_variance,
    id_index,
    mc_option_price,
    mean_se,
    simulate_ensemble,
    simulate_state,
    wrap_with_pfc,
)
from powerhjm.cli import main as cli_main


def report(criterion, detail):
    print(f"PASS {criterion}: {detail}")


def rng_for(seed):
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def year_pfc():
    starts = np.arange(0.0, 8760.0, 730.0)
    values = 35.0 + 10.0 * np.sin(np.arange(starts.size) * 0.7) + 3.0 * (np.arange(starts.size) % 2)
    return PriceForwardCurve(starts, values, 8784.0)


def market_vol():
    return VolatilityStructure(
        kappa=0.01,
        sigma1=0.003,
        sigma2=[{"start_hours": 0.0, "value": 0.002}, {"start_hours": 4380.0, "value": 0.0025}],
    )


def four_models():
    return {
        "schwartz_smith": SchwartzSmithModel(kappa=0.02, sigma1=0.004, sigma2=0.002, rho=-0.3, mu2=1e-5),
        "lucia_schwartz": LuciaSchwartzModel(kappa=0.03, sigma1=0.5, sigma2=0.05, rho=0.2, mu2=0.001),
        "structural_sinh": MeritOrderSinhModel(gamma=40.0, alpha=0.8, lam=0.02, sigma=0.15, beta=8.0),
        "levy_ou_factor": OUFactorModel(
            [
                OUFactor(decay=0.5, drift=0.0, sigma=2.0, jump_rate=0.05, jump_mean=15.0),
                OUFactor(decay=0.01, drift=0.0, sigma=0.3),
            ]
        ),
    }


def wrap_mode(name):
    return "geometric" if name == "schwartz_smith" else "arithmetic"


def test_criterion_1_pfc_consistency():
    """Curve-wrapped kernels are unbiased for the curve at 10 (t, tau) points."""
    pfc = year_pfc()
    vol = market_vol()
    taus = np.array([96.0, 240.0, 480.0, 1200.0, 2400.0])
    worst = 0.0
    for name, base in four_models().items():
        start = time.perf_counter()
        model = wrap_with_pfc(base, pfc, wrap_mode(name))
        config = SimulationConfig([24.0, 72.0], taus, n_paths=100_000, seed=1201)
        ensemble = simulate_ensemble(config, model, vol)
        for i in range(2):
            mean, se = mean_se(ensemble.kernel_values(i))
            z = np.abs(mean - pfc.value(taus)) / se
            worst = max(worst, float(z.max()))
        elapsed = time.perf_counter() - start
        assert worst <= 3.0, f"{name}: max |z| = {worst:.2f}"
        assert elapsed < 60.0, f"{name}: took {elapsed:.1f}s"
    report("criterion 1 (PFC consistency)", f"4 models x 10 points, 1e5 paths, max |z| = {worst:.2f} <= 3")


def test_criterion_2_cascading():
    """Random partitions of a 1-year window re-sum to the full futures price."""
    pfc = year_pfc()
    vol = market_vol()
    model = wrap_with_pfc(four_models()["schwartz_smith"], pfc, "geometric")
    state = simulate_state(model, vol, 12.0, seed=7)
    rng = np.random.default_rng(1202)
    total = 8736.0 * futures_price(state, model, 24.0, 8760.0)
    worst = 0.0
    for _ in range(100):
        cuts = np.unique(rng.uniform(24.0, 8760.0, rng.integers(1, 9)))
        edges = np.concatenate(([24.0], cuts, [8760.0]))
        parts = sum((b - a) * futures_price(state, model, a, b) for a, b in zip(edges[:-1], edges[1:]))
        worst = max(worst, abs(parts - total) / abs(total))
    assert worst <= 1e-10
    report("criterion 2 (cascading)", f"100 random partitions, max rel err = {worst:.2e} <= 1e-10")


def test_criterion_3_affine_decomposition():
    """conditional_mean == g(A y + B) to 1e-10; tower property within 3 SE."""
    rng = np.random.default_rng(1203)
    worst = 0.0
    for model in four_models().values():
        for _ in range(100):
            t = rng.uniform(0.0, 200.0)
            tau = t + rng.uniform(0.0, 500.0)
            y = model.y0 + rng.normal(0.0, 0.5, model.dim)
            direct = model.conditional_mean(y, t, tau)
            a, b = model.affine_coefficients(t, tau)
            via = model.g(a @ y + b)
            worst = max(worst, abs(direct - via) / max(abs(direct), abs(via), 1e-8))
    assert worst <= 1e-10
    worst_z = 0.0
    for name, model in four_models().items():
        y = model.y0 + 0.1
        t, s, tau = 12.0, 48.0, 240.0
        mid = model.simulate_transition(np.tile(y, (200_000, 1)), t, s, rng_for(1204))
        samples = model.conditional_mean(mid, s, tau)
        se = samples.std(ddof=1) / np.sqrt(samples.size)
        z = abs(samples.mean() - model.conditional_mean(y, t, tau)) / se
        worst_z = max(worst_z, z)
        assert z <= 3.0, name
    report(
        "criterion 3 (affine decomposition)",
        f"identity max rel err = {worst:.2e} <= 1e-10; tower max |z| = {worst_z:.2f} <= 3",
    )


def test_criterion_4_futures_moments():
    """Quadrature mean/variance match 1e5-path simulation; identity to 1e-10."""
    pfc = year_pfc()
    vol = market_vol()
    model = wrap_with_pfc(four_models()["schwartz_smith"], pfc, "geometric")
    t, tau1, tau2 = 48.0, 720.0, 1440.0
    y = model.y0
    m1, m2 = futures_moments(model, vol, y, t, tau1, tau2)
    var = futures_variance(model, vol, y, t, tau1, tau2)
    assert var == pytest.approx(m2 - m1**2, rel=1e-10)

    n = 100_000
    rng = rng_for(1205)
    noise = advance_noise(NoiseState.initial(vol, n), t, rng)
    futures = futures_price(MarketState(t, np.tile(y, (n, 1)), noise), model, tau1, tau2)
    mean, se_mean = mean_se(futures)
    z_mean = abs(mean - m1) / se_mean
    sample_var = futures.var(ddof=1)
    centered = (futures - futures.mean()) ** 2
    se_var = centered.std(ddof=1) / np.sqrt(n)
    z_var = abs(sample_var - var) / se_var
    assert z_mean <= 3.0 and z_var <= 3.0
    report(
        "criterion 4 (futures moments)",
        f"identity rel err <= 1e-10; MC |z| mean = {z_mean:.2f}, var = {z_var:.2f} <= 3",
    )


def test_criterion_5_black76_degeneracy():
    """Constant price and flat long-term vol collapse to Black-76 exactly."""
    level = 40.0
    model = OUFactorModel([OUFactor(decay=1.0, drift=level)], y0=[level])
    vol = VolatilityStructure(kappa=1.0, sigma1=0.0, sigma2=0.2)
    spec = OptionSpec(maturity=1.0, strike=level, tau1=2.0, tau2=3.0)
    value = conditional_call(model, vol, model.y0, spec)
    total_vol = 0.2  # sigma2^2 * T = 0.04
    reference = level * (norm.cdf(0.5 * total_vol) - norm.cdf(-0.5 * total_vol))
    rel = abs(value - reference) / reference
    assert rel <= 1e-10
    oracle = mc_option_price(model, vol, spec, n_paths=200_000, seed=1206)
    z = abs(oracle.price - reference) / oracle.se
    assert z <= 3.0
    report("criterion 5 (Black-76 degeneracy)", f"rel err = {rel:.2e} <= 1e-10; oracle |z| = {z:.2f} <= 3")


def test_criterion_6_lognormal_approximation_grid():
    """Moment matching vs full simulation over a 3x3 (vol, strike) grid."""
    start = time.perf_counter()
    pfc = year_pfc()
    base = four_models()["schwartz_smith"]
    model = wrap_with_pfc(base, pfc, "geometric")
    tau1, tau2, maturity = 720.0, 1440.0, 720.0
    forward = futures_price(simulate_state(model, market_vol(), 0.0, 0), model, tau1, tau2)
    worst_ratio = 0.0
    for i, sig in enumerate((0.002, 0.005, 0.01)):
        vol = VolatilityStructure(kappa=0.01, sigma1=sig, sigma2=sig)
        for j, moneyness in enumerate((0.9, 1.0, 1.1)):
            spec = OptionSpec(maturity, moneyness * forward, tau1, tau2)
            approx = call_price(model, vol, spec, n_paths=20_000, seed=1300 + 10 * i + j)
            oracle = mc_option_price(model, vol, spec, n_paths=100_000, seed=1400 + 10 * i + j)
            limit = max(3.0 * float(np.hypot(approx.se, oracle.se)), 0.01 * oracle.price)
            gap = abs(approx.price - oracle.price)
            worst_ratio = max(worst_ratio, gap / limit)
            assert gap <= limit, f"vol={sig}, K/F={moneyness}: gap {gap:.4f} > limit {limit:.4f}"
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    report(
        "criterion 6 (lognormal approximation)",
        f"3x3 grid within max(3 SE, 1%); worst gap/limit = {worst_ratio:.2f}; {elapsed:.0f}s < 300s",
    )


def test_criterion_7_shrinking_window_rate():
    """F(tau - eps, tau) converges to the kernel at a first-order rate."""
    model = SchwartzSmithModel(kappa=0.02, sigma1=0.01, sigma2=0.004, rho=-0.3, mu2=1e-4)
    vol = VolatilityStructure(0.05, 0.004, 0.003)
    state = simulate_state(model, vol, 1.0, seed=1207)
    tau = 30.0
    kernel = forward_kernel(state, model, tau)
    eps = np.array([1e-1, 1e-2, 1e-3])
    err = np.array([abs(futures_price(state, model, tau - e, tau) - kernel) for e in eps])
    assert np.all(np.diff(err) < 0.0)
    slope = np.polyfit(np.log(eps), np.log(err), 1)[0]
    assert 0.8 <= slope <= 1.2
    assert err[-1] / abs(kernel) <= 1e-4
    report("criterion 7 (shrinking window)", f"errors {err[0]:.2e} -> {err[2]:.2e}, slope = {slope:.3f} in [0.8, 1.2]")


def test_criterion_8_id_index_identities():
    """Constant path gives the constant exactly; linear path matches the integral."""
    times = np.linspace(20.0, 24.0, 81)
    const1 = id_index(np.linspace(22.8, 23.6, 9), np.full(9, 50.0), 1, 24.0, 25.0)
    const3 = id_index(times, np.full_like(times, 50.0), 3, 24.0, 25.0)
    assert const1 == 50.0 and const3 == pytest.approx(50.0, abs=1e-12)
    linear1 = id_index(times, 4.0 * times - 3.0, 1, 24.0, 25.0)
    linear3 = id_index(times, 4.0 * times - 3.0, 3, 24.0, 25.0)
    err1 = abs(linear1 - (4.0 * 23.25 - 3.0))
    err3 = abs(linear3 - (4.0 * 22.25 - 3.0))
    assert err1 <= 1e-10 and err3 <= 1e-10
    report("criterion 8 (ID index identities)", f"constant exact; linear errs {err1:.1e}, {err3:.1e} <= 1e-10")


def test_criterion_9_cli_reproducibility(tmp_path):
    """Identical CLI output bytes for 1-, 4-, and 8-thread runs."""
    model_file = tmp_path / "model.json"
    vol_file = tmp_path / "vol.json"
    pfc_file = tmp_path / "pfc.csv"
    model_file.write_text(json.dumps(four_models()["schwartz_smith"].to_dict()))
    vol_file.write_text(json.dumps(market_vol().to_dict()))
    pfc_file.write_text("delivery_start_hours,price_eur_mwh,end_hours\n0,40,24\n24,46,96\n")
    outputs = []
    for threads in ("1", "4", "8"):
        out = tmp_path / f"sim_{threads}.csv"
        code = cli_main(
            [
                "simulate",
                "--model", str(model_file),
                "--vol", str(vol_file),
                "--pfc", str(pfc_file),
                "--pfc-mode", "geometric",
                "--grid", "0:24:12",
                "--delivery", "30:90:30",
                "--paths", "20000",
                "--seed", "1209",
                "--threads", threads,
                "--out", str(out),
            ]
        )
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    option_file = tmp_path / "option.json"
    option_file.write_text(json.dumps({"T": 12.0, "K": 42.0, "tau1": 24.0, "tau2": 48.0, "kind": "call"}))
    option_outputs = []
    for threads in ("1", "4", "8"):
        out = tmp_path / f"opt_{threads}.json"
        code = cli_main(
            [
                "price", "option",
                "--model", str(model_file),
                "--vol", str(vol_file),
                "--pfc", str(pfc_file),
                "--pfc-mode", "geometric",
                "--option", str(option_file),
                "--paths", "5000",
                "--seed", "1210",
                "--out", str(out),
            ]
        )
        assert code == 0
        option_outputs.append(out.read_bytes())
    assert option_outputs[0] == option_outputs[1] == option_outputs[2]
    report("criterion 9 (reproducibility)", "simulate and price option byte-identical across 1/4/8 threads")
