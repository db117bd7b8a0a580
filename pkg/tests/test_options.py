"""Moments, lognormal moment matching, option prices, and the MC cross-check."""

import numpy as np
import pytest
from scipy.stats import norm

from powerhjm import (
    InfeasibleFitError,
    LuciaSchwartzModel,
    OptionSpec,
    OUFactor,
    OUFactorModel,
    PriceForwardCurve,
    SchwartzSmithModel,
    VolatilityStructure,
    call_price,
    conditional_call,
    conditional_put,
    futures_moments,
    futures_variance,
    lognormal_fit,
    mc_option_price,
    moment_matched_price,
    put_price,
    wrap_with_pfc,
)


def black76(forward, strike, total_vol, kind="call"):
    """Reference Black-76 value per unit delivery (undiscounted)."""
    if total_vol <= 0.0:
        intrinsic = forward - strike if kind == "call" else strike - forward
        return max(intrinsic, 0.0)
    d1 = (np.log(forward / strike) + 0.5 * total_vol**2) / total_vol
    d2 = d1 - total_vol
    if kind == "call":
        return forward * norm.cdf(d1) - strike * norm.cdf(d2)
    return strike * norm.cdf(-d2) - forward * norm.cdf(-d1)


def constant_model(level=40.0):
    """Deterministic structural component with price identically ``level``."""
    return OUFactorModel([OUFactor(decay=1.0, drift=level)], y0=[level])


def zero_vol():
    return VolatilityStructure(1.0, 0.0, 0.0)


def long_term_vol(sigma2=0.2):
    return VolatilityStructure(1.0, 0.0, sigma2)


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


def test_moments_constant_model_zero_vol():
    model = constant_model(40.0)
    m1, m2 = futures_moments(model, zero_vol(), model.y0, 1.0, 2.0, 3.0)
    assert m1 == pytest.approx(40.0, rel=1e-12)
    assert m2 == pytest.approx(1600.0, rel=1e-12)


def test_moments_first_is_curve_average_at_time_zero():
    pfc = PriceForwardCurve(np.arange(0.0, 96.0, 12.0), [40, 55, 38, 42, 61, 35, 47, 52], 96.0)
    base = SchwartzSmithModel(kappa=0.02, sigma1=0.01, sigma2=0.004, rho=-0.3, mu2=1e-4)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.05, 0.004, 0.003)
    m1, _ = futures_moments(model, vol, model.y0, 0.0, 12.0, 60.0)
    assert m1 == pytest.approx(pfc.average(12.0, 60.0), rel=1e-12)


def test_second_moment_constant_model_closed_form():
    # w_x is constant exp(sigma2^2 t) across the window, so the double
    # integral collapses: m2 = 40^2 exp(0.04).
    model = constant_model(40.0)
    _, m2 = futures_moments(model, long_term_vol(0.2), model.y0, 1.0, 2.0, 3.0)
    assert m2 == pytest.approx(1600.0 * np.exp(0.04), rel=1e-12)


def test_variance_constant_model_closed_form():
    model = constant_model(40.0)
    var = futures_variance(model, long_term_vol(0.2), model.y0, 1.0, 2.0, 3.0)
    assert var == pytest.approx(1600.0 * (np.exp(0.04) - 1.0), rel=1e-12)


def test_variance_zero_vol_is_zero():
    model = constant_model(40.0)
    assert futures_variance(model, zero_vol(), model.y0, 1.0, 2.0, 3.0) == 0.0


def test_variance_equals_moment_identity_randomized():
    pfc = PriceForwardCurve(np.arange(0.0, 96.0, 12.0), [40, 55, 38, 42, 61, 35, 47, 52], 96.0)
    base = SchwartzSmithModel(kappa=0.05, sigma1=0.02, sigma2=0.01, rho=0.2, mu2=1e-4)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.05, 0.006, 0.004)
    rng = np.random.default_rng(41)
    for _ in range(20):
        t = rng.uniform(0.0, 20.0)
        tau1 = rng.uniform(t, 80.0)
        tau2 = rng.uniform(tau1 + 1.0, 96.0)
        y = base.y0 + rng.normal(0.0, 0.2, 2)
        m1, m2 = futures_moments(model, vol, y, t, tau1, tau2)
        var = futures_variance(model, vol, y, t, tau1, tau2)
        assert var >= 0.0
        assert var == pytest.approx(m2 - m1**2, rel=1e-10, abs=1e-12 * m2)


def test_variance_matches_simulated_futures():
    from powerhjm import MarketState, NoiseState, advance_noise, futures_price

    pfc = PriceForwardCurve([0.0, 24.0, 48.0], [42.0, 55.0, 38.0], 120.0)
    base = SchwartzSmithModel(kappa=0.02, sigma1=0.01, sigma2=0.004, rho=-0.3, mu2=1e-4)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.05, 0.004, 0.003)
    t, tau1, tau2 = 12.0, 48.0, 96.0
    y = model.y0
    n = 100_000
    rng = np.random.Generator(np.random.Philox(key=np.uint64(42)))
    noise = advance_noise(NoiseState.initial(vol, n), t, rng)
    futures = futures_price(MarketState(t, np.tile(y, (n, 1)), noise), model, tau1, tau2)
    var = futures_variance(model, vol, y, t, tau1, tau2)
    sample_var = futures.var(ddof=1)
    centered = (futures - futures.mean()) ** 2
    se = centered.std(ddof=1) / np.sqrt(n)
    assert abs(sample_var - var) <= 3.0 * se


def test_second_moment_against_adaptive_double_quadrature():
    # Independent 2-D adaptive quadrature of the co-moment integrand.
    from scipy import integrate

    model = SchwartzSmithModel(kappa=0.3, sigma1=0.2, sigma2=0.1, rho=-0.4, mu2=0.01)
    vol = VolatilityStructure(0.4, 0.15, 0.08)
    y, t, tau1, tau2 = np.array([0.2, 0.1]), 2.0, 5.0, 9.0

    def integrand(s, u):
        wx = np.exp(
            0.15**2
            / (2.0 * 0.4)
            * (np.exp(-0.4 * (u + s - 2.0 * t)) - np.exp(-0.4 * (u + s)))
            + 0.08**2 * t
        )
        return wx * model.conditional_mean(y, t, u) * model.conditional_mean(y, t, s)

    brute, err = integrate.dblquad(integrand, tau1, tau2, tau1, tau2, epsabs=1e-10, epsrel=1e-10)
    assert err < 1e-8
    _, m2 = futures_moments(model, vol, y, t, tau1, tau2)
    assert m2 == pytest.approx(brute / (tau2 - tau1) ** 2, rel=1e-9)


def test_moments_batch_matches_scalar():
    base = SchwartzSmithModel(kappa=0.05, sigma1=0.02, sigma2=0.01, rho=0.2, mu2=1e-4)
    vol = VolatilityStructure(0.05, 0.006, 0.004)
    states = np.array([[0.0, 0.0], [0.1, -0.2], [-0.3, 0.4]])
    m1, m2 = futures_moments(base, vol, states, 1.0, 10.0, 30.0)
    for i, y in enumerate(states):
        a, b = futures_moments(base, vol, y, 1.0, 10.0, 30.0)
        assert m1[i] == pytest.approx(a, rel=1e-14)
        assert m2[i] == pytest.approx(b, rel=1e-14)


# ---------------------------------------------------------------------------
# Lognormal fit
# ---------------------------------------------------------------------------


def test_fit_zero_vol_degenerates():
    model = constant_model(40.0)
    fit = lognormal_fit(model, zero_vol(), model.y0, 1.0, 2.0, 3.0)
    assert fit.sigma == 0.0
    assert fit.mu == pytest.approx(np.log(40.0), rel=1e-12)


def test_fit_gbm_case_is_exact():
    # Constant price and constant long-term vol make the futures a single
    # lognormal: the fitted variance must be sigma2^2 * T with no error.
    model = constant_model(40.0)
    fit = lognormal_fit(model, long_term_vol(0.2), model.y0, 1.0, 2.0, 3.0)
    assert fit.sigma**2 == pytest.approx(0.04, rel=1e-12)


def test_fit_reproduces_matched_moments():
    pfc = PriceForwardCurve(np.arange(0.0, 96.0, 12.0), [40, 55, 38, 42, 61, 35, 47, 52], 96.0)
    base = SchwartzSmithModel(kappa=0.05, sigma1=0.02, sigma2=0.01, rho=0.2, mu2=1e-4)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.05, 0.006, 0.004)
    m1, m2 = futures_moments(model, vol, model.y0, 10.0, 24.0, 72.0)
    fit = lognormal_fit(model, vol, model.y0, 10.0, 24.0, 72.0)
    assert fit.mean == pytest.approx(m1, rel=1e-10)
    assert fit.second_moment == pytest.approx(m2, rel=1e-10)


def test_fit_requires_positive_mean():
    pfc = PriceForwardCurve.flat(40.0, 96.0)
    base = LuciaSchwartzModel(kappa=0.05, sigma1=1.0, sigma2=1.0, rho=0.0, mu2=0.0)
    model = wrap_with_pfc(base, pfc, "arithmetic")
    with pytest.raises(InfeasibleFitError):
        lognormal_fit(model, long_term_vol(0.1), np.array([0.0, -100.0]), 10.0, 24.0, 72.0)


# ---------------------------------------------------------------------------
# Conditional option prices
# ---------------------------------------------------------------------------


def test_conditional_call_black76_example():
    model = constant_model(40.0)
    spec = OptionSpec(maturity=1.0, strike=40.0, tau1=2.0, tau2=3.0)
    value = conditional_call(model, long_term_vol(0.2), model.y0, spec)
    assert value == pytest.approx(black76(40.0, 40.0, 0.2), rel=1e-10)
    assert value == pytest.approx(3.1862270, abs=5e-7)


def test_conditional_call_at_log_strike_center():
    model = constant_model(40.0)
    vol = long_term_vol(0.2)
    fit = lognormal_fit(model, vol, model.y0, 1.0, 2.0, 3.0)
    strike = float(np.exp(fit.mu))
    spec = OptionSpec(maturity=1.0, strike=strike, tau1=2.0, tau2=3.0)
    value = conditional_call(model, vol, model.y0, spec)
    expected = fit.mean * norm.cdf(fit.sigma) - 0.5 * strike
    assert value == pytest.approx(expected, rel=1e-12)


def test_conditional_call_zero_vol_is_intrinsic():
    model = constant_model(40.0)
    spec = OptionSpec(maturity=1.0, strike=30.0, tau1=2.0, tau2=4.0)
    assert conditional_call(model, zero_vol(), model.y0, spec) == pytest.approx(2.0 * 10.0, rel=1e-12)
    spec_otm = OptionSpec(maturity=1.0, strike=50.0, tau1=2.0, tau2=4.0)
    assert conditional_call(model, zero_vol(), model.y0, spec_otm) == 0.0


def test_conditional_call_monotone_in_strike_and_above_intrinsic():
    model = constant_model(40.0)
    vol = long_term_vol(0.15)
    strikes = np.linspace(20.0, 70.0, 11)
    values = [
        conditional_call(model, vol, model.y0, OptionSpec(1.0, k, 2.0, 3.0)) for k in strikes
    ]
    assert np.all(np.diff(values) < 0.0)
    for k, v in zip(strikes, values):
        assert v >= max(40.0 - k, 0.0) - 1e-10


def test_put_call_parity_randomized():
    pfc = PriceForwardCurve(np.arange(0.0, 96.0, 12.0), [40, 55, 38, 42, 61, 35, 47, 52], 96.0)
    base = SchwartzSmithModel(kappa=0.05, sigma1=0.02, sigma2=0.01, rho=0.2, mu2=1e-4)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.05, 0.006, 0.004)
    rng = np.random.default_rng(43)
    for _ in range(15):
        t = rng.uniform(0.0, 20.0)
        tau1 = rng.uniform(t + 1.0, 80.0)
        tau2 = rng.uniform(tau1 + 1.0, 96.0)
        strike = rng.uniform(20.0, 80.0)
        y = base.y0 + rng.normal(0.0, 0.2, 2)
        spec = OptionSpec(t, strike, tau1, tau2)
        m1, _ = futures_moments(model, vol, y, t, tau1, tau2)
        call = conditional_call(model, vol, y, spec)
        put = conditional_put(model, vol, y, spec)
        parity = (tau2 - tau1) * (m1 - strike)
        assert call - put == pytest.approx(parity, rel=1e-10, abs=1e-10)


def test_deep_in_the_money_put():
    model = constant_model(40.0)
    spec = OptionSpec(maturity=1.0, strike=80.0, tau1=2.0, tau2=3.5, kind="put")
    value = conditional_put(model, long_term_vol(0.01), model.y0, spec)
    assert value == pytest.approx(1.5 * 40.0, rel=1e-10)


def test_conditional_put_black76():
    model = constant_model(40.0)
    spec = OptionSpec(maturity=1.0, strike=40.0, tau1=2.0, tau2=3.0, kind="put")
    value = conditional_put(model, long_term_vol(0.2), model.y0, spec)
    assert value == pytest.approx(black76(40.0, 40.0, 0.2, "put"), rel=1e-10)


# ---------------------------------------------------------------------------
# Unconditional prices
# ---------------------------------------------------------------------------


def test_call_price_deterministic_state_equals_conditional():
    model = constant_model(40.0)
    vol = long_term_vol(0.2)
    spec = OptionSpec(maturity=1.0, strike=40.0, tau1=2.0, tau2=3.0)
    estimate = call_price(model, vol, spec, n_paths=500, seed=1)
    assert estimate.se == 0.0
    assert estimate.n_infeasible == 0
    assert estimate.price == pytest.approx(conditional_call(model, vol, model.y0, spec), rel=1e-12)


def test_call_price_small_vol_matches_oracle():
    base = SchwartzSmithModel(kappa=0.02, sigma1=0.01, sigma2=0.005, rho=0.0, mu2=1e-4)
    model = wrap_with_pfc(base, PriceForwardCurve.flat(42.0, 120.0), "geometric")
    vol = VolatilityStructure(0.05, 0.005, 0.004)
    spec = OptionSpec(maturity=24.0, strike=42.0, tau1=48.0, tau2=96.0)
    approx = call_price(model, vol, spec, n_paths=20_000, seed=2)
    oracle = mc_option_price(model, vol, spec, n_paths=100_000, seed=3)
    se = np.hypot(approx.se, oracle.se)
    assert abs(approx.price - oracle.price) <= 3.0 * se


def test_put_price_parity_with_call_price():
    base = SchwartzSmithModel(kappa=0.02, sigma1=0.01, sigma2=0.005, rho=0.0, mu2=1e-4)
    model = wrap_with_pfc(base, PriceForwardCurve.flat(42.0, 120.0), "geometric")
    vol = VolatilityStructure(0.05, 0.005, 0.004)
    call_spec = OptionSpec(24.0, 42.0, 48.0, 96.0, "call")
    put_spec = OptionSpec(24.0, 42.0, 48.0, 96.0, "put")
    call = call_price(model, vol, call_spec, 50_000, seed=4)
    put = put_price(model, vol, put_spec, 50_000, seed=5)
    # E[(tau2-tau1)(m1(Y_T) - K)] over Y_T draws; martingale pins E m1 = 42
    target = (96.0 - 48.0) * (42.0 - 42.0)
    se = np.hypot(call.se, put.se)
    assert abs((call.price - put.price) - target) <= 3.0 * se


def test_price_kind_validation():
    model = constant_model(40.0)
    vol = long_term_vol(0.2)
    with pytest.raises(ValueError):
        call_price(model, vol, OptionSpec(1.0, 40.0, 2.0, 3.0, "put"), 100, 0)
    with pytest.raises(ValueError):
        put_price(model, vol, OptionSpec(1.0, 40.0, 2.0, 3.0, "call"), 100, 0)


def test_call_price_aborts_when_fit_mostly_infeasible():
    base = LuciaSchwartzModel(kappa=0.01, sigma1=0.5, sigma2=5.0, rho=0.0, mu2=0.0)
    model = wrap_with_pfc(base, PriceForwardCurve.flat(10.0, 120.0), "arithmetic")
    vol = long_term_vol(0.05)
    spec = OptionSpec(maturity=48.0, strike=10.0, tau1=50.0, tau2=60.0)
    with pytest.raises(InfeasibleFitError):
        call_price(model, vol, spec, n_paths=2_000, seed=6)


# ---------------------------------------------------------------------------
# Full-simulation price
# ---------------------------------------------------------------------------


def test_mc_price_zero_vol_is_intrinsic():
    model = constant_model(40.0)
    spec = OptionSpec(maturity=1.0, strike=30.0, tau1=2.0, tau2=4.0)
    estimate = mc_option_price(model, zero_vol(), spec, n_paths=100, seed=7)
    assert estimate.price == pytest.approx(2.0 * 10.0, rel=1e-12)
    assert estimate.se == 0.0


def test_mc_price_constant_model_matches_black76():
    model = constant_model(40.0)
    spec = OptionSpec(maturity=1.0, strike=40.0, tau1=2.0, tau2=3.0)
    estimate = mc_option_price(model, long_term_vol(0.2), spec, n_paths=200_000, seed=8)
    assert abs(estimate.price - black76(40.0, 40.0, 0.2)) <= 3.0 * estimate.se


def test_mc_price_zero_strike_recovers_curve_average():
    pfc = PriceForwardCurve([0.0, 24.0, 48.0], [42.0, 55.0, 38.0], 120.0)
    base = SchwartzSmithModel(kappa=0.02, sigma1=0.01, sigma2=0.004, rho=-0.3, mu2=1e-4)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.05, 0.004, 0.003)
    spec = OptionSpec(maturity=24.0, strike=0.0, tau1=48.0, tau2=96.0)
    estimate = mc_option_price(model, vol, spec, n_paths=100_000, seed=9)
    target = (96.0 - 48.0) * pfc.average(48.0, 96.0)
    assert abs(estimate.price - target) <= 3.0 * estimate.se


def test_mc_price_multi_step_grid_same_law():
    model = constant_model(40.0)
    vol = long_term_vol(0.2)
    spec = OptionSpec(maturity=2.0, strike=40.0, tau1=3.0, tau2=4.0)
    single = mc_option_price(model, vol, spec, 200_000, seed=10)
    stepped = mc_option_price(model, vol, spec, 200_000, seed=11, grid=[0.5, 1.0, 1.5, 2.0])
    se = np.hypot(single.se, stepped.se)
    assert abs(single.price - stepped.price) <= 3.0 * se


def test_option_spec_validation():
    with pytest.raises(ValueError):
        OptionSpec(maturity=5.0, strike=40.0, tau1=4.0, tau2=6.0)
    with pytest.raises(ValueError):
        OptionSpec(maturity=1.0, strike=-1.0, tau1=2.0, tau2=3.0)
    with pytest.raises(ValueError):
        OptionSpec(maturity=1.0, strike=40.0, tau1=3.0, tau2=3.0)
    with pytest.raises(ValueError):
        OptionSpec(maturity=1.0, strike=40.0, tau1=2.0, tau2=3.0, kind="straddle")


def test_moment_matched_price_dispatches_on_kind():
    model = constant_model(40.0)
    vol = long_term_vol(0.2)
    put_spec = OptionSpec(1.0, 45.0, 2.0, 3.0, "put")
    estimate = moment_matched_price(model, vol, put_spec, 200, seed=12)
    assert estimate.price == pytest.approx(black76(40.0, 45.0, 0.2, "put"), rel=1e-10)
