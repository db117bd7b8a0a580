"""Price forward curves and futures built from them.

Walks through the deterministic layer of the framework: load an hourly
curve, read prices off it, and check that futures over any delivery
period are just kernel averages, so cascading a year into quarters (or a
week into days) is exact by construction.

Run from the repository root:  python demos/curve_and_futures.py
"""

from pathlib import Path

import numpy as np

from powerhjm import (
    VolatilityStructure,
    SchwartzSmithModel,
    day_ahead_spot,
    futures_price,
    initial_state,
    load_pfc,
    wrap_with_pfc,
)

CONFIGS = Path(__file__).parent / "configs"


def main():
    pfc = load_pfc(CONFIGS / "pfc_sample.csv")
    print("== Price forward curve ==")
    print(f"domain: [{pfc.start}, {pfc.horizon}) hours, {len(pfc.values)} segments")
    for start, end, price in pfc.segment_table():
        print(f"  [{start:6.1f}, {end:6.1f})  {price:6.2f} EUR/MWh")

    # A model wrapped on the curve reproduces it in expectation, so at t = 0
    # (no randomness realized yet) every product price is a curve average.
    base = SchwartzSmithModel(kappa=0.02, sigma1=0.004, sigma2=0.002, rho=-0.3, mu2=1e-5)
    model = wrap_with_pfc(base, pfc, "geometric")
    vol = VolatilityStructure(0.03, 0.004, 0.003)
    state = initial_state(model, vol)

    print("\n== Futures at t = 0 ==")
    week = futures_price(state, model, 0.0, 168.0)
    print(f"week  [0, 168):   {week:.6f}  (curve average {pfc.average(0.0, 168.0):.6f})")
    days = [futures_price(state, model, 24.0 * d, 24.0 * (d + 1)) for d in range(7)]
    for d, price in enumerate(days):
        print(f"  day {d}: {price:.4f}")
    recombined = sum(24.0 * p for p in days) / 168.0
    print(f"length-weighted day sum / 168h:   {recombined:.6f}")
    print(f"cascading error: {abs(recombined - week):.2e}")

    print("\n== Day-ahead spot ==")
    for day, hour in [(0, 8), (1, 13), (4, 19)]:
        price = day_ahead_spot(state, model, day, hour)
        print(f"  S(d={day}, h={hour:2d}) = {price:.4f}  (curve at {24 * day + hour}h: {pfc.value(24.0 * day + hour):.4f})")

    print("\n== Delivery-period granularity ==")
    for tau2 in (1.0, 6.0, 24.0, 168.0):
        print(f"  F(0, [0, {tau2:5.0f}h]) = {futures_price(state, model, 0.0, tau2):.4f}")
    print("shrinking the window recovers the forward kernel at the delivery start")


if __name__ == "__main__":
    main()
