"""Joint scenario simulation: kernel fans, futures paths, intraday indices.

Simulates noise and structural state together, shows the forward-kernel
distribution fanning out with trading time while staying centred on the
curve, and computes the distribution of the one-hour intraday index from
the simulated futures paths.

Run:  python demos/scenario_ensemble.py [--plot]
"""

import argparse
from pathlib import Path

import numpy as np

from powerhjm import (
    SimulationConfig,
    VolatilityStructure,
    id_index,
    load_pfc,
    model_from_json,
    simulate_ensemble,
    wrap_with_pfc,
)

CONFIGS = Path(__file__).parent / "configs"


def main(plot=False):
    pfc = load_pfc(CONFIGS / "pfc_sample.csv")
    vol = VolatilityStructure.from_json((CONFIGS / "vol_sample.json").read_text())
    base = model_from_json((CONFIGS / "model_schwartz_smith.json").read_text())
    model = wrap_with_pfc(base, pfc, "geometric")

    config = SimulationConfig(
        trading_grid=np.arange(0.0, 49.0, 6.0),
        delivery_grid=np.array([72.0, 168.0, 312.0]),
        n_paths=20_000,
        seed=2718,
    )
    ensemble = simulate_ensemble(config, model, vol, n_threads=4)
    print(f"simulated {ensemble.n_paths} joint paths, fingerprint {ensemble.fingerprint[:12]}...")

    print("\n== Kernel distribution vs trading time (tau = 168h) ==")
    print(f"{'t':>5} {'mean':>8} {'p5':>8} {'p95':>8}")
    for i, t in enumerate(ensemble.times):
        f = ensemble.kernel_values(i, [168.0])[:, 0]
        print(f"{t:5.0f} {f.mean():8.3f} {np.percentile(f, 5):8.3f} {np.percentile(f, 95):8.3f}")
    print(f"curve value at 168h: {pfc.value(168.0):.3f} (the fan stays centred on it)")

    print("\n== Intraday index ID_1 for delivery [72, 73) ==")
    window = np.arange(71.0, 71.51, 0.125)
    idx_config = SimulationConfig(window, [72.0, 73.0], n_paths=4000, seed=3141)
    idx_ensemble = simulate_ensemble(idx_config, model, vol, n_threads=4)
    futures = np.column_stack(
        [idx_ensemble.futures_values(i, 72.0, 73.0) for i in range(window.size)]
    )
    indices = id_index(window, futures, 1, 72.0, 73.0)
    print(f"paths: {indices.size}")
    print(f"mean {indices.mean():.4f}, std {indices.std(ddof=1):.4f}")
    print(f"p5 {np.percentile(indices, 5):.4f}, p95 {np.percentile(indices, 95):.4f}")
    print(f"curve value at 72h: {pfc.value(72.0):.4f}")

    if plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        f = np.column_stack([ensemble.kernel_values(i, [168.0])[:, 0] for i in range(ensemble.times.size)])
        ax1.plot(ensemble.times, f[:60].T, lw=0.5, alpha=0.5)
        ax1.axhline(pfc.value(168.0), color="k", ls="--", lw=1)
        ax1.set_title("kernel paths f_t(168h)")
        ax1.set_xlabel("trading time (h)")
        ax2.hist(indices, bins=60)
        ax2.set_title("ID_1 index distribution, delivery [72, 73)")
        fig.tight_layout()
        fig.savefig("ensemble_demo.png", dpi=120)
        print("\nwrote ensemble_demo.png")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--plot", action="store_true", help="save a PNG with matplotlib")
    main(parser.parse_args().plot)
