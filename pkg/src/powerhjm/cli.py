"""Command-line front end.

Subcommands: ``pfc inspect``, ``simulate``, ``price futures|spot|id-index|option``,
and ``validate``. All randomness is seeded explicitly through ``--seed``;
outputs are machine-readable JSON or CSV and numerically identical to the
corresponding library calls. Exit codes: 0 success, 1 validation failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import options, pricing, sim
from .curve import load_pfc
from .noise import VolatilityStructure
from .quadrature import QuadratureSpec
from .structural import model_from_json, wrap_with_pfc
from .validation import run_validation


class UsageError(Exception):
    pass


def _require_file(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise UsageError(f"{what} file not found: {path}")
    return path


def _read_text(path: str, what: str) -> str:
    with open(_require_file(path, what)) as fh:
        return fh.read()


def _parse_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:step`` into an inclusive, evenly spaced grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid has non-numeric parts: {text!r}") from None
    if step <= 0.0 or stop < start:
        raise UsageError("grid needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


def _emit(text: str, out: str | None) -> None:
    """Write the result to ``--out`` when given, otherwise to stdout."""
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _json(payload) -> str:
    return json.dumps(payload, sort_keys=True)


def _add_market_args(parser: argparse.ArgumentParser, need_pfc: bool = False) -> None:
    parser.add_argument("--model", required=True, help="structural model JSON")
    parser.add_argument("--vol", required=True, help="noise volatility JSON")
    parser.add_argument("--pfc", required=need_pfc, help="price forward curve CSV")
    parser.add_argument("--horizon", type=float, default=None, help="curve horizon if the CSV has no end_hours")
    parser.add_argument(
        "--pfc-mode",
        choices=["arithmetic", "geometric", "none"],
        default="arithmetic",
        help="how to recenter the model on the curve (default arithmetic)",
    )
    parser.add_argument("--quad-nodes", type=int, default=16, help="quadrature nodes per segment")
    parser.add_argument("--max-segment", type=float, default=24.0, help="max quadrature segment length (hours)")


def _build_market(args):
    vol = VolatilityStructure.from_json(_read_text(args.vol, "volatility"))
    model = model_from_json(_read_text(args.model, "model"))
    if args.pfc:
        pfc = load_pfc(_require_file(args.pfc, "curve"), horizon=args.horizon)
        if args.pfc_mode != "none":
            model = wrap_with_pfc(model, pfc, args.pfc_mode)
    quad = QuadratureSpec(args.quad_nodes, args.max_segment)
    return model, vol, quad


def _cmd_pfc_inspect(args) -> int:
    pfc = load_pfc(_require_file(args.pfc, "curve"), horizon=args.horizon)
    payload = {
        "domain": [pfc.start, pfc.horizon],
        "segments": len(pfc.values),
        "min": float(pfc.values.min()),
        "max": float(pfc.values.max()),
        "mean": pfc.average(pfc.start, pfc.horizon),
    }
    if args.tau is not None:
        payload["value"] = {"tau": args.tau, "price": pfc.value(args.tau)}
    if args.window is not None:
        a, b = args.window
        payload["average"] = {"tau1": a, "tau2": b, "price": pfc.average(a, b)}
    if args.format == "json":
        _emit(_json(payload), args.out)
    else:
        buf = io.StringIO()
        buf.write("start,end,price_eur_mwh\n")
        for start, end, price in pfc.segment_table():
            buf.write(f"{start:.17g},{end:.17g},{price:.17g}\n")
        _emit(buf.getvalue().rstrip("\n"), args.out)
    return 0


def _cmd_simulate(args) -> int:
    model, vol, quad = _build_market(args)
    config = sim.SimulationConfig(
        trading_grid=_parse_grid(args.grid),
        delivery_grid=_parse_grid(args.delivery),
        n_paths=args.paths,
        seed=args.seed,
        quad=quad,
    )
    ensemble = sim.simulate_ensemble(config, model, vol, n_threads=args.threads)
    if args.format == "json":
        _emit(_json(ensemble.summary()), args.out)
    else:
        buf = io.StringIO()
        ensemble.to_csv(buf)
        _emit(buf.getvalue().rstrip("\n"), args.out)
    return 0


def _cmd_price_futures(args) -> int:
    model, vol, quad = _build_market(args)
    state = sim.simulate_state(model, vol, args.t, args.seed)
    price = pricing.futures_price(state, model, args.tau1, args.tau2, quad)
    _emit(_json({"price": price, "t": args.t, "tau1": args.tau1, "tau2": args.tau2}), args.out)
    return 0


def _cmd_price_spot(args) -> int:
    model, vol, quad = _build_market(args)
    state = sim.simulate_state(model, vol, args.t, args.seed)
    price = pricing.day_ahead_spot(state, model, args.day, args.hour, quad)
    _emit(_json({"price": price, "day": args.day, "hour": args.hour, "t": args.t}), args.out)
    return 0


def _cmd_price_id_index(args) -> int:
    model, vol, quad = _build_market(args)
    window = _parse_grid(f"{args.tau1 - args.n}:{args.tau1 - 0.5}:{args.step}")
    config = sim.SimulationConfig(
        trading_grid=window,
        delivery_grid=[args.tau1, args.tau2],
        n_paths=args.paths,
        seed=args.seed,
        quad=quad,
    )
    ensemble = sim.simulate_ensemble(config, model, vol, n_threads=args.threads)
    futures = np.column_stack(
        [ensemble.futures_values(i, args.tau1, args.tau2) for i in range(window.size)]
    )
    values = pricing.id_index(window, futures, args.n, args.tau1, args.tau2)
    values = np.atleast_1d(values)
    if values.size >= 2:
        mean, se = sim.mean_se(values)
    else:
        mean, se = float(values[0]), 0.0
    _emit(
        _json({"index": mean, "se": se, "n": args.n, "tau1": args.tau1, "tau2": args.tau2, "paths": args.paths}),
        args.out,
    )
    return 0


def _cmd_price_option(args) -> int:
    model, vol, quad = _build_market(args)
    spec = options.OptionSpec.from_json(_read_text(args.option, "option"))
    if args.method == "lognormal":
        estimate = options.moment_matched_price(model, vol, spec, args.paths, args.seed, quad)
    else:
        estimate = options.mc_option_price(model, vol, spec, args.paths, args.seed, quad)
    _emit(_json(estimate.to_dict()), args.out)
    return 0


def _cmd_validate(args) -> int:
    results = run_validation(seed=args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        sys.stdout.write(f"{status}  {r.name:<{width}}  {r.detail}\n")
    failed = sum(not r.passed for r in results)
    sys.stdout.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerhjm",
        description="Consistent pricing of electricity forwards, spot, intraday indices, and options.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pfc = sub.add_parser("pfc", help="price forward curve utilities")
    pfc_sub = pfc.add_subparsers(dest="pfc_command", required=True)
    inspect = pfc_sub.add_parser("inspect", help="summarize a curve file")
    inspect.add_argument("--pfc", required=True)
    inspect.add_argument("--horizon", type=float, default=None)
    inspect.add_argument("--tau", type=float, default=None, help="also report the price at this delivery time")
    inspect.add_argument("--window", type=float, nargs=2, default=None, metavar=("TAU1", "TAU2"))
    inspect.add_argument("--format", choices=["json", "csv"], default="json")
    inspect.add_argument("--out", default=None)
    inspect.set_defaults(handler=_cmd_pfc_inspect)

    simulate = sub.add_parser("simulate", help="simulate a scenario ensemble")
    _add_market_args(simulate)
    simulate.add_argument("--grid", required=True, help="trading grid start:stop:step (hours)")
    simulate.add_argument("--delivery", required=True, help="delivery grid start:stop:step (hours)")
    simulate.add_argument("--paths", type=int, default=1000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--threads", type=int, default=1)
    simulate.add_argument("--format", choices=["csv", "json"], default="csv")
    simulate.add_argument("--out", default=None)
    simulate.set_defaults(handler=_cmd_simulate)

    price = sub.add_parser("price", help="price a product")
    price_sub = price.add_subparsers(dest="product", required=True)

    futures = price_sub.add_parser("futures", help="futures over a delivery period")
    _add_market_args(futures)
    futures.add_argument("--t", type=float, default=0.0, help="trading time; > 0 prices one seeded scenario")
    futures.add_argument("--tau1", type=float, required=True)
    futures.add_argument("--tau2", type=float, required=True)
    futures.add_argument("--seed", type=int, default=0)
    futures.add_argument("--out", default=None)
    futures.set_defaults(handler=_cmd_price_futures)

    spot = price_sub.add_parser("spot", help="day-ahead spot for a delivery day and hour")
    _add_market_args(spot)
    spot.add_argument("--day", type=int, required=True)
    spot.add_argument("--hour", type=int, required=True)
    spot.add_argument("--t", type=float, default=0.0)
    spot.add_argument("--seed", type=int, default=0)
    spot.add_argument("--out", default=None)
    spot.set_defaults(handler=_cmd_price_spot)

    idx = price_sub.add_parser("id-index", help="intraday index distribution over simulated paths")
    _add_market_args(idx)
    idx.add_argument("--n", type=int, choices=[1, 3], required=True)
    idx.add_argument("--tau1", type=float, required=True)
    idx.add_argument("--tau2", type=float, required=True)
    idx.add_argument("--step", type=float, default=0.25, help="sampling step inside the index window")
    idx.add_argument("--paths", type=int, default=1000)
    idx.add_argument("--seed", type=int, default=0)
    idx.add_argument("--threads", type=int, default=1)
    idx.add_argument("--out", default=None)
    idx.set_defaults(handler=_cmd_price_id_index)

    option = price_sub.add_parser("option", help="option on a futures contract")
    _add_market_args(option)
    option.add_argument("--option", required=True, help="option spec JSON")
    option.add_argument("--method", choices=["lognormal", "mc"], default="lognormal")
    option.add_argument("--paths", type=int, default=20000)
    option.add_argument("--seed", type=int, default=0)
    option.add_argument("--out", default=None)
    option.set_defaults(handler=_cmd_price_option)

    validate = sub.add_parser("validate", help="run the built-in validation suite")
    validate.add_argument("--seed", type=int, default=0)
    validate.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
