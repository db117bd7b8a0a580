"""Price forward curve: the deterministic initial term structure.

Conventions used throughout the package:

- Times are **hours** from a shared reference epoch (hour 0). All modules
  use the same unit; the epoch itself is only a label.
- The curve is **piecewise constant** per delivery segment, the usual
  convention for hourly price forward curves, and **right-continuous** at
  breakpoints.
- Prices are EUR/MWh.

The curve's domain is ``[breakpoints[0], horizon)``; averaging is allowed
up to and including the horizon. Construction of the curve from market
quotes is out of scope: the curve is an input, loaded from CSV or JSON.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os

import numpy as np

from .errors import CurveFormatError, DomainError

_CSV_START = "delivery_start_hours"
_CSV_PRICE = "price_eur_mwh"
_CSV_END = "end_hours"


class PriceForwardCurve:
    """Piecewise-constant delivery-price curve with exact segment averaging."""

    __slots__ = ("breakpoints", "values", "horizon", "epoch")

    def __init__(self, breakpoints, values, horizon: float, epoch: str | None = None):
        breakpoints = np.asarray(breakpoints, dtype=float)
        values = np.asarray(values, dtype=float)
        if breakpoints.ndim != 1 or breakpoints.size < 2:
            raise CurveFormatError("curve needs at least 2 breakpoints")
        if breakpoints.shape != values.shape:
            raise CurveFormatError("breakpoints and values must have the same length")
        if np.any(np.diff(breakpoints) <= 0.0):
            raise CurveFormatError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(breakpoints)):
            raise CurveFormatError("breakpoints must be finite")
        if not np.all(np.isfinite(values)):
            raise CurveFormatError("prices must be finite")
        horizon = float(horizon)
        if not math.isfinite(horizon) or horizon <= breakpoints[-1]:
            raise CurveFormatError("horizon must be finite and beyond the last breakpoint")
        self.breakpoints = breakpoints
        self.values = values
        self.horizon = horizon
        self.epoch = epoch

    # -- evaluation ----------------------------------------------------

    @property
    def start(self) -> float:
        return float(self.breakpoints[0])

    def value(self, tau):
        """Price at delivery time ``tau``; right-continuous at breakpoints.

        ``tau`` may be a scalar or an array; the domain is ``[start, horizon)``.
        """
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < self.breakpoints[0]) or np.any(tau >= self.horizon):
            raise DomainError(
                f"delivery time outside curve domain [{self.breakpoints[0]}, {self.horizon})"
            )
        idx = np.searchsorted(self.breakpoints, tau, side="right") - 1
        out = self.values[idx]
        return float(out) if tau.ndim == 0 else out

    def average(self, tau1: float, tau2: float) -> float:
        """Exact average price over ``[tau1, tau2]`` via segment-wise integration."""
        tau1 = float(tau1)
        tau2 = float(tau2)
        if not tau1 < tau2:
            raise ValueError("average requires tau1 < tau2")
        if tau1 < self.breakpoints[0] or tau2 > self.horizon:
            raise DomainError(
                f"[{tau1}, {tau2}] outside curve domain [{self.breakpoints[0]}, {self.horizon}]"
            )
        edges = np.concatenate(([tau1], self.breakpoints_in(tau1, tau2), [tau2]))
        lengths = np.diff(edges)
        vals = self.value(edges[:-1])
        return float(np.dot(vals, lengths) / (tau2 - tau1))

    def breakpoints_in(self, a: float, b: float) -> np.ndarray:
        """Breakpoints strictly inside ``(a, b)``; segment boundaries for quadrature."""
        lo = np.searchsorted(self.breakpoints, a, side="right")
        hi = np.searchsorted(self.breakpoints, b, side="left")
        return self.breakpoints[lo:hi]

    # -- construction and serialization --------------------------------

    @classmethod
    def flat(cls, level: float, horizon: float, start: float = 0.0) -> "PriceForwardCurve":
        """Flat curve at ``level`` on ``[start, horizon)``."""
        mid = 0.5 * (start + horizon)
        return cls([start, mid], [level, level], horizon)

    def to_dict(self) -> dict:
        d = {
            "breakpoints": [float(x) for x in self.breakpoints],
            "values": [float(x) for x in self.values],
            "horizon": self.horizon,
        }
        if self.epoch is not None:
            d["epoch"] = self.epoch
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PriceForwardCurve":
        return cls(d["breakpoints"], d["values"], d["horizon"], d.get("epoch"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PriceForwardCurve":
        return cls.from_dict(json.loads(text))

    def value_equal(self, other: "PriceForwardCurve") -> bool:
        return (
            np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.values, other.values)
            and self.horizon == other.horizon
        )

    def segment_table(self) -> list[tuple[float, float, float]]:
        """Rows ``(start, end, price)``, one per segment."""
        ends = np.concatenate((self.breakpoints[1:], [self.horizon]))
        return [
            (float(s), float(e), float(v))
            for s, e, v in zip(self.breakpoints, ends, self.values)
        ]


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError(f"unsupported CSV source: {type(source)!r}")


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise CurveFormatError(f"row {row}: {column} is not a number: {text!r}") from None
    if not math.isfinite(x):
        raise CurveFormatError(f"row {row}: {column} is not finite: {text!r}")
    return x


def load_pfc(source, horizon: float | None = None) -> PriceForwardCurve:
    """Load a price forward curve from CSV.

    Expected header: ``delivery_start_hours,price_eur_mwh`` with rows sorted
    ascending; an optional ``end_hours`` column on the last row fixes the end
    of the final segment, otherwise ``horizon`` is required. ``source`` may be
    a path, an open file, a byte string, or a file-like object. Malformed rows
    are rejected with their (1-based) row number.
    """
    with _open_text(source) as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if _CSV_START not in fields or _CSV_PRICE not in fields:
            raise CurveFormatError(
                f"CSV header must contain {_CSV_START!r} and {_CSV_PRICE!r}, got {fields}"
            )
        has_end = _CSV_END in fields
        starts: list[float] = []
        prices: list[float] = []
        ends: list[float | None] = []
        for i, record in enumerate(reader, start=1):
            start = _parse_float(record[_CSV_START], i, _CSV_START)
            price = _parse_float(record[_CSV_PRICE], i, _CSV_PRICE)
            if starts and start <= starts[-1]:
                raise CurveFormatError(f"row {i}: delivery times not ascending")
            end = None
            if has_end and record.get(_CSV_END) not in (None, ""):
                end = _parse_float(record[_CSV_END], i, _CSV_END)
            starts.append(start)
            prices.append(price)
            ends.append(end)

    if len(starts) < 2:
        raise CurveFormatError("curve needs at least 2 rows")
    for i, end in enumerate(ends[:-1], start=1):
        if end is not None and end != starts[i]:
            raise CurveFormatError(f"row {i}: end_hours {end} does not match next start {starts[i]}")
    if horizon is None:
        horizon = ends[-1]
    if horizon is None:
        raise CurveFormatError("no end_hours on the last row: a horizon is required")
    return PriceForwardCurve(starts, prices, horizon)


def dump_pfc(curve: PriceForwardCurve, target) -> None:
    """Write a curve back to CSV in the format read by :func:`load_pfc`."""
    own = isinstance(target, (str, os.PathLike))
    fh = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(fh)
        writer.writerow([_CSV_START, _CSV_PRICE, _CSV_END])
        table = curve.segment_table()
        for i, (start, end, price) in enumerate(table):
            last = i == len(table) - 1
            writer.writerow([repr(start), repr(price), repr(end) if last else ""])
    finally:
        if own:
            fh.close()
