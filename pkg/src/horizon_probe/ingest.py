"""Hourly price series: CSV parsing, serialization and synthetic generators.

Timestamps are carried along for bookkeeping only. Every optimization in
the package works on integer step indices, so the series must already sit
on a uniform grid; daylight-saving duplicates or holes are rejected rather
than repaired.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .errors import EmptySeries, GapDetected, InvalidLength, MalformedRow

CSV_HEADER = "timestamp,price_eur_mwh"
SYNTHETIC_START = datetime(2024, 1, 1, tzinfo=timezone.utc)
SYNTHETIC_KINDS = ("constant", "sinusoid", "spiky-random")


@dataclass(frozen=True)
class PricePoint:
    timestamp: datetime
    price: float

    def __post_init__(self):
        ts = self.timestamp
        if ts.tzinfo is None or ts.utcoffset() != timedelta(0):
            raise ValueError(f"timestamp {ts!r} is not UTC")
        if ts.minute or ts.second or ts.microsecond:
            raise ValueError(f"timestamp {ts.isoformat()} is not hour-aligned")
        if not math.isfinite(self.price):
            raise ValueError(f"price {self.price!r} is not finite")


@dataclass(frozen=True)
class PriceSeries:
    """Ordered, uniformly spaced price points (EUR/MWh)."""

    points: tuple[PricePoint, ...]
    dt_hours: float

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 2:
            raise EmptySeries(f"need at least 2 price points, got {len(self.points)}")
        if not self.dt_hours > 0:
            raise ValueError("dt_hours must be positive")
        step = timedelta(hours=self.dt_hours)
        for i in range(1, len(self.points)):
            if self.points[i].timestamp - self.points[i - 1].timestamp != step:
                raise GapDetected(i + 1, f"spacing differs from {self.dt_hours} h")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def prices(self) -> np.ndarray:
        return np.array([p.price for p in self.points], dtype=float)

    @property
    def start(self) -> datetime:
        return self.points[0].timestamp

    @classmethod
    def from_values(
        cls,
        prices: Iterable[float],
        start: datetime = SYNTHETIC_START,
        dt_hours: float = 1.0,
    ) -> "PriceSeries":
        step = timedelta(hours=dt_hours)
        pts = tuple(
            PricePoint(start + i * step, float(p)) for i, p in enumerate(prices)
        )
        return cls(pts, float(dt_hours))


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError("timestamp lacks a UTC designator")
    return ts.astimezone(timezone.utc)


def parse_price_csv(raw: Union[bytes, str, IO]) -> PriceSeries:
    """Parse ``timestamp,price_eur_mwh`` CSV content into a PriceSeries.

    ``raw`` may be bytes, text, or a binary/text file object.  Rows are taken
    in file order; the spacing of the first two rows fixes ``dt_hours`` and
    every later row must keep it.
    """
    if hasattr(raw, "read"):
        raw = raw.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedRow(1, f"not UTF-8: {exc}") from None
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip().lstrip("﻿") != CSV_HEADER:
        raise MalformedRow(1, f"expected header {CSV_HEADER!r}")

    points: list[PricePoint] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.rstrip("\r").split(",")
        if len(fields) != 2:
            raise MalformedRow(lineno, f"expected 2 fields, got {len(fields)}")
        try:
            ts = _parse_timestamp(fields[0])
        except ValueError as exc:
            raise MalformedRow(lineno, f"bad timestamp {fields[0]!r}: {exc}") from None
        try:
            price = float(fields[1])
        except ValueError:
            raise MalformedRow(lineno, f"non-numeric price {fields[1]!r}") from None
        try:
            point = PricePoint(ts, price)
        except ValueError as exc:
            raise MalformedRow(lineno, str(exc)) from None
        if points:
            gap = point.timestamp - points[-1].timestamp
            if len(points) == 1:
                if gap <= timedelta(0):
                    raise GapDetected(lineno, "timestamps not increasing")
                dt = gap
            elif gap != dt:
                raise GapDetected(
                    lineno, f"spacing {gap} differs from {dt} (missing or duplicate hour?)"
                )
        points.append(point)

    if len(points) < 2:
        raise EmptySeries(f"need at least 2 price rows, got {len(points)}")
    return PriceSeries(tuple(points), dt.total_seconds() / 3600.0)


def serialize_price_csv(series: PriceSeries) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for p in series.points:
        stamp = p.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ")
        out.write(f"{stamp},{p.price!r}\n")
    return out.getvalue()


def load_price_csv(path) -> PriceSeries:
    with open(path, "rb") as fh:
        return parse_price_csv(fh)


def generate_synthetic(kind: str, length: int, seed: int = 0) -> PriceSeries:
    """Deterministic synthetic hourly prices.

    ``constant`` repeats 50 EUR/MWh, ``sinusoid`` follows a 24-step daily
    cycle and ``spiky-random`` is a seeded mean-reverting walk with upward
    spikes and occasional negative dips.
    """
    if length < 2:
        raise InvalidLength(f"length must be >= 2, got {length}")
    if kind == "constant":
        values: Sequence[float] = np.full(length, 50.0)
    elif kind == "sinusoid":
        t = np.arange(length)
        values = 50.0 + 30.0 * np.sin(2.0 * np.pi * t / 24.0)
    elif kind == "spiky-random":
        rng = np.random.default_rng(seed)
        values = np.empty(length)
        level = 60.0
        for i in range(length):
            level += 0.15 * (60.0 - level) + rng.normal(0.0, 12.0)
            price = level
            u = rng.random()
            if u < 0.05:
                price += rng.exponential(120.0)
            elif u < 0.10:
                price -= 60.0 + rng.exponential(40.0)
            values[i] = price
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    return PriceSeries.from_values([float(v) for v in values])
