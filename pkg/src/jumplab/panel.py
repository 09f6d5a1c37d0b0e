"""Intraday return grids: data model and CSV ingestion.

A trading day is a fixed grid of M equally spaced log-returns.  Simulated
days additionally carry ground truth (jump occurrence, size, variance
states) used by the evaluation harness.  All statistics in the package are
within-day functionals, so no overnight return is ever formed.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)


class IngestionError(ValueError):
    """Raised when a price file violates the expected grid or contents."""


@dataclass(frozen=True)
class GroundTruth:
    """Per-day simulation truth for one trading day.

    `z_p` is the applied price jump in log-return units (0 when no jump);
    `z_v` the variance jump in variance units.  `delta_p`/`delta_v` are the
    intensities in effect for the day, `v_open`/`v_close` the diffusive
    variance at the day boundaries.  `jump_step` is the 1-based fine-grid
    step that received the price jump (None when dN_p = 0).
    """

    day_index: int
    dn_p: int
    z_p: float
    dn_v: int
    z_v: float
    v_open: float
    v_close: float
    delta_p: float
    delta_v: float
    jump_step: Optional[int] = None

    def __post_init__(self):
        if self.dn_p not in (0, 1) or self.dn_v not in (0, 1):
            raise ValueError("jump indicators must be 0 or 1")
        if (self.z_p == 0.0) != (self.dn_p == 0):
            raise ValueError("z_p must be nonzero exactly when dn_p = 1")
        if self.z_v < 0:
            raise ValueError("volatility jump size must be nonnegative")
        if not (0.0 <= self.delta_p <= 1.0 and 0.0 <= self.delta_v <= 1.0):
            raise ValueError("intensities must lie in [0, 1]")
        if self.v_open < 0 or self.v_close < 0:
            raise ValueError("variance states must be nonnegative")


@dataclass(frozen=True)
class IntradayDay:
    """One trading day of M equally spaced intraday log-returns.

    `label` carries the source identifier (e.g. the CSV date) when the day
    was ingested from a file.
    """

    day_index: int
    returns: np.ndarray
    truth: Optional[GroundTruth] = None
    label: Optional[str] = None

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", r)
        if r.ndim != 1 or r.size < 4:
            raise ValueError("a day needs at least 4 returns (quarticity lags)")
        if not np.all(np.isfinite(r)):
            raise ValueError(f"day {self.day_index}: non-finite return")
        if self.truth is not None and self.truth.day_index != self.day_index:
            raise ValueError("truth.day_index does not match day_index")

    @property
    def m(self) -> int:
        return self.returns.size

    @property
    def daily_return(self) -> float:
        return float(self.returns.sum())


@dataclass(frozen=True)
class Panel:
    """Ordered collection of days sharing a common grid size."""

    days: tuple[IntradayDay, ...]

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        idx = [d.day_index for d in self.days]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("day_index must be strictly increasing")
        ms = {d.m for d in self.days}
        if len(ms) > 1:
            raise ValueError(f"days disagree on grid size: {sorted(ms)}")

    @property
    def t(self) -> int:
        return len(self.days)

    @property
    def m(self) -> int:
        return self.days[0].m if self.days else 0

    def returns_matrix(self) -> np.ndarray:
        """All returns as a (T, M) array."""
        if not self.days:
            return np.empty((0, 0))
        return np.vstack([d.returns for d in self.days])

    def truth_arrays(self) -> dict[str, np.ndarray]:
        """Ground-truth columns as arrays; raises if any day lacks truth."""
        if any(d.truth is None for d in self.days):
            raise ValueError("panel has days without ground truth")
        t = [d.truth for d in self.days]
        return {
            "dn_p": np.array([g.dn_p for g in t]),
            "z_p": np.array([g.z_p for g in t]),
            "dn_v": np.array([g.dn_v for g in t]),
            "z_v": np.array([g.z_v for g in t]),
            "v_open": np.array([g.v_open for g in t]),
            "v_close": np.array([g.v_close for g in t]),
            "delta_p": np.array([g.delta_p for g in t]),
            "delta_v": np.array([g.delta_v for g in t]),
        }


def returns_from_prices(prices: Sequence[float]) -> np.ndarray:
    """Log-returns from a day's price levels: out[i] = ln(p[i+1]/p[i]).

    Prices must be positive and finite; at least 5 levels are required so
    the resulting day supports every estimator in the package.
    """
    p = np.asarray(prices, dtype=float)
    if p.size < 5:
        raise IngestionError(f"need at least 5 prices per day, got {p.size}")
    bad = np.flatnonzero(~(np.isfinite(p) & (p > 0)))
    if bad.size:
        raise IngestionError(f"non-positive or non-finite price at record {bad[0]}: {p[bad[0]]!r}")
    return np.diff(np.log(p))


def thin(returns: np.ndarray, k: int) -> np.ndarray:
    """Aggregate returns to a grid k times coarser by block summation.

    Log-returns add across adjacent intervals, so thinning every k-th
    price is the block sum of k fine returns.  k must divide the length.
    """
    r = np.asarray(returns, dtype=float)
    if k < 1:
        raise ValueError("k must be a positive integer")
    m = r.shape[-1]
    if m % k:
        raise ValueError(f"k={k} does not divide the return count {m}")
    return r.reshape(r.shape[:-1] + (m // k, k)).sum(axis=-1)


def load_intraday_csv(path, grid: int, pad_forward: bool = False) -> Panel:
    """Read a `date,time,price` CSV into a Panel of daily return grids.

    Each date must supply exactly `grid` prices (hence grid-1 returns).  In
    strict mode (default) a day with a different count is an error.  With
    `pad_forward`, prices missing from a day's expected time grid are
    forward-filled from the last available price and a warning is logged;
    the expected grid is the union of times seen across the whole file.
    """
    by_day: dict[str, list[tuple[str, float]]] = {}
    order: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "time", "price"]:
            raise IngestionError(f"{path}: expected header 'date,time,price', got {header}")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise IngestionError(f"{path}:{ln}: expected 3 fields, got {len(row)}")
            date, tm, raw = (f.strip() for f in row)
            try:
                price = float(raw)
            except ValueError:
                raise IngestionError(f"{path}:{ln}: unparseable price {raw!r}") from None
            if date not in by_day:
                by_day[date] = []
                order.append(date)
            by_day[date].append((tm, price))

    if not order:
        raise IngestionError(f"{path}: no data rows")
    if order != sorted(order):
        raise IngestionError(f"{path}: dates out of order")

    all_times = sorted({tm for rows in by_day.values() for tm, _ in rows})
    days = []
    for idx, date in enumerate(order):
        rows = by_day[date]
        times = [tm for tm, _ in rows]
        if times != sorted(times):
            raise IngestionError(f"{path}: times out of order on {date}")
        if len(rows) != grid:
            if not pad_forward:
                raise IngestionError(
                    f"{path}: {date} has {len(rows)} prices, expected {grid} (strict grid)"
                )
            if len(all_times) != grid:
                raise IngestionError(
                    f"{path}: file spans {len(all_times)} distinct times, cannot pad to grid {grid}"
                )
            have = dict(rows)
            if all_times[0] not in have:
                raise IngestionError(f"{path}: {date} is missing the opening price, cannot pad")
            padded = []
            last = math.nan
            for tm in all_times:
                last = have.get(tm, last)
                padded.append(last)
            log.warning("%s: %s had %d of %d prices; forward-filled the gaps", path, date, len(rows), grid)
            prices = padded
        else:
            prices = [p for _, p in rows]
        try:
            r = returns_from_prices(prices)
        except IngestionError as e:
            raise IngestionError(f"{path}: {date}: {e}") from None
        days.append(IntradayDay(day_index=idx, returns=r, label=date))
    return Panel(days=tuple(days))
