"""Shared synthetic-data helpers for the test suite."""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

import numpy as np

from stocklang import OhlcBar


def weekday_dates(n: int, start: dt.date = dt.date(2015, 1, 5)) -> list[dt.date]:
    """n consecutive weekdays starting at a Monday."""
    dates = []
    day = start
    while len(dates) < n:
        if day.weekday() < 5:
            dates.append(day)
        day += dt.timedelta(days=1)
    return dates


def random_walk_bars(n: int, seed: int, start_price: float = 100.0,
                     drift: float = 0.0002, vol: float = 0.015) -> list[OhlcBar]:
    """Geometric random-walk daily bars satisfying the OHLC invariants."""
    rng = np.random.default_rng(seed)
    dates = weekday_dates(n)
    bars = []
    close = start_price
    for i in range(n):
        open_ = close * (1.0 + rng.normal(0.0, vol / 3))
        close = open_ * (1.0 + drift + rng.normal(0.0, vol))
        body_hi = max(open_, close)
        body_lo = min(open_, close)
        high = body_hi * (1.0 + abs(rng.normal(0.0, vol / 2)))
        low = body_lo * (1.0 - abs(rng.normal(0.0, vol / 2)))
        bars.append(OhlcBar(date=dates[i], open=open_, high=high,
                            low=max(low, 1e-6), close=close))
    return bars


def write_ticker_csv(directory: Path, ticker: str, bars: list[OhlcBar]) -> Path:
    path = Path(directory) / f"{ticker}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "open", "high", "low", "close"])
        for bar in bars:
            writer.writerow([bar.date.isoformat(), repr(bar.open), repr(bar.high),
                             repr(bar.low), repr(bar.close)])
    return path
