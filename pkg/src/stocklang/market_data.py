"""Daily OHLC ingestion and shape normalization.

Input files are per-ticker CSVs (UTF-8, header ``date,open,high,low,close``,
ISO dates, decimal prices; the filename stem is the ticker).  Bars are
validated on construction and normalized to open-relative ratios so that
only the candle's shape, not its absolute price level, survives.

Input prices are assumed to be already adjusted for splits/dividends; no
corporate-action handling happens here.  Missing trading days are not
gap-filled: the series is treated as consecutive trading days.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path


class MarketDataError(ValueError):
    """Raised for malformed input files or invariant-violating bars."""


@dataclass(frozen=True)
class OhlcBar:
    """One trading day's open/high/low/close prices.

    Invariants: all prices strictly positive, ``low <= min(open, close)``
    and ``high >= max(open, close)``.
    """

    date: dt.date
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self) -> None:
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise MarketDataError(f"non-positive price in bar {self}")
        if self.low > min(self.open, self.close):
            raise MarketDataError(f"low above open/close in bar {self}")
        if self.high < max(self.open, self.close):
            raise MarketDataError(f"high below open/close in bar {self}")


@dataclass(frozen=True)
class NormalizedBar:
    """Open-relative candle shape: (high/open, low/open, close/open)."""

    h_ratio: float
    l_ratio: float
    c_ratio: float

    def __post_init__(self) -> None:
        if min(self.h_ratio, self.l_ratio, self.c_ratio) <= 0:
            raise MarketDataError(f"non-positive ratio in {self}")
        if self.l_ratio > min(1.0, self.c_ratio):
            raise MarketDataError(f"l_ratio above unity/close ratio in {self}")
        if self.h_ratio < max(1.0, self.c_ratio):
            raise MarketDataError(f"h_ratio below unity/close ratio in {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.h_ratio, self.l_ratio, self.c_ratio)


def normalize(bar: OhlcBar) -> NormalizedBar:
    """Divide H, L, C by the open, discarding absolute price level.

    Scaling all four prices by any positive constant yields the identical
    result.
    """
    return NormalizedBar(
        h_ratio=bar.high / bar.open,
        l_ratio=bar.low / bar.open,
        c_ratio=bar.close / bar.open,
    )


_HEADER = ["date", "open", "high", "low", "close"]


def load_series(path: str | Path) -> list[OhlcBar]:
    """Read one ticker's daily bars from CSV, strictly ascending by date.

    Raises MarketDataError naming the offending row for malformed rows,
    non-monotonic dates, or price-invariant violations; an empty file is
    an error ("empty series").
    """
    path = Path(path)
    bars: list[OhlcBar] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MarketDataError(f"{path}: empty series")
        if [h.strip().lower() for h in header] != _HEADER:
            raise MarketDataError(f"{path}: expected header {','.join(_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 5:
                raise MarketDataError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            try:
                bar = OhlcBar(
                    date=dt.date.fromisoformat(row[0].strip()),
                    open=float(row[1]),
                    high=float(row[2]),
                    low=float(row[3]),
                    close=float(row[4]),
                )
            except MarketDataError as exc:
                raise MarketDataError(f"{path}:{lineno}: {exc}") from None
            except ValueError as exc:
                raise MarketDataError(f"{path}:{lineno}: malformed row: {exc}") from None
            if bars and bar.date <= bars[-1].date:
                raise MarketDataError(
                    f"{path}:{lineno}: dates not strictly ascending "
                    f"({bars[-1].date} then {bar.date})"
                )
            bars.append(bar)
    if not bars:
        raise MarketDataError(f"{path}: empty series")
    return bars


def write_series(path: str | Path, bars: list[OhlcBar]) -> None:
    """Write bars in the same CSV format load_series reads (round-trips)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_HEADER)
        for bar in bars:
            writer.writerow([bar.date.isoformat(), repr(bar.open), repr(bar.high),
                             repr(bar.low), repr(bar.close)])
