"""Long-only trade simulation and the comparison strategies.

The simulator walks an action stream aligned with daily closes: a BUY
while flat buys as many shares as the cash can cover after the flat fee,
a SELL while long liquidates, and everything else is a no-op.  Any open
position is liquidated at the final close.  Trades execute at the signal
day's close, the only price the labeling logic reasons about.  Yield is
final cash minus initial equity.

Baselines: Buy & Hold, simple-moving-average crossover (default 50/100),
and MACD (default 12/26/9, EMAs seeded from the first value).  All
strategies pay the same flat per-transaction fee.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .labeler import ActionLabel


class BacktestError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyRun:
    """An action stream to simulate with its equity and fee settings."""

    actions: Sequence[ActionLabel]
    e: float
    v_fee: float

    def __post_init__(self) -> None:
        if self.e <= 0:
            raise BacktestError("initial equity must be positive")
        if self.v_fee < 0:
            raise BacktestError("fee must be >= 0")


@dataclass(frozen=True)
class Trade:
    date: dt.date | int
    side: ActionLabel
    shares: int
    price: float
    fee: float
    cash_after: float


@dataclass(frozen=True)
class TradeLedger:
    """Executed trades of one simulated run, plus the final account state."""

    trades: list[Trade]
    final_cash: float
    final_shares: int
    initial_equity: float
    skipped: list[tuple[dt.date | int, ActionLabel]] = field(default_factory=list)

    @property
    def yield_(self) -> float:
        return self.final_cash - self.initial_equity


@dataclass(frozen=True)
class YieldReport:
    """One strategy's yield on one ticker and phase (final value - equity)."""

    ticker: str
    strategy: str
    phase: str
    yield_: float


def simulate(closes: Sequence[float], run: StrategyRun,
             dates: Sequence[dt.date] | None = None) -> TradeLedger:
    """Walk the action stream over the closes and book every trade.

    Share sizing on BUY caps the ceiling count ceil(cash / C) at what the
    cash actually covers after the fee, floor((cash - fee) / C), keeping
    the account margin-free.  An unaffordable BUY is recorded as skipped
    and otherwise ignored.
    """
    if not len(closes):
        raise BacktestError("empty price stream")
    if len(closes) != len(run.actions):
        raise BacktestError(
            f"{len(closes)} closes vs {len(run.actions)} actions")
    if dates is not None and len(dates) != len(closes):
        raise BacktestError("dates not aligned with closes")

    when = dates if dates is not None else list(range(len(closes)))
    cash = run.e
    shares = 0
    trades: list[Trade] = []
    skipped: list[tuple[dt.date | int, ActionLabel]] = []

    for t, action in enumerate(run.actions):
        price = closes[t]
        if action == ActionLabel.BUY and shares == 0:
            affordable = math.floor((cash - run.v_fee) / price)
            count = min(math.ceil(cash / price), affordable)
            if count < 1:
                skipped.append((when[t], ActionLabel.BUY))
                continue
            cash -= count * price + run.v_fee
            shares = count
            trades.append(Trade(when[t], ActionLabel.BUY, count, price,
                                run.v_fee, cash))
        elif action == ActionLabel.SELL and shares > 0:
            cash += shares * price - run.v_fee
            trades.append(Trade(when[t], ActionLabel.SELL, shares, price,
                                run.v_fee, cash))
            shares = 0

    if shares > 0:
        price = closes[-1]
        cash += shares * price - run.v_fee
        trades.append(Trade(when[-1], ActionLabel.SELL, shares, price,
                            run.v_fee, cash))
        shares = 0

    return TradeLedger(trades=trades, final_cash=cash, final_shares=shares,
                       initial_equity=run.e, skipped=skipped)


def buy_and_hold(closes: Sequence[float], e: float, v_fee: float,
                 ticker: str = "", phase: str = "") -> YieldReport:
    """Buy at the first close, liquidate at the last; two fees."""
    if not len(closes):
        raise BacktestError("empty price stream")
    actions = [ActionLabel.BUY] + [ActionLabel.HOLD] * (len(closes) - 1)
    ledger = simulate(closes, StrategyRun(actions=actions, e=e, v_fee=v_fee))
    return YieldReport(ticker=ticker, strategy="buy_hold", phase=phase,
                       yield_=ledger.yield_)


def _sma(closes: np.ndarray, window: int) -> np.ndarray:
    """Simple moving average; positions before the window fills are NaN."""
    out = np.full(len(closes), np.nan)
    csum = np.concatenate(([0.0], np.cumsum(closes)))
    out[window - 1:] = (csum[window:] - csum[:-window]) / window
    return out


def ma_crossover(closes: Sequence[float], short: int = 50,
                 long: int = 100) -> list[ActionLabel]:
    """BUY when the short SMA crosses strictly above the long SMA, SELL on
    the strict cross below, HOLD otherwise.

    A crossing needs two consecutive days with both windows full, so the
    first full-window day is baseline only.
    """
    if short >= long:
        raise BacktestError("short window must be below long window")
    prices = np.asarray(closes, dtype=float)
    if len(prices) <= long:
        raise BacktestError(
            f"series of {len(prices)} days is too short for MA({short},{long})")
    diff = _sma(prices, short) - _sma(prices, long)
    actions = [ActionLabel.HOLD] * len(prices)
    for t in range(long, len(prices)):
        if diff[t - 1] <= 0 < diff[t]:
            actions[t] = ActionLabel.BUY
        elif diff[t - 1] >= 0 > diff[t]:
            actions[t] = ActionLabel.SELL
    return actions


def _ema(values: np.ndarray, span: int) -> np.ndarray:
    """Recursive EMA with alpha = 2 / (span + 1), seeded from the first value."""
    alpha = 2.0 / (span + 1.0)
    out = np.empty(len(values))
    out[0] = values[0]
    for t in range(1, len(values)):
        out[t] = (1.0 - alpha) * out[t - 1] + alpha * values[t]
    return out


def macd(closes: Sequence[float], fast: int = 12, slow: int = 26,
         signal: int = 9) -> list[ActionLabel]:
    """BUY when the MACD line crosses strictly above its signal line, SELL
    on the strict cross below.

    The first fast/slow/signal recursions are unreliable, so no signal is
    emitted during the first slow + signal days.
    """
    if fast >= slow:
        raise BacktestError("fast span must be below slow span")
    prices = np.asarray(closes, dtype=float)
    if len(prices) <= slow + signal:
        raise BacktestError(
            f"series of {len(prices)} days is too short for "
            f"MACD({fast},{slow},{signal})")
    macd_line = _ema(prices, fast) - _ema(prices, slow)
    diff = macd_line - _ema(macd_line, signal)
    actions = [ActionLabel.HOLD] * len(prices)
    for t in range(slow + signal, len(prices)):
        if diff[t - 1] <= 0 < diff[t]:
            actions[t] = ActionLabel.BUY
        elif diff[t - 1] >= 0 > diff[t]:
            actions[t] = ActionLabel.SELL
    return actions


def export_ledger(path: str | Path, ledger: TradeLedger) -> None:
    """Write trades as CSV ``date,side,shares,price,fee,cash_after``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "side", "shares", "price", "fee", "cash_after"])
        for trade in ledger.trades:
            when = trade.date.isoformat() if isinstance(trade.date, dt.date) else trade.date
            writer.writerow([when, trade.side.name, trade.shares,
                             repr(trade.price), repr(trade.fee),
                             repr(trade.cash_after)])
