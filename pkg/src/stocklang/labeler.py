"""Look-ahead trading-action labels for training days.

Each day i is labeled by scanning the next n_la closes in order: holding
n_max = ceil(e / C_i) shares, the first future day whose price move beats
the round-trip fee decides the label.  A gain crossing (n_max * C_j >
n_max * C_i + 2 * v_fee) labels BUY, a loss crossing labels SELL, and the
earlier crossing wins when both occur inside the horizon.  Days where
neither threshold is crossed are HOLD.  The last n_la days have no full
look-ahead window and are not labeled.

Day i itself is excluded from its own window: C_i can never beat a
positive fee threshold against itself, and the strict inequalities exclude
it at zero fee too.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Sequence


class LabelerError(ValueError):
    pass


class ActionLabel(IntEnum):
    BUY = 0
    SELL = 1
    HOLD = 2


@dataclass(frozen=True)
class LabelingParams:
    """n_la: look-ahead horizon (trading days); v_fee: flat fee per
    transaction; e: initial equity used to size the hypothetical trade."""

    n_la: int
    v_fee: float
    e: float

    def __post_init__(self) -> None:
        if self.n_la < 1:
            raise LabelerError("n_la must be >= 1")
        if self.v_fee < 0:
            raise LabelerError("v_fee must be >= 0")
        if self.e <= 0:
            raise LabelerError("initial equity must be positive")


def max_shares(close: float, e: float) -> int:
    """ceil(e / close): the share count used to weigh price moves against fees."""
    if close <= 0:
        raise LabelerError("close must be positive")
    return math.ceil(e / close)


def label_days(closes: Sequence[float], params: LabelingParams) -> list[ActionLabel]:
    """Label the first len(closes) - n_la days by first threshold crossing."""
    n_d = len(closes)
    if n_d <= params.n_la:
        raise LabelerError(
            f"series of {n_d} days is too short for n_la={params.n_la}")
    labels = []
    for i in range(n_d - params.n_la):
        n_max = max_shares(closes[i], params.e)
        base = n_max * closes[i]
        label = ActionLabel.HOLD
        for j in range(i + 1, i + params.n_la + 1):
            move = n_max * closes[j]
            if move > base + 2.0 * params.v_fee:
                label = ActionLabel.BUY
                break
            if move < base - 2.0 * params.v_fee:
                label = ActionLabel.SELL
                break
        labels.append(label)
    return labels


def export_labels(path: str | Path, dates: Sequence[dt.date],
                  labels: Sequence[ActionLabel]) -> None:
    """Write labels as CSV ``date,label`` with BUY/SELL/HOLD names."""
    if len(dates) < len(labels):
        raise LabelerError("fewer dates than labels")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "label"])
        for date, label in zip(dates, labels):
            writer.writerow([date.isoformat(), label.name])
