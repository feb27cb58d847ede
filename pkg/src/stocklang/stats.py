"""Paired yield comparison via the Wilcoxon signed-rank test.

The statistic is W = min(W-, W+), the smaller of the rank sums of the
negative and positive per-pair differences (zero differences dropped,
tied magnitudes given average ranks).  Significance comes from the normal
approximation z = (W - N(N+1)/4) / sqrt(N(N+1)(2N+1)/24) with no
continuity or tie correction; W never exceeds its mean, so z <= 0 and the
one-tailed p is Phi(z).  The two-tailed value is exposed as well.

Which side is hypothesized better is decided by the sign of the median
difference, carried in the result for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .backtest import YieldReport


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float
    n_effective: int
    z_score: float
    p_value: float
    p_two_tailed: float
    median_diff: float


def wilcoxon_signed_rank(yields_a: Sequence[float],
                         yields_b: Sequence[float]) -> WilcoxonResult:
    """Test paired per-stock yields of two strategies for equal medians.

    Requires at least 6 non-zero differences (the floor where the normal
    approximation is meaningful); raises if the samples are misaligned or
    every difference is zero.
    """
    a = np.asarray(yields_a, dtype=float)
    b = np.asarray(yields_b, dtype=float)
    if a.shape != b.shape:
        raise StatsError(f"length mismatch: {a.shape} vs {b.shape}")
    if len(a) < 6:
        raise StatsError("need at least 6 pairs for the normal approximation")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise StatsError("all differences are zero")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    mean = n * (n + 1) / 4.0
    sd = np.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
    z = (w - mean) / sd
    p_one = float(norm.cdf(z))
    return WilcoxonResult(
        w_statistic=w,
        n_effective=n,
        z_score=float(z),
        p_value=p_one,
        p_two_tailed=min(1.0, 2.0 * p_one),
        median_diff=float(np.median(a - b)),
    )


def mean_yield(reports: Sequence[YieldReport]) -> float:
    """Arithmetic mean of the reports' yields."""
    if not reports:
        raise StatsError("no yield reports to average")
    return float(np.mean([r.yield_ for r in reports]))
