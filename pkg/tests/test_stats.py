import itertools
import math

import numpy as np
import pytest
from scipy.stats import rankdata

from stocklang import StatsError, YieldReport, mean_yield, wilcoxon_signed_rank


def exact_permutation_p(diffs):
    """Exhaustive sign-permutation oracle: P(W+ <= observed min rank sum)
    under the null that each |difference| is equally likely either sign."""
    d = np.asarray([x for x in diffs if x != 0])
    ranks = rankdata(np.abs(d))
    w_plus = ranks[d > 0].sum()
    w_minus = ranks[d < 0].sum()
    w_obs = min(w_plus, w_minus)
    count = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        wp = sum(r for r, s in zip(ranks, signs) if s)
        if wp <= w_obs:
            count += 1
    return count / 2 ** len(d)


class TestWilcoxon:
    def test_regression_row_w2(self):
        # construct N=50 pairs with exactly one positive difference of the
        # second-smallest magnitude -> W+ = 2
        a = [float(-(i + 1)) for i in range(50)]
        a[1] = 2.0  # magnitudes 1, 2, 3..50; only magnitude 2 is positive
        b = [0.0] * 50
        res = wilcoxon_signed_rank(a, b)
        assert res.w_statistic == 2.0
        assert res.n_effective == 50
        assert res.z_score == pytest.approx(-6.1347, abs=1e-3)
        assert res.p_value < 0.0001

    def test_regression_row_w427(self):
        # ranks 1..50; choose a positive subset with rank sum 427
        target = 427.0
        signs = [0.0] * 50
        total = 0.0
        for rank in range(50, 0, -1):
            if total + rank <= target:
                total += rank
                signs[rank - 1] = 1.0
        assert total == target
        a = [(1.0 if signs[r - 1] else -1.0) * r for r in range(1, 51)]
        res = wilcoxon_signed_rank(a, [0.0] * 50)
        assert res.w_statistic == 427.0
        assert res.z_score == pytest.approx(-2.032, abs=1e-3)
        assert res.p_value == pytest.approx(0.021, abs=1e-3)

    def test_regression_row_w155(self):
        target = 155.0
        signs = [0.0] * 50
        total = 0.0
        for rank in range(50, 0, -1):
            if total + rank <= target:
                total += rank
                signs[rank - 1] = 1.0
        assert total == target
        a = [(1.0 if signs[r - 1] else -1.0) * r for r in range(1, 51)]
        res = wilcoxon_signed_rank(a, [0.0] * 50)
        assert res.w_statistic == 155.0
        assert res.p_value < 0.0001

    def test_constants_for_n50(self):
        assert 50 * 51 / 4 == 637.5
        assert math.sqrt(50 * 51 * 101 / 24) == pytest.approx(103.591, abs=1e-3)

    def test_rank_sum_conservation(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = rng.normal(size=20)
            b = rng.normal(size=20)
            d = a - b
            d = d[d != 0]
            ranks = rankdata(np.abs(d))
            w_plus = ranks[d > 0].sum()
            w_minus = ranks[d < 0].sum()
            n = len(d)
            assert w_plus + w_minus == pytest.approx(n * (n + 1) / 2)

    def test_symmetry_in_argument_order(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=30)
        b = rng.normal(size=30)
        r1 = wilcoxon_signed_rank(a, b)
        r2 = wilcoxon_signed_rank(b, a)
        assert r1.w_statistic == r2.w_statistic
        assert r1.p_value == r2.p_value
        assert r1.median_diff == -r2.median_diff

    def test_zero_differences_dropped(self):
        a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
        b = [1.0, 2.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        res = wilcoxon_signed_rank(a, b)
        assert res.n_effective == 6

    def test_ties_get_average_ranks(self):
        # differences +1, +1, -1, +2, -2, +3: |d| ranks (2,2,2) then (4.5,4.5) then 6
        a = [1.0, 1.0, -1.0, 2.0, -2.0, 3.0]
        res = wilcoxon_signed_rank(a, [0.0] * 6)
        assert res.w_statistic == pytest.approx(2 + 4.5)  # the negative side

    def test_all_zero_differences_rejected(self):
        with pytest.raises(StatsError, match="zero"):
            wilcoxon_signed_rank([1.0] * 10, [1.0] * 10)

    def test_length_mismatch_rejected(self):
        with pytest.raises(StatsError, match="mismatch"):
            wilcoxon_signed_rank([1.0] * 10, [1.0] * 9)

    def test_short_sample_rejected(self):
        with pytest.raises(StatsError, match="at least 6"):
            wilcoxon_signed_rank([1.0] * 5, [0.0] * 5)

    def test_normal_vs_exact_permutation_small_n(self):
        rng = np.random.default_rng(2026)
        for k in range(40):
            n = 9 + k % 2
            diffs = rng.normal(0.2, 1.0, size=n)
            res = wilcoxon_signed_rank(diffs, np.zeros(n))
            exact = exact_permutation_p(diffs)
            assert abs(res.p_value - exact) <= 0.03


class TestMeanYield:
    def _wrap(self, values):
        return [YieldReport(ticker=f"T{i}", strategy="w2v", phase="test", yield_=v)
                for i, v in enumerate(values)]

    def test_published_average(self):
        reports = self._wrap([102557.08, -2927.03, 1996.82])
        assert mean_yield(reports) == pytest.approx(33875.62, abs=0.01)

    def test_single_element(self):
        assert mean_yield(self._wrap([123.45])) == 123.45

    def test_symmetric_pair_cancels(self):
        assert mean_yield(self._wrap([777.0, -777.0])) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(StatsError, match="no yield"):
            mean_yield([])
