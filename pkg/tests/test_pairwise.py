import itertools
import math

import numpy as np
import pytest
import scipy.stats as ss
from hypothesis import given, settings, strategies as st

from fairbench.stats import (
    DegenerateSampleError,
    SampleSizeError,
    t_test_paired,
    welch_t,
    wilcoxon_exact_pvalue,
    wilcoxon_signed_rank,
)
from fairbench.stats.pairwise import WILCOXON_EXACT_MAX_N, signed_rank_counts


def enumerate_signed_rank_p(d):
    """Two-sided p over all 2^n sign flips of the observed |d| ranks."""
    d = np.asarray(d, dtype=float)
    d = d[d != 0]
    ranks = ss.rankdata(np.abs(d))
    wplus = ranks[d > 0].sum()
    w = min(wplus, ranks.sum() - wplus)
    total = ranks.sum()
    hits = 0
    for signs in itertools.product((0, 1), repeat=d.size):
        wp = float(np.dot(signs, ranks))
        if min(wp, total - wp) <= w + 1e-9:
            hits += 1
    return hits / 2 ** d.size


# -- paired t -------------------------------------------------------------------

def test_t_zero_mean_difference():
    r = t_test_paired(a=[1, 2, 3], b=[2, 2, 2])
    assert r.statistic == 0.0 and r.p_value == 1.0


def test_t_known_differences():
    r = t_test_paired(a=[1, 2, 3, 4], b=[0, 0, 0, 0])
    assert r.statistic == pytest.approx(2.5 / (math.sqrt(5 / 3) / 2), abs=1e-12)
    assert r.statistic == pytest.approx(3.8730, abs=1e-4)
    assert r.df == 3
    assert r.p_value == pytest.approx(ss.t.sf(r.statistic, 3) * 2, abs=1e-12)


def test_t_constant_differences_degenerate():
    with pytest.raises(DegenerateSampleError, match="no variability"):
        t_test_paired(a=[3, 4, 5], b=[1, 2, 3])


def test_t_accepts_pairs_and_matches_scipy():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=12), rng.normal(size=12)
    r = t_test_paired(list(zip(a, b)))
    ref = ss.ttest_rel(a, b)
    assert r.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)


@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=20))
def test_t_antisymmetric(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    d = a - b
    if np.ptp(d) < 1e-6 * (1 + np.abs(d).max()):
        return
    r1, r2 = t_test_paired(a=a, b=b), t_test_paired(a=b, b=a)
    assert r1.statistic == pytest.approx(-r2.statistic, rel=1e-9, abs=1e-12)
    assert r1.p_value == pytest.approx(r2.p_value, rel=1e-9, abs=1e-12)


def test_t_too_few_pairs():
    with pytest.raises(SampleSizeError):
        t_test_paired(a=[1.0], b=[2.0])


# -- Welch ---------------------------------------------------------------------

def test_welch_identical_samples():
    r = welch_t([1, 2, 4], [1, 2, 4])
    assert r.statistic == 0.0 and r.p_value == 1.0


def test_welch_hand_example():
    r = welch_t([1, 2, 3], [2, 4, 6, 8])
    assert r.statistic == pytest.approx(-3.0 / math.sqrt(2.0), abs=1e-12)
    assert r.statistic == pytest.approx(-2.1213, abs=1e-4)
    # Welch-Satterthwaite by hand: se^2 = 1/3 + 20/12, terms (1/3)^2/2 and (5/3)^2/3
    df = 2.0 ** 2 / ((1 / 3) ** 2 / 2 + (20 / 12) ** 2 / 3)
    assert r.df == pytest.approx(df, rel=1e-12)
    assert r.df == pytest.approx(4.0755, abs=1e-4)
    assert r.p_value == pytest.approx(ss.ttest_ind([1, 2, 3], [2, 4, 6, 8], equal_var=False).pvalue, rel=1e-10)


def test_welch_swap_negates():
    a, b = [1.0, 5.0, 2.0, 7.0], [3.0, 3.5, 9.0]
    r1, r2 = welch_t(a, b), welch_t(b, a)
    assert r1.statistic == -r2.statistic and r1.p_value == r2.p_value


def test_welch_undersized():
    with pytest.raises(SampleSizeError):
        welch_t([1.0], [1.0, 2.0])


# -- Wilcoxon ------------------------------------------------------------------

def test_wilcoxon_all_positive_n5():
    r = wilcoxon_signed_rank(a=[2, 3, 4, 5, 6], b=[1, 1, 1, 1, 1])
    assert r.statistic == 0 and r.p_value == pytest.approx(2 / 32, abs=1e-15)
    assert "exact" in r.notes


def test_wilcoxon_anchor_n15_w8():
    assert wilcoxon_exact_pvalue(8, 15) == pytest.approx(50 / 32768, abs=1e-12)
    # 25 subsets of {1..15} have rank sum <= 8
    assert sum(signed_rank_counts(15)[:9]) == 25
    # a dataset realising W = 8
    d = np.arange(1, 16, dtype=float)
    d[[0, 6]] *= -1  # ranks 1 and 7 negative
    r = wilcoxon_signed_rank(a=d, b=np.zeros(15))
    assert r.statistic == 8
    assert r.p_value == pytest.approx(enumerate_signed_rank_p(d), abs=1e-12)
    assert f"{r.p_value:.2e}" == "1.53e-03"


def test_wilcoxon_counts_total():
    for n in range(1, 20):
        c = signed_rank_counts(n)
        assert sum(c) == 2 ** n and len(c) == n * (n + 1) // 2 + 1


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2 ** 32 - 1))
def test_wilcoxon_matches_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.permutation(np.arange(1, n + 1)) * rng.choice([-1.0, 1.0], n) + rng.uniform(-0.3, 0.3, n)
    r = wilcoxon_signed_rank(a=d, b=np.zeros(n))
    assert r.p_value == pytest.approx(enumerate_signed_rank_p(d), abs=1e-12)


def test_wilcoxon_zero_differences_dropped():
    r = wilcoxon_signed_rank(a=[1, 2, 3, 4, 5, 6], b=[1, 1, 1, 1, 1, 1])
    assert r.n == 5
    assert any("zero" in note for note in r.notes)


def test_wilcoxon_all_zero_degenerate():
    with pytest.raises(DegenerateSampleError):
        wilcoxon_signed_rank(a=[1, 2, 3], b=[1, 2, 3])


def test_wilcoxon_ties_use_normal_approximation():
    rng = np.random.default_rng(3)
    a = np.round(rng.normal(size=30), 1)
    b = np.round(rng.normal(size=30), 1)
    r = wilcoxon_signed_rank(a=a, b=b)
    assert "normal approximation" in r.notes
    ref = ss.wilcoxon(a, b, zero_method="wilcox", correction=True, method="approx")
    assert r.statistic == ref.statistic
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)


def test_wilcoxon_large_n_switches_to_normal():
    rng = np.random.default_rng(4)
    d = rng.normal(size=WILCOXON_EXACT_MAX_N + 5)
    r = wilcoxon_signed_rank(a=d, b=np.zeros_like(d))
    assert "normal approximation" in r.notes


def test_wilcoxon_symmetric_in_arguments():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=14), rng.normal(size=14)
    assert wilcoxon_signed_rank(a=a, b=b) == wilcoxon_signed_rank(a=b, b=a)
