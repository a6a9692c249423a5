"""Two-sample location tests used for control-versus-opponent comparisons."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.stats import rankdata

from ._base import DegenerateSampleError, SampleSizeError, TestResult, as_pairs, as_sample
from .distributions import norm_cdf, t_sf_two_sided

WILCOXON_EXACT_MAX_N = 25


def t_test_paired(pairs=None, *, a=None, b=None) -> TestResult:
    a, b = as_pairs(pairs, a, b)
    d = a - b
    n = d.size
    sd = d.std(ddof=1)
    if sd == 0.0 or np.all(d == d[0]):
        raise DegenerateSampleError("no variability in the paired differences")
    t = d.mean() / (sd / math.sqrt(n))
    df = n - 1
    return TestResult("paired_t", float(t), t_sf_two_sided(float(t), df), n, df=df)


def welch_t(a, b) -> TestResult:
    """Unequal-variance t test with Welch-Satterthwaite degrees of freedom."""
    a = as_sample(a, "a")
    b = as_sample(b, "b")
    if a.size < 2 or b.size < 2:
        raise SampleSizeError("Welch's t test needs at least 2 observations per sample")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va == 0.0 and vb == 0.0:
        raise DegenerateSampleError("both samples have zero variance")
    se2 = va + vb
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return TestResult("welch_t", float(t), t_sf_two_sided(float(t), df), a.size + b.size, df=float(df))


@lru_cache(maxsize=None)
def signed_rank_counts(n: int) -> tuple[int, ...]:
    """Number of subsets of {1..n} with each possible sum 0..n(n+1)/2.

    Under the null every sign vector is equally likely, so these counts over
    2**n give the exact distribution of the positive rank sum.
    """
    counts = [1] + [0] * (n * (n + 1) // 2)
    top = 0
    for r in range(1, n + 1):
        top += r
        for s in range(top, r - 1, -1):
            counts[s] += counts[s - r]
    return tuple(counts)


def wilcoxon_exact_pvalue(w: float, n: int) -> float:
    """P(min(W+, W-) <= w) under the null, for tie-free integer ranks."""
    counts = signed_rank_counts(n)
    total = n * (n + 1) // 2
    wi = math.floor(w + 1e-9)
    # min(T, total - T) <= w  <=>  T <= w or T >= total - w
    hits = sum(c for t, c in enumerate(counts) if t <= wi or t >= total - wi)
    return min(1.0, hits / 2.0**n)


def wilcoxon_signed_rank(pairs=None, *, a=None, b=None, exact=None) -> TestResult:
    """Wilcoxon signed-rank test on paired observations.

    Zero differences are discarded first.  With ``exact=None`` the exact null
    distribution is used for at most 25 non-zero, tie-free differences and a
    tie- and continuity-corrected normal approximation otherwise.
    """
    a, b = as_pairs(pairs, a, b)
    d = a - b
    zeros = int(np.sum(d == 0))
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateSampleError("all paired differences are zero")
    if n < 2:
        raise SampleSizeError("fewer than 2 non-zero differences")
    absd = np.abs(d)
    ranks = rankdata(absd)
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    _, tie_sizes = np.unique(absd, return_counts=True)
    has_ties = bool(np.any(tie_sizes > 1))

    notes = [f"dropped {zeros} zero differences"] if zeros else []
    use_exact = (n <= WILCOXON_EXACT_MAX_N and not has_ties) if exact is None else bool(exact)
    if use_exact and has_ties:
        raise ValueError("exact distribution requires tie-free absolute differences")
    if use_exact:
        p = wilcoxon_exact_pvalue(w, n)
        notes.insert(0, "exact")
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
        z = (w - mean + 0.5) / math.sqrt(var)
        p = min(1.0, 2.0 * norm_cdf(min(z, 0.0)))
        notes.insert(0, "normal approximation")
        if has_ties:
            notes.append("ties corrected")
    return TestResult("wilcoxon", w, p, n, notes=tuple(notes), extra={"w_plus": w_plus, "w_minus": w_minus})
