"""Friedman rank-sum test with an exact permutation distribution for small designs."""

from __future__ import annotations

import itertools
import math

import numpy as np

from ._base import Direction, InvalidInputError, TestResult, UnsupportedDesignError
from .distributions import chi2_sf
from .ranking import rank_rows

# rough count of array-element updates the exact convolution may spend
EXACT_WORK_LIMIT = 4e8


def _exact_work(n: int, k: int) -> float:
    cells = (2 * n * (k - 1) + 1) ** (k - 1)
    return cells * n * math.factorial(k) / k


def _exact_upper_tail(doubled: np.ndarray, observed: int) -> float:
    """P(S >= observed) when each row's ranks are permuted independently.

    ``doubled`` holds twice the mid-ranks, so every entry is an integer.
    S is sum_j (2 R_j - n (k + 1))**2 over column rank sums R_j; the last
    column is implied by the constant row total, which keeps the state space
    (k - 1)-dimensional.
    """
    n, k = doubled.shape
    dist = np.ones((1,) * (k - 1))
    lo = np.zeros(k - 1, dtype=int)  # smallest reachable doubled sum per axis
    for row in doubled:
        perms = {p for p in itertools.permutations(row.tolist())}
        rmin, rmax = int(row.min()), int(row.max())
        new_shape = tuple(s + rmax - rmin for s in dist.shape)
        nxt = np.zeros(new_shape)
        for p in perms:
            idx = tuple(slice(v - rmin, v - rmin + s) for v, s in zip(p[:-1], dist.shape))
            nxt[idx] += dist
        dist = nxt / len(perms)
        lo += rmin

    row_total = int(doubled[0].sum())
    center = n * (k + 1)
    axes = np.meshgrid(*[np.arange(s) + lo[j] for j, s in enumerate(dist.shape)], indexing="ij", sparse=True)
    s = sum((ax - center) ** 2 for ax in axes)
    last = n * row_total - sum(axes)
    s = s + (last - center) ** 2
    return float(min(1.0, dist[s >= observed].sum()))


def friedman(values, direction=Direction.LOWER_IS_BETTER, method="auto") -> TestResult:
    """Tie-corrected Friedman chi-square over row ranks.

    ``method`` is ``"exact"`` (within-row permutation distribution),
    ``"asymptotic"`` (chi-square with k - 1 df) or ``"auto"``, which takes the
    exact route whenever its cost is modest.
    """
    ranks = rank_rows(values, direction).ranks
    n, k = ranks.shape
    if k < 3:
        raise UnsupportedDesignError("Friedman needs k >= 3 treatments; use a direct pairwise test")
    if n < 2:
        raise UnsupportedDesignError("Friedman needs at least 2 subjects")

    tie_term = 0
    for row in ranks:
        _, t = np.unique(row, return_counts=True)
        tie_term += int(np.sum(t**3 - t))
    ties = tie_term > 0
    denom = 1.0 - tie_term / (n * (k**3 - k))
    doubled = np.rint(2 * ranks).astype(np.int64)
    center = n * (k + 1)
    s_obs = int(np.sum((doubled.sum(axis=0) - center) ** 2))
    notes = ["ties present" if ties else "no ties"]

    if denom <= 0.0:
        # every row fully tied: no information at all
        return TestResult("friedman", 0.0, 1.0, n, notes=tuple(notes + ["all rows tied"]), df=k - 1)

    # s_obs is 4 * sum_j (R_j - n(k+1)/2)^2
    stat = 12.0 / (n * k * (k + 1)) * (s_obs / 4.0) / denom

    if method == "auto":
        method = "exact" if _exact_work(n, k) <= EXACT_WORK_LIMIT else "asymptotic"
    if method == "exact":
        p = _exact_upper_tail(doubled, s_obs)
        notes.insert(0, "exact permutation")
    elif method == "asymptotic":
        p = chi2_sf(stat, k - 1)
        notes.insert(0, "chi-square approximation")
    else:
        raise InvalidInputError(f"unknown method {method!r}; use auto, exact or asymptotic")
    return TestResult("friedman", stat, p, n, notes=tuple(notes), df=k - 1)
