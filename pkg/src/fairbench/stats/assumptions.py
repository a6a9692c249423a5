"""Checks of the parametric assumptions: normality and equal variances.

Shapiro-Wilk follows Royston's (1995) polynomial approximations for both the
coefficients and the p-value.  The Kolmogorov-Smirnov variant estimates mean
and variance from the data, so its p-value uses the Lilliefors correction
(Dallal-Wilkinson for the lower tail, the Stephens-style polynomial used by
common reference implementations above 0.1).
"""

from __future__ import annotations

import math

import numpy as np

from ._base import DegenerateSampleError, InvalidInputError, SampleSizeError, TestResult, as_sample
from .distributions import f_sf, norm_cdf, norm_ppf, norm_sf

# Royston polynomial coefficients, lowest order first
_AN_COEF = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_AN1_COEF = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SMALL_GAMMA = (-2.273, 0.459)
_SMALL_MEAN = (0.5440, -0.39978, 0.025054, -6.714e-4)
_SMALL_SD = (1.3822, -0.77857, 0.062767, -0.0020322)
_LARGE_MEAN = (-1.5861, -0.31082, -0.083751, 0.0038915)
_LARGE_SD = (-0.4803, -0.082676, 0.0030302)


def _poly(coef, x):
    return sum(c * x**i for i, c in enumerate(coef))


def shapiro_wilk_coefficients(n: int) -> np.ndarray:
    """Royston's approximation to the Shapiro-Wilk weights for sorted data.

    The weights are antisymmetric, sum to zero and have unit squared norm.
    """
    if n < 3:
        raise SampleSizeError("Shapiro-Wilk needs n >= 3")
    if n == 3:
        return np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])
    i = np.arange(1, n + 1)
    m = norm_ppf((i - 0.375) / (n + 0.25))
    ssq = float(np.sum(m * m))
    u = 1.0 / math.sqrt(n)
    a = np.empty(n)
    an = m[-1] / math.sqrt(ssq) + _poly(_AN_COEF, u)
    if n > 5:
        an1 = m[-2] / math.sqrt(ssq) + _poly(_AN1_COEF, u)
        phi = (ssq - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (1 - 2 * an**2 - 2 * an1**2)
        a[2:-2] = m[2:-2] / math.sqrt(phi)
        a[-2], a[1] = an1, -an1
    else:
        phi = (ssq - 2 * m[-1] ** 2) / (1 - 2 * an**2)
        a[1:-1] = m[1:-1] / math.sqrt(phi)
    a[-1], a[0] = an, -an
    return a


def shapiro_wilk(sample) -> TestResult:
    x = np.sort(as_sample(sample))
    n = x.size
    if not 3 <= n <= 5000:
        raise SampleSizeError(f"Shapiro-Wilk supports 3 <= n <= 5000, got n={n}")
    xc = x - x.mean()
    ssq = float(np.dot(xc, xc))
    if ssq == 0.0 or x[0] == x[-1]:
        raise DegenerateSampleError("sample has zero variance")
    a = shapiro_wilk_coefficients(n)
    w = min(1.0, float(np.dot(a, xc)) ** 2 / ssq)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(1.0, max(0.0, p))
    elif w >= 1.0:
        p = 1.0
    elif n <= 11:
        gamma = _poly(_SMALL_GAMMA, n)
        y = math.log1p(-w)
        if y >= gamma:
            p = 0.0
        else:
            y = -math.log(gamma - y)
            p = norm_sf((y - _poly(_SMALL_MEAN, n)) / math.exp(_poly(_SMALL_SD, n)))
    else:
        ln = math.log(n)
        y = math.log1p(-w)
        p = norm_sf((y - _poly(_LARGE_MEAN, ln)) / math.exp(_poly(_LARGE_SD, ln)))
    return TestResult("shapiro_wilk", w, p, n, notes=("Royston approximation",))


def _lilliefors_pvalue(d: float, n: int) -> float:
    # Dallal & Wilkinson (1986); beyond n=100 the statistic is rescaled
    if n > 100:
        kd, nd = d * (n / 100.0) ** 0.49, 100
    else:
        kd, nd = d, n
    p = math.exp(
        -7.01256 * kd**2 * (nd + 2.78019)
        + 2.99587 * kd * math.sqrt(nd + 2.78019)
        - 0.122119
        + 0.974598 / math.sqrt(nd)
        + 1.67997 / nd
    )
    if p <= 0.1:
        return p
    kk = (math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n)) * d
    if kk <= 0.302:
        return 1.0
    if kk <= 0.5:
        p = 2.76773 - 19.828315 * kk + 80.709644 * kk**2 - 138.55152 * kk**3 + 81.218052 * kk**4
    elif kk <= 0.9:
        p = -4.901232 + 40.662806 * kk - 97.490286 * kk**2 + 94.029866 * kk**3 - 32.355711 * kk**4
    elif kk <= 1.31:
        p = 6.198765 - 19.558097 * kk + 23.186922 * kk**2 - 12.234627 * kk**3 + 2.423045 * kk**4
    else:
        p = 0.0
    return min(1.0, max(0.0, p))


def ks_statistic_normal(sample) -> float:
    """Sup distance between the empirical CDF and the moment-fitted normal."""
    x = np.sort(as_sample(sample))
    n = x.size
    sd = x.std(ddof=1)
    cdf = np.array([norm_cdf(v) for v in (x - x.mean()) / sd])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def ks_normality(sample) -> TestResult:
    x = as_sample(sample)
    n = x.size
    if n < 4:
        raise SampleSizeError(f"Kolmogorov-Smirnov normality test needs n >= 4, got {n}")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("sample has zero variance")
    d = ks_statistic_normal(x)
    return TestResult("ks_normality", d, _lilliefors_pvalue(d, n), n, notes=("Lilliefors",))


def levene(groups, center="mean") -> TestResult:
    """Levene's test: one-way ANOVA on absolute deviations from group centers."""
    if len(groups) < 2:
        raise SampleSizeError("Levene's test needs at least two groups")
    gs = [as_sample(g, f"group {i}") for i, g in enumerate(groups)]
    for i, g in enumerate(gs):
        if g.size < 2:
            raise SampleSizeError(f"group {i} has fewer than 2 observations")
    if center == "mean":
        zs = [np.abs(g - g.mean()) for g in gs]
    elif center == "median":
        zs = [np.abs(g - np.median(g)) for g in gs]
    else:
        raise InvalidInputError(f"unknown center {center!r}; use 'mean' or 'median'")

    k = len(zs)
    n_total = sum(z.size for z in zs)
    if all(not np.any(z) for z in zs):
        raise DegenerateSampleError("all absolute deviations are zero")
    grand = np.concatenate(zs).mean()
    between = sum(z.size * (z.mean() - grand) ** 2 for z in zs)
    within = sum(float(np.sum((z - z.mean()) ** 2)) for z in zs)
    dfn, dfd = k - 1, n_total - k
    if within == 0.0:
        stat = 0.0 if between == 0.0 else math.inf
    else:
        stat = (dfd / dfn) * between / within
    p = 1.0 if stat == 0.0 else f_sf(stat, dfn, dfd)
    return TestResult("levene", stat, p, n_total, notes=(f"center={center}",), df=dfn, extra={"dfd": dfd})
