import mpmath as mp
import numpy as np
import pytest

from fairbench.stats import distributions as dist

mp.mp.dps = 40

CHI2_POINTS = [(x, df) for x, df in zip(np.geomspace(0.05, 60, 20), [1, 2, 3, 4, 5, 7, 9, 12, 15, 20] * 2)]
T_POINTS = [(t, df) for t, df in zip(np.linspace(-6, 6, 20), [1, 2, 3, 4, 5, 8, 10, 14, 20, 30] * 2)]
F_POINTS = [(x, a, b) for x, a, b in zip(np.geomspace(0.02, 30, 20), [1, 2, 3, 5, 8] * 4, [2, 4, 7, 12, 30] * 4)]


def mp_chi2_cdf(x, df):
    return mp.gammainc(mp.mpf(df) / 2, 0, mp.mpf(x) / 2, regularized=True)


def mp_t_cdf(t, df):
    t, df = mp.mpf(t), mp.mpf(df)
    tail = mp.betainc(df / 2, mp.mpf(1) / 2, 0, df / (df + t * t), regularized=True) / 2
    return 1 - tail if t > 0 else tail


def mp_f_cdf(x, a, b):
    x, a, b = mp.mpf(x), mp.mpf(a), mp.mpf(b)
    return mp.betainc(a / 2, b / 2, 0, a * x / (a * x + b), regularized=True)


@pytest.mark.parametrize("x,df", CHI2_POINTS)
def test_chi2_cdf_matches_mpmath(x, df):
    ref = mp_chi2_cdf(x, df)
    assert dist.chi2_cdf(x, df) == pytest.approx(float(ref), abs=1e-10)
    assert dist.chi2_sf(x, df) == pytest.approx(float(1 - ref), abs=1e-10)


@pytest.mark.parametrize("t,df", T_POINTS)
def test_t_cdf_matches_mpmath(t, df):
    ref = mp_t_cdf(t, df)
    assert dist.t_cdf(t, df) == pytest.approx(float(ref), abs=1e-10)
    two = 2 * min(ref, 1 - ref)
    assert dist.t_sf_two_sided(t, df) == pytest.approx(float(two), abs=1e-10)


@pytest.mark.parametrize("x,a,b", F_POINTS)
def test_f_cdf_matches_mpmath(x, a, b):
    ref = mp_f_cdf(x, a, b)
    assert dist.f_cdf(x, a, b) == pytest.approx(float(ref), abs=1e-10)
    assert dist.f_sf(x, a, b) == pytest.approx(float(1 - ref), abs=1e-10)


def test_normal_helpers_are_consistent():
    for z in np.linspace(-5, 5, 11):
        assert dist.norm_cdf(z) + dist.norm_sf(z) == pytest.approx(1.0, abs=1e-15)
        assert dist.norm_ppf(dist.norm_cdf(z)) == pytest.approx(z, abs=1e-9)
    assert float(dist.norm_cdf(1.0)) == pytest.approx(float(mp.ncdf(1)), abs=1e-14)
