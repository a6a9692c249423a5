"""Family-wise error corrections for a set of simultaneous p-values."""

from __future__ import annotations

from enum import Enum

import numpy as np

from ._base import InvalidInputError


class CorrectionMethod(str, Enum):
    BONFERRONI_DUNN = "bonferroni_dunn"
    HOLM = "holm"
    HOCHBERG = "hochberg"
    HOMMEL = "hommel"


def _bonferroni(p):
    return np.minimum(1.0, p.size * p)


def _holm(p):
    m = p.size
    order = np.argsort(p, kind="stable")
    adj = np.maximum.accumulate((m - np.arange(m)) * p[order])
    out = np.empty(m)
    out[order] = np.minimum(1.0, adj)
    return out


def _hochberg(p):
    m = p.size
    order = np.argsort(p, kind="stable")[::-1]  # largest first
    adj = np.minimum.accumulate((np.arange(m) + 1) * p[order])
    out = np.empty(m)
    out[order] = np.minimum(1.0, adj)
    return out


def _hommel(p):
    # closed Simes procedure, computed with the usual O(m^2) sweep
    m = p.size
    order = np.argsort(p, kind="stable")
    ps = p[order]
    i = np.arange(1, m + 1)
    q = np.full(m, np.min(m * ps / i))
    pa = q.copy()
    for j in range(m - 1, 1, -1):
        i1 = np.arange(m - j + 1)
        i2 = np.arange(m - j + 1, m)
        q1 = np.min(j * ps[i2] / np.arange(2, j + 1))
        q[i1] = np.minimum(j * ps[i1], q1)
        q[i2] = q[m - j]
        pa = np.maximum(pa, q)
    pa = np.maximum(pa, ps)
    out = np.empty(m)
    out[order] = np.minimum(1.0, pa)
    return out


_METHODS = {
    CorrectionMethod.BONFERRONI_DUNN: _bonferroni,
    CorrectionMethod.HOLM: _holm,
    CorrectionMethod.HOCHBERG: _hochberg,
    CorrectionMethod.HOMMEL: _hommel,
}


def adjust_pvalues(raw, method=CorrectionMethod.HOLM) -> np.ndarray:
    """Adjusted p-values, returned in the order of ``raw``."""
    p = np.asarray(raw, dtype=float).ravel()
    if p.size < 1:
        raise InvalidInputError("need at least one p-value")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise InvalidInputError("p-values must lie in [0, 1]")
    method = CorrectionMethod(method)
    if p.size == 1:
        return p.copy()
    return _METHODS[method](p)
