"""Shared result type, error classes and input coercion for the test kernel."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class StatsError(ValueError):
    """Base class for every input problem raised by the statistics kernel."""


class InvalidInputError(StatsError):
    pass


class SampleSizeError(StatsError):
    pass


class DegenerateSampleError(StatsError):
    """Raised when a sample carries no variability the test can work with."""


class UnsupportedDesignError(StatsError):
    pass


class Direction(str, Enum):
    LOWER_IS_BETTER = "lower_is_better"
    HIGHER_IS_BETTER = "higher_is_better"


@dataclass(frozen=True)
class TestResult:
    """Outcome of a single hypothesis test.

    ``notes`` holds short tags such as ``"exact"`` or ``"normal approximation"``
    so a reader can tell which computation path produced the p-value.
    """

    __test__ = False  # keep pytest from collecting this class

    method: str
    statistic: float
    p_value: float
    n: int
    notes: tuple[str, ...] = ()
    df: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value!r} outside [0, 1]")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": float(self.statistic),
            "p_value": float(self.p_value),
            "n": int(self.n),
            "df": None if self.df is None else float(self.df),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestResult":
        return cls(
            method=d["method"],
            statistic=float(d["statistic"]),
            p_value=float(d["p_value"]),
            n=int(d["n"]),
            notes=tuple(d.get("notes", ())),
            df=None if d.get("df") is None else float(d["df"]),
        )


def as_sample(values, name="sample") -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional")
    if x.size < 1:
        raise SampleSizeError(f"{name} is empty")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise InvalidInputError(f"{name} has non-finite value at index {bad[0]}")
    return x


def as_pairs(pairs=None, a=None, b=None) -> tuple[np.ndarray, np.ndarray]:
    """Accept either an (n, 2) array-like of pairs or two aligned sequences."""
    if pairs is not None:
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidInputError("pairs must have shape (n, 2)")
        a, b = arr[:, 0], arr[:, 1]
    a = as_sample(a, "a")
    b = as_sample(b, "b")
    if a.shape != b.shape:
        raise InvalidInputError(f"paired samples differ in length ({a.size} vs {b.size})")
    if a.size < 2:
        raise SampleSizeError("paired tests need at least 2 pairs")
    return a, b


def as_matrix(values) -> np.ndarray:
    m = np.asarray(values, dtype=float)
    if m.ndim != 2:
        raise InvalidInputError("expected a 2-D (subjects x treatments) matrix")
    bad = np.argwhere(~np.isfinite(m))
    if bad.size:
        r, c = bad[0]
        raise InvalidInputError(f"non-finite entry at row {r}, column {c}")
    return m
