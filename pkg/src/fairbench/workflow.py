"""Comparison workflow: assumption-driven test choice, omnibus gate, control-vs-all.

The flow is

1. summarize every (algorithm, function) cell over its runs (median by default),
2. rank algorithms per function and average the ranks,
3. run the Friedman test over the summary matrix,
4. only if it is significant, test the control against every other algorithm
   with the test that the data's normality/variance profile allows, and
5. correct the resulting p-values for multiplicity.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .stats import (
    CorrectionMethod,
    Direction,
    StatsError,
    TestResult,
    adjust_pvalues,
    average_ranks,
    count_wins,
    friedman,
    ks_normality,
    levene,
    rank_rows,
    shapiro_wilk,
    t_test_paired,
    welch_t,
    wilcoxon_signed_rank,
)

PAIRED_T = "paired_t"
WELCH = "welch_t"
WILCOXON = "wilcoxon"
BEST_AVERAGE_RANK = "best_average_rank"


class WorkflowError(ValueError):
    pass


class ShapeError(WorkflowError):
    pass


@dataclass(frozen=True)
class ComparisonConfig:
    alpha: float = 0.05
    correction: CorrectionMethod = CorrectionMethod.HOLM
    control: str = BEST_AVERAGE_RANK
    normality_small_n_threshold: int = 50
    direction: Direction = Direction.LOWER_IS_BETTER
    summary: str = "median"
    friedman_method: str = "auto"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise WorkflowError("alpha must lie in (0, 1)")
        object.__setattr__(self, "correction", CorrectionMethod(self.correction))
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.summary not in ("median", "mean"):
            raise WorkflowError("summary must be 'median' or 'mean'")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "correction": self.correction.value,
            "control": self.control,
            "normality_small_n_threshold": self.normality_small_n_threshold,
            "direction": self.direction.value,
            "summary": self.summary,
            "friedman_method": self.friedman_method,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonConfig":
        return cls(**d)


@dataclass(frozen=True)
class TestSelection:
    method: str
    audit: dict

    __test__ = False


@dataclass(frozen=True)
class PairwiseDecision:
    opponent: str
    test_used: str
    raw_p: float
    adjusted_p: float
    significant: bool
    statistic: float = float("nan")
    audit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "opponent": self.opponent,
            "test_used": self.test_used,
            "statistic": self.statistic,
            "raw_p": self.raw_p,
            "adjusted_p": self.adjusted_p,
            "significant": self.significant,
            "audit": self.audit,
        }


@dataclass(frozen=True)
class ComparisonReport:
    checkpoint: int | None
    algorithms: tuple[str, ...]
    functions: tuple[str, ...]
    average_ranks: dict[str, float]
    win_counts: dict[str, int]
    friedman: TestResult | None
    control: str
    pairwise: tuple[PairwiseDecision, ...]
    provenance: dict

    @property
    def alpha(self) -> float:
        return self.provenance["config"]["alpha"]

    @property
    def omnibus_significant(self) -> bool:
        return self.friedman is None or self.friedman.p_value < self.alpha


@dataclass(frozen=True)
class ResultsMatrix:
    """Per-run errors for every (algorithm, function) cell, aligned by run index.

    ``cells`` has shape (algorithms, functions, runs).  NaN marks a failed run.
    """

    algorithms: tuple[str, ...]
    functions: tuple[str, ...]
    cells: np.ndarray
    function_tags: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=float)
        if c.ndim == 2:
            c = c[:, :, None]
        if c.shape[:2] != (len(self.algorithms), len(self.functions)):
            raise ShapeError("cells shape does not match the algorithm/function labels")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ShapeError("algorithm ids must be unique")
        object.__setattr__(self, "cells", c)
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "functions", tuple(self.functions))

    @property
    def runs(self) -> int:
        return self.cells.shape[2]

    @classmethod
    def from_table(cls, table, algorithms, functions, **kw) -> "ResultsMatrix":
        """Build from a functions x algorithms table of single values."""
        t = np.asarray(table, dtype=float)
        return cls(tuple(algorithms), tuple(functions), t.T[:, :, None], **kw)

    @classmethod
    def from_records(cls, records, checkpoint, exclude_failed=False) -> "ResultsMatrix":
        algorithms = sorted({r.algorithm for r in records})
        functions = sorted({r.function for r in records})
        runs = sorted({r.run for r in records})
        seen = {}
        for r in records:
            key = (r.algorithm, r.function, r.run)
            if key in seen:
                raise ShapeError(f"duplicate record for {key}")
            seen[key] = r
        missing = [
            (a, f, k) for a in algorithms for f in functions for k in runs if (a, f, k) not in seen
        ]
        if missing:
            raise ShapeError(f"results are not rectangular; missing cells: {missing[:10]}")
        cells = np.empty((len(algorithms), len(functions), len(runs)))
        tags = {}
        for (a, f, k), r in seen.items():
            if r.failed:
                v = np.nan
            else:
                if checkpoint not in r.errors:
                    raise ShapeError(
                        f"record {r.algorithm}/{r.function}/run {r.run} lacks checkpoint {checkpoint}"
                    )
                v = r.errors[checkpoint]
            cells[algorithms.index(a), functions.index(f), runs.index(k)] = v
            if getattr(r, "tags", None):
                tags[f] = tuple(r.tags)
        m = cls(tuple(algorithms), tuple(functions), cells, function_tags=tags)
        if np.isnan(cells).any():
            if not exclude_failed:
                raise WorkflowError("results contain failed runs; pass exclude_failed=True to drop them")
        return m

    def summary(self, how="median") -> np.ndarray:
        """functions x algorithms matrix of per-cell summaries."""
        fn = np.nanmedian if how == "median" else np.nanmean
        return fn(self.cells, axis=2).T

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([self.algorithms, self.functions]).encode())
        h.update(np.ascontiguousarray(self.cells, dtype="<f8").tobytes())
        return h.hexdigest()


def _normality(x, threshold):
    test = shapiro_wilk if x.size <= threshold else ks_normality
    return test(x)


def select_test(a, b, config: ComparisonConfig = ComparisonConfig()) -> TestSelection:
    """Choose paired t, Welch or Wilcoxon from normality and variance checks.

    Both samples must look normal for a t test; Levene's test then picks
    between the equal-variance (paired t) and unequal-variance (Welch) forms.
    A condition test that cannot run (degenerate or too small sample) counts
    as a failed assumption and sends the comparison to Wilcoxon.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    alpha = config.alpha
    audit: dict = {}
    normal = True
    for label, x in (("a", a), ("b", b)):
        try:
            r = _normality(x, config.normality_small_n_threshold)
            audit[f"normality_{label}"] = {"method": r.method, "p_value": r.p_value, "pass": r.p_value >= alpha}
            normal &= r.p_value >= alpha
        except StatsError as exc:
            audit[f"normality_{label}"] = {"method": None, "p_value": None, "pass": False, "note": str(exc)}
            normal = False
    try:
        r = levene([a, b])
        equal_var = r.p_value >= alpha
        audit["levene"] = {"p_value": r.p_value, "pass": equal_var}
    except StatsError as exc:
        equal_var = False
        audit["levene"] = {"p_value": None, "pass": False, "note": str(exc)}
    if not normal:
        method = WILCOXON
    else:
        method = PAIRED_T if equal_var else WELCH
    return TestSelection(method, audit)


def _run_pairwise(method, a, b) -> TestResult:
    if method == PAIRED_T:
        return t_test_paired(a=a, b=b)
    if method == WELCH:
        return welch_t(a, b)
    return wilcoxon_signed_rank(a=a, b=b)


def compare_algorithms(
    results: ResultsMatrix, config: ComparisonConfig = ComparisonConfig(), checkpoint=None
) -> ComparisonReport:
    algs = results.algorithms
    k = len(algs)
    if k < 2 or len(results.functions) < 2:
        raise ShapeError("need at least 2 algorithms and 2 functions")
    if np.isnan(results.cells).all(axis=2).any():
        raise WorkflowError("some cells have no successful run")
    summary = results.summary(config.summary)
    ranks = rank_rows(summary, config.direction)
    avg = average_ranks(ranks)
    wins = count_wins(summary, config.direction)

    if config.control == BEST_AVERAGE_RANK:
        control = algs[int(np.argmin(avg))]
    elif config.control in algs:
        control = config.control
    else:
        raise WorkflowError(f"control {config.control!r} is not among the algorithms {list(algs)}")

    omnibus = friedman(summary, config.direction, config.friedman_method) if k >= 3 else None
    pairwise: list[PairwiseDecision] = []
    if omnibus is None or omnibus.p_value < config.alpha:
        ci = algs.index(control)
        raw, chosen = [], []
        for j, opp in enumerate(algs):
            if j == ci:
                continue
            a, b = summary[:, ci], summary[:, j]
            sel = select_test(a, b, config)
            method = sel.method
            audit = dict(sel.audit)
            try:
                res = _run_pairwise(method, a, b)
            except StatsError as exc:
                res = None
                audit["notes"] = [f"{method} not applicable: {exc}"]
                if method != WILCOXON:
                    method = WILCOXON
                    try:
                        res = wilcoxon_signed_rank(a=a, b=b)
                    except StatsError as exc2:
                        audit["notes"].append(f"wilcoxon not applicable: {exc2}")
            if res is None:
                # identical summaries: nothing to distinguish
                p, stat = 1.0, float("nan")
            else:
                p, stat = res.p_value, res.statistic
                audit.setdefault("notes", []).extend(res.notes)
            raw.append(p)
            chosen.append((opp, method, stat, audit))
        adjusted = adjust_pvalues(raw, config.correction) if k >= 3 else np.asarray(raw)
        for (opp, method, stat, audit), p, q in zip(chosen, raw, adjusted):
            q = max(float(q), float(p))
            pairwise.append(PairwiseDecision(opp, method, float(p), q, bool(q < config.alpha), float(stat), audit))

    provenance = {
        "config": config.to_dict(),
        "data_digest": results.digest(),
        "runs": results.runs,
        "n_functions": len(results.functions),
        "function_tags": {f: list(t) for f, t in sorted(results.function_tags.items())},
    }
    return ComparisonReport(
        checkpoint=checkpoint,
        algorithms=algs,
        functions=results.functions,
        average_ranks={a: float(r) for a, r in zip(algs, avg)},
        win_counts={a: int(w) for a, w in zip(algs, wins)},
        friedman=omnibus,
        control=control,
        pairwise=tuple(pairwise),
        provenance=provenance,
    )


def checkpoint_comparison(records, checkpoints, config: ComparisonConfig = ComparisonConfig(),
                          exclude_failed=False) -> list[ComparisonReport]:
    """One report per requested checkpoint, in the caller's order."""
    records = list(records)
    for cp in checkpoints:
        for r in records:
            if not r.failed and cp not in r.errors:
                raise ShapeError(f"record {r.algorithm}/{r.function}/run {r.run} lacks checkpoint {cp}")
    return [
        compare_algorithms(ResultsMatrix.from_records(records, cp, exclude_failed), config, checkpoint=cp)
        for cp in checkpoints
    ]


def group_average_ranks(results: ResultsMatrix, groups: dict, config: ComparisonConfig = ComparisonConfig()):
    """Average rank per algorithm within each named group of functions.

    ``groups`` maps a group label to the function ids it contains; the result
    is an algorithms x groups array (in the order of ``groups``).
    """
    summary = results.summary(config.summary)
    cols = []
    for label, fids in groups.items():
        idx = [results.functions.index(f) for f in fids]
        if not idx:
            raise WorkflowError(f"group {label!r} is empty")
        cols.append(average_ranks(rank_rows(summary[idx], config.direction)))
    return np.column_stack(cols)


def with_control(config: ComparisonConfig, control: str) -> ComparisonConfig:
    return replace(config, control=control)
