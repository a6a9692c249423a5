"""Experiment execution: seeded runs, CSV persistence, ablations and bias probes."""

from __future__ import annotations

import csv
import itertools
import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .benchmark import FunctionSpec, SuiteManifest, derive_seed, make_function
from .optimizers import Budget, ConfigError, EvaluationError, OptimizerConfig, run_optimizer
from .stats import count_wins
from .workflow import ResultsMatrix

CSV_COLUMNS = ("algorithm", "function", "dimension", "run", "evaluations", "error", "seed", "wall_ms")
ERROR_SLACK = 1e-12


class ManifestError(ValueError):
    pass


class CsvSchemaError(ValueError):
    pass


class DuplicateRecordError(CsvSchemaError):
    pass


@dataclass(frozen=True)
class RunRecord:
    algorithm: str
    function: str
    dimension: int
    run: int
    seed: int
    errors: dict  # checkpoint -> error
    wall_ms: float = 0.0
    failed: bool = False
    diagnostics: str = ""
    tags: tuple = field(default=(), compare=False)

    @property
    def key(self):
        return (self.algorithm, self.function, self.run)


@dataclass(frozen=True)
class ExperimentPlan:
    suite: SuiteManifest
    algorithms: tuple[OptimizerConfig, ...]
    runs: int
    budget: Budget
    master_seed: int = 0
    output: str | None = None
    paired_seeds: bool = False
    record_wall_time: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ManifestError("runs must be >= 1")
        ids = [a.id for a in self.algorithms]
        if len(set(ids)) != len(ids):
            raise ManifestError(f"algorithm ids must be unique, got {ids}")
        if not ids:
            raise ManifestError("plan lists no algorithms")

    def to_dict(self) -> dict:
        return {
            "suite": self.suite.to_dict(),
            "algorithms": [a.to_dict() for a in self.algorithms],
            "runs": self.runs,
            "budget": self.budget.to_dict(),
            "master_seed": self.master_seed,
            "paired_seeds": self.paired_seeds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentPlan":
        missing = [k for k in ("suite", "algorithms", "runs", "budget", "master_seed") if k not in d]
        if missing:
            raise ManifestError(f"manifest is missing field(s): {', '.join(missing)}")
        try:
            algs = []
            for a in d["algorithms"]:
                algs.append(OptimizerConfig(algorithm=a) if isinstance(a, str) else OptimizerConfig.from_dict(a))
            return cls(
                suite=SuiteManifest.from_dict(d["suite"]),
                algorithms=tuple(algs),
                runs=int(d["runs"]),
                budget=Budget.from_dict(d["budget"]),
                master_seed=int(d["master_seed"]),
                paired_seeds=bool(d.get("paired_seeds", False)),
                output=d.get("output"),
            )
        except (KeyError, TypeError, ConfigError) as exc:
            raise ManifestError(f"invalid manifest: {exc}") from exc
        except ValueError as exc:
            raise ManifestError(f"invalid manifest: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        path = Path(path)
        if not path.exists():
            raise ManifestError(f"manifest not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(d)


def run_seed(master_seed, algorithm_id, function_id, run, paired=False) -> int:
    if paired:
        return derive_seed(master_seed, function_id, run)
    return derive_seed(master_seed, algorithm_id, function_id, run)


def _execute(task) -> RunRecord:
    spec, config, budget, run, seed, timed = task
    start = time.perf_counter()
    try:
        trace = run_optimizer(spec, config, budget, seed)
        # the tracker floors errors at 0; anything clearly below the optimum is a defect
        if trace.best_value - spec.bias < -ERROR_SLACK:
            raise EvaluationError(f"value {trace.best_value} lies below the known optimum {spec.bias}")
        errors = {cp: max(float(e), 0.0) for cp, e in trace.best_error_at.items()}
        failed, diag = False, ""
    except EvaluationError as exc:
        errors = {cp: float("nan") for cp in budget.checkpoints}
        failed, diag = True, str(exc)
    wall = (time.perf_counter() - start) * 1000.0 if timed else 0.0
    return RunRecord(config.id, spec.id, spec.dimension, run, seed, errors, wall, failed, diag,
                     tuple(sorted(spec.tags)))


def _sort_key(r: RunRecord):
    return (r.algorithm, r.function, r.run)


def default_workers() -> int:
    return int(os.environ.get("FAIRBENCH_WORKERS", "1"))


def run_tasks(specs, configs, budget, runs, master_seed, paired=False, workers=None, timed=False):
    tasks = [
        (spec, cfg, budget, k, run_seed(master_seed, cfg.id, spec.id, k, paired), timed)
        for cfg in configs
        for spec in specs
        for k in range(runs)
    ]
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        records = [_execute(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_execute, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return sorted(records, key=_sort_key)


def run_experiment(plan: ExperimentPlan, workers=None) -> list[RunRecord]:
    """Execute every (algorithm, function, run) of the plan.

    Output order is canonical, so the result does not depend on ``workers``.
    """
    specs = plan.suite.build()
    return run_tasks(specs, plan.algorithms, plan.budget, plan.runs, plan.master_seed,
                     plan.paired_seeds, workers, plan.record_wall_time)


# -- CSV ------------------------------------------------------------------


def _fmt(v: float) -> str:
    return "nan" if v != v else f"{v:.17g}"


def export_csv(records, path) -> None:
    records = sorted(records, key=_sort_key)
    if not records:
        raise ValueError("nothing to export")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            for cp in sorted(r.errors):
                w.writerow([r.algorithm, r.function, r.dimension, r.run, cp, _fmt(r.errors[cp]), r.seed,
                            _fmt(r.wall_ms)])


def ingest_csv(path) -> list[RunRecord]:
    groups: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvSchemaError(f"{path}: empty file") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise CsvSchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        col = {c: header.index(c) for c in CSV_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvSchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            vals = {}
            for name, conv in (("dimension", int), ("run", int), ("evaluations", int), ("error", float),
                               ("seed", int), ("wall_ms", float)):
                try:
                    vals[name] = conv(row[col[name]])
                except ValueError:
                    raise CsvSchemaError(
                        f"{path}:{lineno}: column '{name}' has invalid value {row[col[name]]!r}"
                    ) from None
            key = (row[col["algorithm"]], row[col["function"]], vals["run"])
            g = groups.setdefault(key, {"dimension": vals["dimension"], "seed": vals["seed"],
                                        "wall_ms": vals["wall_ms"], "errors": {}})
            if vals["evaluations"] in g["errors"]:
                raise DuplicateRecordError(
                    f"{path}:{lineno}: duplicate entry for {key} at {vals['evaluations']} evaluations"
                )
            g["errors"][vals["evaluations"]] = vals["error"]
    records = []
    for (alg, fn, run), g in groups.items():
        failed = any(v != v for v in g["errors"].values())
        records.append(RunRecord(alg, fn, g["dimension"], run, g["seed"], g["errors"], g["wall_ms"], failed))
    return sorted(records, key=_sort_key)


# -- ablation ---------------------------------------------------------------


@dataclass(frozen=True)
class AblationResult:
    matrix: ResultsMatrix
    wins: np.ndarray
    columns: tuple[dict, ...]
    seeds: dict  # (function, run) -> seed shared by every column
    records: tuple = ()


def toggle_combinations(grid: dict) -> list[dict]:
    if not grid:
        raise ConfigError("toggle grid is empty")
    names = list(grid)
    return [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]


def column_id(toggles: dict) -> str:
    return ",".join(f"{k}={v}" for k, v in toggles.items())


def ablation(base: OptimizerConfig, grid: dict, suite, budget: Budget, runs: int, master_seed: int = 0,
             workers=None, summary="median") -> AblationResult:
    """Run one column per toggle combination on shared seeds.

    ``suite`` is a list of FunctionSpec or a SuiteManifest.  Every column uses
    the same seed for a given (function, run), so columns can be compared
    with paired tests.
    """
    specs = suite.build() if isinstance(suite, SuiteManifest) else list(suite)
    combos = toggle_combinations(grid)
    configs = [replace(base, id=column_id(c), **c) for c in combos]
    records = run_tasks(specs, configs, budget, runs, master_seed, paired=True, workers=workers)
    final = budget.max_evaluations
    by_key = {(r.algorithm, r.function, r.run): r for r in records}
    cells = np.array([[[by_key[(c.id, s.id, k)].errors[final] for k in range(runs)] for s in specs]
                      for c in configs])
    tags = {s.id: tuple(sorted(s.tags)) for s in specs}
    matrix = ResultsMatrix(tuple(c.id for c in configs), tuple(s.id for s in specs), cells, function_tags=tags)
    seeds = {(s.id, k): run_seed(master_seed, None, s.id, k, paired=True) for s in specs for k in range(runs)}
    wins = count_wins(matrix.summary(summary))
    return AblationResult(matrix, wins, tuple(combos), seeds, tuple(records))


# -- structural bias ----------------------------------------------------------


@dataclass(frozen=True)
class BiasProbeReport:
    optimizer: str
    dimension: int
    runs: int
    p_values: tuple[float, ...]
    alpha: float
    rejection_fraction: float
    mean_center_distance: float
    uniform_center_distance: float
    final_positions: np.ndarray = field(repr=False, compare=False, default=None)
    warnings: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.rejection_fraction <= 0.10

    def to_dict(self) -> dict:
        return {
            "optimizer": self.optimizer,
            "dimension": self.dimension,
            "runs": self.runs,
            "alpha": self.alpha,
            "p_values": [float(p) for p in self.p_values],
            "rejection_fraction": self.rejection_fraction,
            "mean_center_distance": self.mean_center_distance,
            "uniform_center_distance": self.uniform_center_distance,
            "verdict": "pass" if self.passed else "fail",
            "warnings": list(self.warnings),
        }


def _uniform_center_distance(dimension: int) -> float:
    rng = np.random.default_rng(derive_seed("uniform-center-distance", dimension))
    u = rng.random((20000, dimension))
    return float(np.mean(np.linalg.norm(u - 0.5, axis=1)) / np.sqrt(dimension))


class _NoiseObjective:
    """Fresh U(0, 1) value for every evaluation; carries no landscape information."""

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)

    def __call__(self, X):
        X = np.asarray(X)
        return self.rng.random(X.shape[:-1]) if X.ndim > 1 else float(self.rng.random())


def bias_probe(config: OptimizerConfig, dimension: int, runs: int, budget, master_seed: int = 0,
               alpha: float = 0.05) -> BiasProbeReport:
    """Structural-bias probe: optimize pure noise and test where the finals land.

    Under no bias the final best positions are uniform in the box, so each
    coordinate is tested against U(0, 1) with a Kolmogorov-Smirnov test.
    """
    if isinstance(budget, int):
        if budget < 1:
            raise ConfigError("bias probe requires at least one evaluation per run")
        budget = Budget(budget)
    notes = []
    if runs < 30:
        msg = f"bias probe with only {runs} runs has little power; 30 or more are recommended"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    base = make_function("sphere", dimension, id="uniform_noise")
    spec = replace(base, lower=np.zeros(dimension), upper=np.ones(dimension),
                   optimum_location=np.full(dimension, 0.5), tags=frozenset())
    finals = np.empty((runs, dimension))
    for k in range(runs):
        seed = derive_seed(master_seed, "bias-probe", config.id, dimension, k)
        trace = run_optimizer(spec, config, budget, seed, objective=_NoiseObjective(derive_seed(seed, "noise")))
        finals[k] = trace.final_best
    pvals = tuple(float(sps.kstest(finals[:, j], "uniform").pvalue) for j in range(dimension))
    frac = float(np.mean(np.asarray(pvals) < alpha))
    dist = float(np.mean(np.linalg.norm(finals - 0.5, axis=1)) / np.sqrt(dimension))
    return BiasProbeReport(config.id, dimension, runs, pvals, alpha, frac, dist,
                           _uniform_center_distance(dimension), finals, tuple(notes))
