"""Budget, configuration and run-trace types plus the evaluation tracker."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

DE_ENGINES = ("de", "shade")
RESTART_MODES = ("old", "new", "off")


class ConfigError(ValueError):
    pass


class EvaluationError(RuntimeError):
    """The objective returned a non-finite value."""


@dataclass(frozen=True)
class Budget:
    max_evaluations: int
    checkpoints: tuple[int, ...] = ()
    target_error: float = 0.0  # a run may stop once its best error is <= this

    def __post_init__(self):
        if self.max_evaluations < 1:
            raise ConfigError("max_evaluations must be positive")
        cps = tuple(int(c) for c in self.checkpoints) or (self.max_evaluations,)
        if any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
            raise ConfigError("checkpoints must be positive and strictly ascending")
        if cps[-1] != self.max_evaluations:
            raise ConfigError("last checkpoint must equal max_evaluations")
        object.__setattr__(self, "checkpoints", cps)
        if not self.target_error >= 0:
            raise ConfigError("target_error must be >= 0")

    @classmethod
    def from_fractions(cls, max_evaluations: int, fractions=(0.01, 0.1, 1.0)) -> "Budget":
        cps = sorted({max(1, int(round(f * max_evaluations))) for f in fractions})
        return cls(max_evaluations, tuple(cps))

    @classmethod
    def every_tenth(cls, max_evaluations: int) -> "Budget":
        return cls.from_fractions(max_evaluations, [i / 10 for i in range(1, 11)])

    def to_dict(self) -> dict:
        d = {"max_evaluations": self.max_evaluations, "checkpoints": list(self.checkpoints)}
        if self.target_error:
            d["target_error"] = self.target_error
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Budget":
        return cls(int(d["max_evaluations"]), tuple(d.get("checkpoints") or ()), float(d.get("target_error", 0.0)))


@dataclass(frozen=True)
class OptimizerConfig:
    """Everything needed to reproduce an optimizer, including ablation toggles.

    ``algorithm`` is one of the keys of :data:`fairbench.optimizers.ALGORITHMS`;
    ``id`` names the configured variant in results tables and defaults to it.
    """

    algorithm: str
    id: str | None = None
    population_size: int = 50
    F: float = 0.5
    CR: float = 0.9
    memory_size: int = 10
    archive_rate: float = 1.0
    p_best: float = 0.1
    ls_initial_step: float = 0.5
    ls_min_step: float = 1e-15
    restart_threshold: float = 0.05
    restart_perturbation: float = 0.1
    cycle_evaluations: int = 5000
    population_fraction: float = 0.9
    de_engine: str = "shade"
    restart: str = "new"

    def __post_init__(self):
        if self.id is None:
            object.__setattr__(self, "id", self.algorithm)
        if self.algorithm in ("de", "shade", "ils_hybrid") and self.population_size < 4:
            raise ConfigError("DE-family algorithms need population_size >= 4")
        if not 0.0 <= self.F <= 2.0:
            raise ConfigError(f"F={self.F} outside [0, 2]")
        if not 0.0 <= self.CR <= 1.0:
            raise ConfigError(f"CR={self.CR} outside [0, 1]")
        if self.memory_size < 1:
            raise ConfigError("memory_size must be >= 1")
        if not 0.0 < self.p_best <= 1.0:
            raise ConfigError("p_best must lie in (0, 1]")
        if self.archive_rate < 0:
            raise ConfigError("archive_rate must be >= 0")
        if not 0.0 < self.population_fraction < 1.0:
            raise ConfigError("population_fraction must lie in (0, 1)")
        if self.cycle_evaluations < 2:
            raise ConfigError("cycle_evaluations must be >= 2")
        if self.de_engine not in DE_ENGINES:
            raise ConfigError(f"de_engine must be one of {DE_ENGINES}")
        if self.restart not in RESTART_MODES:
            raise ConfigError(f"restart must be one of {RESTART_MODES}")
        if self.ls_initial_step <= 0 or self.ls_min_step <= 0:
            raise ConfigError("local-search steps must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown optimizer config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class RunTrace:
    best_error_at: dict[int, float]
    final_best: np.ndarray
    diversity_at: dict[int, float] = field(default_factory=dict)
    evaluations_used: int = 0
    best_value: float = float("inf")


def reflect(x, lower, upper):
    """Fold coordinates back into [lower, upper] by mirror reflection."""
    width = upper - lower
    y = np.mod(x - lower, 2.0 * width)
    y = np.where(y > width, 2.0 * width - y, y)
    return lower + y


def reflect_scalar(v: float, lo: float, hi: float) -> float:
    w = hi - lo
    y = math.fmod(v - lo, 2.0 * w)
    if y < 0:
        y += 2.0 * w
    return lo + (2.0 * w - y if y > w else y)


def diversity(population, lower, upper) -> float:
    """Mean distance to the centroid, relative to the box diagonal."""
    pop = np.atleast_2d(np.asarray(population, dtype=float))
    if pop.shape[0] == 0:
        raise ValueError("population is empty")
    centroid = pop.mean(axis=0)
    diag = float(np.linalg.norm(np.asarray(upper) - np.asarray(lower)))
    return float(np.mean(np.linalg.norm(pop - centroid, axis=1)) / diag)


class Tracker:
    """Counts evaluations, keeps the best-so-far and records checkpoint errors.

    ``objective`` maps an (m, D) batch to m values.  Batches that would exceed
    the budget are truncated, so callers must use the length of the returned
    array.
    """

    def __init__(self, objective, budget: Budget, bias: float, lower, upper, stop_at_zero=True):
        self.objective = objective
        self.budget = budget
        self.bias = bias
        self.lower = lower
        self.upper = upper
        self.stop_at_zero = stop_at_zero
        self.used = 0
        self.best_value = np.inf
        self.best_x = None
        self.best_error_at: dict[int, float] = {}
        self.diversity_at: dict[int, float] = {}
        self._next_cp = 0

    @property
    def remaining(self) -> int:
        return self.budget.max_evaluations - self.used

    @property
    def best_error(self) -> float:
        return max(self.best_value - self.bias, 0.0)

    @property
    def done(self) -> bool:
        return self.remaining <= 0 or (
            self.stop_at_zero and self.best_value - self.bias <= self.budget.target_error
        )

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(X)[: max(self.remaining, 0)]
        if X.shape[0] == 0:
            return np.empty(0)
        if np.any(X < self.lower) or np.any(X > self.upper):
            raise EvaluationError("point outside the bounds reached the objective")
        vals = np.asarray(self.objective(X), dtype=float).reshape(X.shape[0])
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise EvaluationError(f"objective returned {vals[bad[0]]} at evaluation {self.used + bad[0] + 1}")
        cps = self.budget.checkpoints
        for i, v in enumerate(vals):
            if v < self.best_value:
                self.best_value = float(v)
                self.best_x = X[i].copy()
            self.used += 1
            if self._next_cp < len(cps) and self.used == cps[self._next_cp]:
                self.best_error_at[cps[self._next_cp]] = self.best_error
                self._next_cp += 1
        return vals

    def evaluate_one(self, x) -> float:
        # lean single-point path; local search calls this once per evaluation
        if self.remaining <= 0:
            raise EvaluationError("evaluation budget exhausted")
        if (x < self.lower).any() or (x > self.upper).any():
            raise EvaluationError("point outside the bounds reached the objective")
        v = float(self.objective(x))
        if not math.isfinite(v):
            raise EvaluationError(f"objective returned {v} at evaluation {self.used + 1}")
        if v < self.best_value:
            self.best_value = v
            self.best_x = x.copy()
        self.used += 1
        cps = self.budget.checkpoints
        if self._next_cp < len(cps) and self.used == cps[self._next_cp]:
            self.best_error_at[cps[self._next_cp]] = self.best_error
            self._next_cp += 1
        return v

    def record_diversity(self, generation: int, population) -> None:
        self.diversity_at[generation] = diversity(population, self.lower, self.upper)

    def trace(self) -> RunTrace:
        # a run that stops early (optimum reached) keeps its final best at later checkpoints
        for cp in self.budget.checkpoints[self._next_cp :]:
            self.best_error_at[cp] = self.best_error
        self._next_cp = len(self.budget.checkpoints)
        return RunTrace(
            best_error_at=dict(self.best_error_at),
            final_best=None if self.best_x is None else self.best_x.copy(),
            diversity_at=dict(self.diversity_at),
            evaluations_used=self.used,
            best_value=self.best_value,
        )
