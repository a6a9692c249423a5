"""Racing-based parameter tuning (F-race with iterated resampling).

A race evaluates every surviving candidate on the same instance/seed block,
and after a minimum number of blocks drops candidates that the rank-based
comparison workflow declares significantly worse than the best-ranked one.
``iterated_race`` repeats races, resampling new candidates around the
survivors with a shrinking spread.
"""

from __future__ import annotations

import math
import shlex
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .benchmark import derive_seed
from .stats import CorrectionMethod, average_ranks, rank_rows
from .workflow import ComparisonConfig, ResultsMatrix, compare_algorithms

REAL, INTEGER, CATEGORICAL = "real", "integer", "categorical"


class TuningError(ValueError):
    pass


class TuningBudgetError(TuningError):
    def __init__(self, minimum: int, budget: int):
        super().__init__(f"budget {budget} is below the minimum of {minimum} evaluations")
        self.minimum = minimum


class EvaluationFailure(RuntimeError):
    """A single evaluation failed; the candidate is eliminated."""


class TargetProtocolError(TuningError):
    """The external target produced output that is not a single real number."""


@dataclass(frozen=True)
class Parameter:
    name: str
    kind: str
    low: float | None = None
    high: float | None = None
    options: tuple = ()

    def __post_init__(self):
        if self.kind in (REAL, INTEGER):
            if self.low is None or self.high is None or not self.low < self.high:
                raise TuningError(f"parameter {self.name!r} needs low < high")
        elif self.kind == CATEGORICAL:
            if not self.options:
                raise TuningError(f"parameter {self.name!r} needs at least one option")
        else:
            raise TuningError(f"unknown parameter kind {self.kind!r}")

    def contains(self, value) -> bool:
        if self.kind == CATEGORICAL:
            return value in self.options
        if self.kind == INTEGER and int(value) != value:
            return False
        return self.low <= value <= self.high


@dataclass(frozen=True)
class ParamSpace:
    parameters: tuple[Parameter, ...]

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise TuningError("parameter names must be unique")

    @classmethod
    def from_dict(cls, d) -> "ParamSpace":
        items = d["parameters"] if isinstance(d, dict) else d
        params = []
        for p in items:
            kind = p.get("type", p.get("kind"))
            params.append(Parameter(p["name"], kind, p.get("low"), p.get("high"), tuple(p.get("options", ()))))
        return cls(tuple(params))


@dataclass(frozen=True)
class Candidate:
    id: str
    assignment: dict

    def to_dict(self) -> dict:
        return {"id": self.id, "assignment": self.assignment}


def _draw(p: Parameter, rng, parent=None, spread=None):
    if p.kind == CATEGORICAL:
        if parent is not None and spread is not None and rng.random() >= spread:
            return parent
        return p.options[int(rng.integers(len(p.options)))]
    if parent is None:
        v = rng.uniform(p.low, p.high)
    else:
        sd = spread * (p.high - p.low)
        # truncated normal by rejection; the clip only guards pathological spreads
        for _ in range(100):
            v = rng.normal(parent, sd)
            if p.low <= v <= p.high:
                break
        v = min(max(v, p.low), p.high)
    if p.kind == INTEGER:
        return int(min(max(round(v), p.low), p.high))
    return float(v)


def sample_candidates(space: ParamSpace, n: int, seed: int, parents=None, spread=None, prefix="c") -> list[Candidate]:
    """Uniform sampling, or truncated-normal sampling around ``parents``.

    ``spread`` is the standard deviation as a fraction of each range; for
    categorical parameters it is the probability of resampling instead of
    inheriting the parent's value.
    """
    if n < 1:
        raise TuningError("n must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        parent = None
        if parents:
            parent = parents[int(rng.integers(len(parents)))].assignment
        a = {p.name: _draw(p, rng, None if parent is None else parent[p.name], spread) for p in space.parameters}
        out.append(Candidate(f"{prefix}{i}", a))
    return out


@dataclass
class RaceState:
    alive: list
    results: dict
    instances_consumed: int = 0
    evaluations: int = 0
    eliminations: list = field(default_factory=list)
    failed: list = field(default_factory=list)

    def best(self) -> Candidate:
        if self.instances_consumed == 0 or len(self.alive) == 1:
            return self.alive[0]
        m = np.array([self.results[c.id] for c in self.alive])  # alive x instances
        return self.alive[int(np.argmin(average_ranks(rank_rows(m.T))))]

    def audit(self) -> dict:
        return {
            "alive": [c.id for c in self.alive],
            "instances_consumed": self.instances_consumed,
            "evaluations": self.evaluations,
            "eliminations": list(self.eliminations),
            "failed": list(self.failed),
        }


def race(candidates, instances, evaluate, alpha=0.05, min_instances=5, budget=None,
         correction=CorrectionMethod.HOLM) -> RaceState:
    """Race ``candidates`` over ``instances``, an iterable of (instance_id, seed).

    ``evaluate(assignment, instance_id, seed)`` returns the error (lower is
    better).  Raising :class:`EvaluationFailure` eliminates the candidate.
    Elimination tests run only once ``min_instances`` blocks are complete.
    """
    if min_instances < 2:
        raise TuningError("min_instances must be >= 2")
    state = RaceState(alive=list(candidates), results={c.id: [] for c in candidates})
    if not state.alive:
        raise TuningError("race needs at least one candidate")
    if len(state.alive) == 1:
        return state
    config = ComparisonConfig(alpha=alpha, correction=correction, friedman_method="auto")
    for block, (instance, seed) in enumerate(instances):
        if len(state.alive) <= 1:
            break
        if budget is not None and state.evaluations + len(state.alive) > budget:
            break
        survivors = []
        for c in state.alive:
            state.evaluations += 1
            try:
                v = float(evaluate(c.assignment, instance, seed))
                if not math.isfinite(v):
                    raise EvaluationFailure(f"non-finite result {v}")
            except EvaluationFailure as exc:
                state.failed.append(c.id)
                state.eliminations.append(
                    {"candidate": c.id, "block": block, "test": "evaluation failure", "note": str(exc)}
                )
                continue
            state.results[c.id].append(v)
            survivors.append(c)
        # a failed candidate drops out; earlier blocks of the others stay aligned
        state.alive = survivors
        state.instances_consumed = block + 1
        if len(state.alive) < 2 or state.instances_consumed < min_instances:
            continue
        ids = tuple(c.id for c in state.alive)
        cells = np.array([state.results[i] for i in ids])
        matrix = ResultsMatrix(ids, tuple(f"i{j}" for j in range(cells.shape[1])), cells)
        report = compare_algorithms(matrix, config)
        losers = {d.opponent: d for d in report.pairwise if d.significant}
        if not losers:
            continue
        omnibus = "friedman" if report.friedman is not None else "direct"
        for cid, d in losers.items():
            state.eliminations.append({
                "candidate": cid,
                "block": block,
                "test": f"{omnibus}+{d.test_used}",
                "omnibus_p": None if report.friedman is None else report.friedman.p_value,
                "versus": report.control,
                "raw_p": d.raw_p,
                "adjusted_p": d.adjusted_p,
            })
        state.alive = [c for c in state.alive if c.id not in losers]
    return state


def instance_stream(instances, seed):
    """Endless (instance_id, seed) blocks cycling through ``instances``."""
    i = 0
    while True:
        yield instances[i % len(instances)], derive_seed(seed, "instance", i)
        i += 1


def _n_rounds(space: ParamSpace) -> int:
    return max(3, 2 + int(math.ceil(math.log2(max(1, len(space.parameters))))))


def minimum_budget(space: ParamSpace, min_instances=5) -> int:
    return _n_rounds(space) * 2 * min_instances


def iterated_race(space: ParamSpace, evaluate, total_budget: int, seed: int = 0, instances=("default",),
                  min_instances=5, alpha=0.05, initial_spread=0.3, max_candidates=32):
    """Iterated racing; returns ``(best_candidate, audit)``.

    Each round spends an equal share of what is left, seeds new candidates
    around the previous survivors and halves the sampling spread.
    """
    rounds = _n_rounds(space)
    minimum = minimum_budget(space, min_instances)
    if total_budget < minimum:
        raise TuningBudgetError(minimum, total_budget)
    used = 0
    elites: list[Candidate] = []
    spread = initial_spread
    audit = {"rounds": [], "budget": total_budget, "seed": seed}
    counter = 0
    best = None
    for j in range(rounds):
        round_budget = (total_budget - used) // (rounds - j)
        n = min(max_candidates, max(2, round_budget // (min_instances + min(5, j))))
        n_new = max(1, n - len(elites))
        fresh = sample_candidates(space, n_new, derive_seed(seed, "round", j),
                                  parents=elites or None, spread=spread if elites else None, prefix="tmp")
        named = []
        for c in fresh:
            named.append(Candidate(f"c{counter}", c.assignment))
            counter += 1
        pool = elites + named
        state = race(pool, instance_stream(list(instances), seed), evaluate, alpha, min_instances, round_budget)
        used += state.evaluations
        if not state.alive:
            raise TuningError(f"every candidate failed in round {j}; see the target's diagnostics")
        leader = state.best()
        ranked = [leader] + [c for c in state.alive if c is not leader]
        best = ranked[0]
        elites = ranked[: max(1, min(len(ranked), n // 2))]
        audit["rounds"].append({
            "round": j,
            "spread": spread if j else None,
            "candidates": [c.to_dict() for c in pool],
            "race": state.audit(),
            "best": best.id,
        })
        spread /= 2.0
    audit["evaluations"] = used
    audit["best"] = best.to_dict()
    return best, audit


def command_evaluator(command, timeout=None):
    """Evaluate candidates by running an external target program.

    The program is called as ``command --instance ID --seed N --param k=v ...``
    and must print one real number.  A non-zero exit status is a failed
    evaluation; unparsable output is a protocol error.
    """
    argv = shlex.split(command) if isinstance(command, str) else list(command)

    def evaluate(assignment, instance, seed):
        args = argv + ["--instance", str(instance), "--seed", str(seed)]
        for k, v in assignment.items():
            args += ["--param", f"{k}={v}"]
        proc = subprocess.run(args, capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0:
            raise EvaluationFailure(f"exit status {proc.returncode}: {proc.stderr.strip()[:200]}")
        out = proc.stdout.strip()
        try:
            return float(out)
        except ValueError:
            raise TargetProtocolError(f"target output is not a single real number: {out[:200]!r}") from None

    return evaluate


# -- builtin targets ------------------------------------------------------------


def quadratic_target(assignment, instance, seed):
    """Rigged target: error ``w * (F - 0.5)**2`` with an instance weight ``w`` in [1, 2).

    F = 0.5 is optimal on every instance by construction; other parameters
    are ignored.
    """
    if "F" not in assignment:
        raise TuningError("the quadratic target needs a parameter named 'F'")
    w = 1.0 + (derive_seed(instance, seed) % 1000) / 1000.0
    return w * (float(assignment["F"]) - 0.5) ** 2


def de_target(assignment, instance, seed, dimension=5, evaluations=3000):
    """Run DE/rand/1/bin with the assignment on catalog function ``instance``."""
    from .benchmark import CATALOG, build_suite
    from .optimizers import Budget, ConfigError, OptimizerConfig, run_optimizer

    name = instance if instance in CATALOG else "sphere"
    spec = build_suite([name], dimension, "shift", master_seed=0)[0]
    try:
        config = OptimizerConfig.from_dict({"algorithm": "de", **assignment})
    except (ConfigError, TypeError) as exc:
        raise EvaluationFailure(str(exc)) from exc
    return run_optimizer(spec, config, Budget(evaluations), seed).best_error_at[evaluations]


BUILTIN_TARGETS = {
    "quadratic": (quadratic_target, ("q0", "q1", "q2")),
    "de": (de_target, ("sphere", "rastrigin", "ackley", "griewank")),
}
