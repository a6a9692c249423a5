"""Reference optimizers and the registry used by the experiment harness."""

from __future__ import annotations

import numpy as np

from ..benchmark import FunctionSpec, derive_seed
from .base import (
    Budget,
    ConfigError,
    EvaluationError,
    OptimizerConfig,
    RunTrace,
    Tracker,
    diversity,
    reflect,
)
from .de import DEEngine, SHADEEngine, binomial_crossover, de_rand_1_bin, shade, update_memory
from .hybrid import ils_hybrid
from .local import LSState, mts_ls1, mts_ls1_search


def make_tracker(spec: FunctionSpec, budget: Budget, seed: int, objective=None) -> Tracker:
    if objective is None:
        objective = spec.objective(derive_seed(seed, "noise"))
    return Tracker(
        objective,
        budget,
        spec.bias,
        spec.lower,
        spec.upper,
        stop_at_zero=spec.noise is None or spec.noise.magnitude == 0,
    )


def random_search(spec, config: OptimizerConfig | None, budget: Budget, seed: int, objective=None) -> RunTrace:
    t = make_tracker(spec, budget, seed, objective)
    rng = np.random.default_rng(seed)
    while not t.done:
        m = min(t.remaining, 1000)
        t.evaluate(rng.uniform(t.lower, t.upper, (m, spec.dimension)))
    return t.trace()


def center_pull(spec, config: OptimizerConfig | None, budget: Budget, seed: int, objective=None) -> RunTrace:
    """Deliberately biased test optimizer: every step contracts toward the box centre.

    It exists only to show that the structural-bias probe flags such behaviour.
    """
    t = make_tracker(spec, budget, seed, objective)
    rng = np.random.default_rng(seed)
    centre = (t.lower + t.upper) / 2.0
    x = rng.uniform(t.lower, t.upper)
    while not t.done:
        t.evaluate_one(x)
        x = centre + 0.5 * (x - centre) + rng.normal(0.0, 0.01, x.size) * (t.upper - t.lower)
        x = reflect(x, t.lower, t.upper)
    return t.trace()


ALGORITHMS = {
    "random_search": random_search,
    "de": de_rand_1_bin,
    "shade": shade,
    "mts_ls1": mts_ls1_search,
    "ils_hybrid": ils_hybrid,
    "center_pull": center_pull,
}


def run_optimizer(spec, config: OptimizerConfig, budget: Budget, seed: int, objective=None) -> RunTrace:
    try:
        algorithm = ALGORITHMS[config.algorithm]
    except KeyError:
        raise ConfigError(f"unknown algorithm {config.algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    return algorithm(spec, config, budget, seed, objective)


__all__ = [
    "ALGORITHMS",
    "Budget",
    "ConfigError",
    "DEEngine",
    "EvaluationError",
    "LSState",
    "OptimizerConfig",
    "RunTrace",
    "SHADEEngine",
    "Tracker",
    "binomial_crossover",
    "center_pull",
    "de_rand_1_bin",
    "diversity",
    "ils_hybrid",
    "make_tracker",
    "mts_ls1",
    "mts_ls1_search",
    "random_search",
    "reflect",
    "run_optimizer",
    "shade",
    "update_memory",
]
