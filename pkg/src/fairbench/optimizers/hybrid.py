"""Iterated local search hybrid: population phase, MTS-LS1 phase, restarts.

The component toggles (``de_engine`` and ``restart``) exist so that every
combination can be run as a separate ablation column.  The restart rule and
its thresholds are working defaults, not a reproduction of any published
hybrid's exact rules.
"""

from __future__ import annotations

import numpy as np

from .base import Budget, OptimizerConfig, RunTrace, reflect
from .de import DEEngine, SHADEEngine
from .local import LSState, mts_ls1

ENGINES = {"de": DEEngine, "shade": SHADEEngine}


def ils_hybrid(spec, config: OptimizerConfig, budget: Budget, seed: int, objective=None) -> RunTrace:
    from . import make_tracker

    t = make_tracker(spec, budget, seed, objective)
    rng = np.random.default_rng(seed)
    engine = ENGINES[config.de_engine](config, t, rng)
    engine.initialize()
    pop_evals = max(1, int(round(config.cycle_evaluations * config.population_fraction)))
    ls_evals = max(1, config.cycle_evaluations - pop_evals)
    ls_state = LSState.initial(t.lower, t.upper, config.ls_initial_step)
    width = t.upper - t.lower

    while not t.done:
        before = t.best_error
        engine.run(pop_evals)
        if t.done:
            break
        x, fx, ls_state = mts_ls1(t, t.best_x, t.best_value, ls_evals, ls_state, rng, config.ls_min_step)
        engine.inject(x, fx)
        if ls_state.stagnant:
            ls_state = LSState.initial(t.lower, t.upper, config.ls_initial_step)
        if t.done or config.restart == "off":
            continue
        ratio = (before - t.best_error) / before if before > 0 else 0.0
        if ratio >= config.restart_threshold:
            continue
        ls_state = LSState.initial(t.lower, t.upper, config.ls_initial_step)
        if config.restart == "new":
            # fresh population in a small box around a perturbed copy of the best
            n = config.population_size
            centre = reflect(t.best_x + rng.uniform(-1, 1, t.lower.size) * config.restart_perturbation * width,
                             t.lower, t.upper)
            pop = centre + rng.uniform(-1, 1, (n, t.lower.size)) * config.restart_perturbation * width
            pop = reflect(pop, t.lower, t.upper)
            pop[0] = t.best_x
            engine.initialize(pop)
    return t.trace()
