"""MTS-LS1 coordinate-wise local search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Budget, OptimizerConfig, RunTrace, Tracker, reflect_scalar


@dataclass
class LSState:
    step: np.ndarray
    stagnant: bool = False
    improved_last_sweep: bool = True

    @classmethod
    def initial(cls, lower, upper, fraction=0.5) -> "LSState":
        return cls(step=fraction * (np.asarray(upper) - np.asarray(lower)))


def mts_ls1(tracker: Tracker, x, fx: float, evaluations: int, state: LSState, rng, min_step=1e-15):
    """Improve ``x`` coordinate by coordinate for at most ``evaluations`` calls.

    Each coordinate first tries ``x_i - step_i``; if that does not improve,
    ``x_i + step_i / 2`` is tried and the coordinate is restored on failure.
    When a whole sweep brings no improvement the steps are halved.  Once every
    step falls below ``min_step`` the search stops and flags stagnation.

    Returns ``(x, fx, state)``; the returned point is never worse than the input.
    """
    x = np.array(x, dtype=float)
    lower, upper = tracker.lower, tracker.upper
    stop_at = tracker.used + evaluations
    if evaluations <= 0:
        return x, fx, state
    while tracker.used < stop_at and not tracker.done:
        if not state.improved_last_sweep:
            state.step = state.step / 2.0
        if np.all(state.step < min_step * (upper - lower)):
            state.stagnant = True
            break
        state.improved_last_sweep = False
        step, lo, hi = state.step.tolist(), lower.tolist(), upper.tolist()
        for i in rng.permutation(x.size).tolist():
            if tracker.used >= stop_at or tracker.done:
                break
            orig = x[i]
            x[i] = reflect_scalar(orig - step[i], lo[i], hi[i])
            f = tracker.evaluate_one(x)
            if f < fx:
                fx = f
                state.improved_last_sweep = True
                continue
            x[i] = orig
            if tracker.used >= stop_at or tracker.done:
                break
            x[i] = reflect_scalar(orig + 0.5 * step[i], lo[i], hi[i])
            f = tracker.evaluate_one(x)
            if f < fx:
                fx = f
                state.improved_last_sweep = True
            else:
                x[i] = orig
    return x, fx, state


def mts_ls1_search(spec, config: OptimizerConfig, budget: Budget, seed: int, objective=None) -> RunTrace:
    """Stand-alone MTS-LS1 from a random start, resetting the step on stagnation."""
    from . import make_tracker

    t = make_tracker(spec, budget, seed, objective)
    rng = np.random.default_rng(seed)
    x = rng.uniform(t.lower, t.upper)
    fx = t.evaluate_one(x)
    state = LSState.initial(t.lower, t.upper, config.ls_initial_step)
    while not t.done:
        x, fx, state = mts_ls1(t, x, fx, t.remaining, state, rng, config.ls_min_step)
        if state.stagnant:
            state = LSState.initial(t.lower, t.upper, 0.4)
    return t.trace()
