"""Differential evolution: classic DE/rand/1/bin and SHADE.

Both are written as resumable engines so the hybrid can hand them a slice of
the budget at a time.
"""

from __future__ import annotations

import numpy as np

from .base import Budget, OptimizerConfig, RunTrace, Tracker, reflect


def _distinct_indices(rng, n, count):
    """For each row i, ``count`` distinct indices from range(n) excluding i."""
    keys = rng.random((n, n))
    np.fill_diagonal(keys, np.inf)
    return np.argsort(keys, axis=1)[:, :count]


def binomial_crossover(rng, target, mutant, cr):
    n, d = target.shape
    cr = np.broadcast_to(np.asarray(cr, dtype=float).reshape(-1, 1) if np.ndim(cr) else cr, (n, 1))
    mask = rng.random((n, d)) < cr
    mask[np.arange(n), rng.integers(0, d, n)] = True  # at least one mutant coordinate
    return np.where(mask, mutant, target)


class DEEngine:
    """DE/rand/1/bin with greedy one-to-one replacement."""

    def __init__(self, config: OptimizerConfig, tracker: Tracker, rng: np.random.Generator):
        self.config = config
        self.tracker = tracker
        self.rng = rng
        self.generation = 0
        self.pop = None
        self.fit = None

    def initialize(self, population=None):
        t = self.tracker
        if population is None:
            population = self.rng.uniform(t.lower, t.upper, (self.config.population_size, t.lower.size))
        fit = t.evaluate(population)
        self.pop, self.fit = population[: fit.size], fit
        self.on_reset()

    def on_reset(self):
        pass

    @property
    def ready(self) -> bool:
        return self.pop is not None and self.pop.shape[0] >= 4

    def run(self, evaluations: int):
        """Advance whole generations until ``evaluations`` are spent or the run ends."""
        t = self.tracker
        stop_at = t.used + evaluations
        if self.pop is None:
            self.initialize()
        while not t.done and t.used < stop_at and self.ready:
            self.step()
            self.generation += 1
            t.record_diversity(self.generation, self.pop)

    def inject(self, x, fx):
        """Replace the worst individual when ``x`` improves on it."""
        worst = int(np.argmax(self.fit))
        if fx < self.fit[worst]:
            self.pop[worst] = x
            self.fit[worst] = fx

    def step(self):
        cfg, rng, t = self.config, self.rng, self.tracker
        n = self.pop.shape[0]
        r = _distinct_indices(rng, n, 3)
        mutant = self.pop[r[:, 0]] + cfg.F * (self.pop[r[:, 1]] - self.pop[r[:, 2]])
        trial = binomial_crossover(rng, self.pop, mutant, cfg.CR)
        trial = reflect(trial, t.lower, t.upper)
        f = t.evaluate(trial)
        m = f.size
        better = f <= self.fit[:m]
        idx = np.flatnonzero(better)
        self.pop[idx] = trial[idx]
        self.fit[idx] = f[idx]


def update_memory(m_f, m_cr, k, s_f, s_cr, delta):
    """SHADE success-history update of slot ``k``.

    F takes the improvement-weighted Lehmer mean, CR the weighted arithmetic
    mean.  Returns the next slot index; with no successes nothing changes.
    """
    s_f = np.asarray(s_f, dtype=float)
    if s_f.size == 0:
        return k
    w = np.asarray(delta, dtype=float)
    w = w / w.sum() if w.sum() > 0 else np.full(s_f.size, 1.0 / s_f.size)
    m_f[k] = np.sum(w * s_f * s_f) / np.sum(w * s_f)
    m_cr[k] = np.sum(w * np.asarray(s_cr, dtype=float))
    return (k + 1) % m_f.size


class SHADEEngine(DEEngine):
    """Success-history adaptive DE with current-to-pbest/1 and an external archive."""

    def on_reset(self):
        h = self.config.memory_size
        self.m_f = np.full(h, 0.5)
        self.m_cr = np.full(h, 0.5)
        self.k = 0
        self.archive = np.empty((0, self.tracker.lower.size))

    def _sample_params(self, n):
        rng = self.rng
        slot = rng.integers(0, self.m_f.size, n)
        cr = np.clip(rng.normal(self.m_cr[slot], 0.1), 0.0, 1.0)
        f = np.zeros(n)
        todo = np.arange(n)
        while todo.size:
            draw = self.m_f[slot[todo]] + 0.1 * rng.standard_cauchy(todo.size)
            ok = draw > 0
            f[todo[ok]] = np.minimum(draw[ok], 1.0)
            todo = todo[~ok]
        return f, cr

    def step(self):
        cfg, rng, t = self.config, self.rng, self.tracker
        n, d = self.pop.shape
        f, cr = self._sample_params(n)
        n_best = max(2, int(round(cfg.p_best * n)))
        top = np.argsort(self.fit, kind="stable")[:n_best]
        pbest = self.pop[top[rng.integers(0, n_best, n)]]
        r1 = _distinct_indices(rng, n, 1)[:, 0]
        union = np.vstack([self.pop, self.archive]) if self.archive.size else self.pop
        r2 = rng.integers(0, union.shape[0], n)
        clash = (r2 == r1) | (r2 == np.arange(n))
        while np.any(clash):
            r2[clash] = rng.integers(0, union.shape[0], int(clash.sum()))
            clash = (r2 == r1) | (r2 == np.arange(n))
        fc = f[:, None]
        mutant = self.pop + fc * (pbest - self.pop) + fc * (self.pop[r1] - union[r2])
        trial = reflect(binomial_crossover(rng, self.pop, mutant, cr), t.lower, t.upper)
        ft = t.evaluate(trial)
        m = ft.size
        old = self.fit[:m]
        improved = np.flatnonzero(ft < old)
        kept = np.flatnonzero(ft <= old)

        if improved.size:
            self.archive = np.vstack([self.archive, self.pop[improved]])
            cap = int(round(cfg.archive_rate * n))
            if self.archive.shape[0] > cap:
                keep = rng.choice(self.archive.shape[0], cap, replace=False)
                self.archive = self.archive[np.sort(keep)]
        delta = np.abs(old[improved] - ft[improved])
        self.k = update_memory(self.m_f, self.m_cr, self.k, f[improved], cr[improved], delta)
        self.pop[kept] = trial[kept]
        self.fit[kept] = ft[kept]


def _run_engine(engine_cls, spec, config, budget, seed, objective=None) -> RunTrace:
    from . import make_tracker

    tracker = make_tracker(spec, budget, seed, objective)
    rng = np.random.default_rng(seed)
    engine = engine_cls(config, tracker, rng)
    engine.run(budget.max_evaluations)
    return tracker.trace()


def de_rand_1_bin(spec, config: OptimizerConfig, budget: Budget, seed: int, objective=None) -> RunTrace:
    return _run_engine(DEEngine, spec, config, budget, seed, objective)


def shade(spec, config: OptimizerConfig, budget: Budget, seed: int, objective=None) -> RunTrace:
    return _run_engine(SHADEEngine, spec, config, budget, seed, objective)
