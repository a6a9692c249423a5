import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairbench.tuner import (
    Candidate,
    EvaluationFailure,
    ParamSpace,
    Parameter,
    TargetProtocolError,
    TuningBudgetError,
    TuningError,
    command_evaluator,
    instance_stream,
    iterated_race,
    minimum_budget,
    quadratic_target,
    race,
    sample_candidates,
)

F_SPACE = ParamSpace.from_dict({"parameters": [{"name": "F", "type": "real", "low": 0.0, "high": 1.0}]})


class Log:
    """Evaluation function wrapper recording every call."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = []

    def __call__(self, assignment, instance, seed):
        self.calls.append((dict(assignment), instance, seed))
        return self.fn(assignment, instance, seed)


def test_space_invariants():
    with pytest.raises(TuningError):
        Parameter("x", "real", 1.0, 1.0)
    with pytest.raises(TuningError):
        Parameter("c", "categorical")
    with pytest.raises(TuningError):
        Parameter("x", "complex", 0, 1)
    with pytest.raises(TuningError, match="unique"):
        ParamSpace((Parameter("x", "real", 0, 1), Parameter("x", "integer", 0, 3)))


def test_categorical_closure():
    space = ParamSpace((Parameter("engine", "categorical", options=("de", "shade", "jade")),))
    cands = sample_candidates(space, 3, 0)
    assert all(c.assignment["engine"] in ("de", "shade", "jade") for c in cands)


@given(st.integers(0, 2 ** 32 - 1))
def test_sampling_deterministic_and_in_domain(seed):
    space = ParamSpace.from_dict([
        {"name": "F", "type": "real", "low": 0, "high": 2},
        {"name": "NP", "kind": "integer", "low": 4, "high": 100},
        {"name": "e", "type": "categorical", "options": ["a", "b"]},
    ])
    a = sample_candidates(space, 5, seed)
    assert a == sample_candidates(space, 5, seed)
    kids = sample_candidates(space, 20, seed + 1, parents=a, spread=0.1)
    for c in a + kids:
        assert all(p.contains(c.assignment[p.name]) for p in space.parameters)
        assert isinstance(c.assignment["NP"], int)


def test_uniform_sampling_mean():
    vals = [c.assignment["F"] for c in sample_candidates(F_SPACE, 10000, 7)]
    assert abs(np.mean(vals) - 0.5) < 0.02


def test_race_single_candidate():
    st_ = race([Candidate("only", {"F": 0.1})], instance_stream(["i"], 0), Log(quadratic_target))
    assert st_.instances_consumed == 0 and st_.evaluations == 0


def test_race_dominance_k2():
    good, bad = Candidate("good", {"F": 0.5}), Candidate("bad", {"F": 0.9})

    def evaluate(a, inst, seed):
        return (seed % 97) / 97.0 + (100.0 if a["F"] == 0.9 else 0.0)

    st_ = race([good, bad], [(f"i{j}", j) for j in range(10)], evaluate, min_instances=5)
    assert [c.id for c in st_.alive] == ["good"]
    (e,) = st_.eliminations
    assert e["candidate"] == "bad" and e["test"].startswith("direct") and e["adjusted_p"] < 0.05


def test_race_identical_results_exhaust_budget():
    cands = sample_candidates(F_SPACE, 4, 1)
    st_ = race(cands, instance_stream(["i"], 0), lambda a, i, s: 1.0, budget=40)
    assert st_.eliminations == [] and len(st_.alive) == 4 and st_.evaluations == 40


def test_race_failure_eliminates_with_note():
    cands = [Candidate("ok", {"F": 0.5}), Candidate("boom", {"F": 0.1}), Candidate("ok2", {"F": 0.6})]

    def evaluate(a, inst, seed):
        if a["F"] == 0.1 and seed == 2:
            raise EvaluationFailure("segfault in target")
        return 1.0

    st_ = race(cands, [(f"i{j}", j) for j in range(6)], evaluate)
    assert "boom" in st_.failed and "boom" not in [c.id for c in st_.alive]
    assert st_.eliminations[0]["note"] == "segfault in target"


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 8), st.integers(20, 200))
def test_race_invariants(seed, n, budget):
    cands = sample_candidates(F_SPACE, n, seed)
    log = Log(lambda a, i, s: quadratic_target(a, i, s) + 0.01 * ((s % 13) / 13.0))
    st_ = race(cands, instance_stream(["q0", "q1"], seed), log, min_instances=3, budget=budget)
    assert st_.evaluations == len(log.calls) <= budget
    assert st_.alive
    eliminated_at = {e["candidate"]: e["block"] for e in st_.eliminations}
    blocks: dict = {}
    for a, inst, s in log.calls:
        cid = next(c.id for c in cands if c.assignment == a)
        blocks.setdefault((inst, s), set()).add(cid)
    ordered = list(blocks)
    for b, key in enumerate(ordered):
        for cid, at in eliminated_at.items():
            if b > at:
                assert cid not in blocks[key]
    # blocking: every block is evaluated by the same alive set
    alive_at = [len(v) for v in blocks.values()]
    assert alive_at == sorted(alive_at, reverse=True)
    for e in st_.eliminations:
        assert e["adjusted_p"] < 0.05
        assert e["omnibus_p"] is None or e["omnibus_p"] < 0.05


def test_iterated_race_single_point():
    space = ParamSpace((Parameter("engine", "categorical", options=("shade",)),))
    best, audit = iterated_race(space, lambda a, i, s: 0.0, minimum_budget(space))
    assert best.assignment == {"engine": "shade"}


def test_iterated_race_rigged_quadratic():
    best, audit = iterated_race(F_SPACE, quadratic_target, 400, seed=3, instances=("q0", "q1", "q2"))
    assert abs(best.assignment["F"] - 0.5) < 0.05
    assert audit["evaluations"] <= 400
    assert audit["best"]["id"] == best.id


def test_iterated_race_deterministic():
    a = iterated_race(F_SPACE, quadratic_target, 300, seed=9)
    b = iterated_race(F_SPACE, quadratic_target, 300, seed=9)
    assert a == b


def test_budget_too_small_reports_minimum():
    with pytest.raises(TuningBudgetError) as exc:
        iterated_race(F_SPACE, quadratic_target, 5)
    assert exc.value.minimum == minimum_budget(F_SPACE)
    assert str(minimum_budget(F_SPACE)) in str(exc.value)


@pytest.fixture
def target_script(tmp_path):
    script = tmp_path / "target.py"
    script.write_text(textwrap.dedent("""
        import argparse, sys
        p = argparse.ArgumentParser()
        p.add_argument("--instance")
        p.add_argument("--seed", type=int)
        p.add_argument("--param", action="append", default=[])
        a = p.parse_args()
        params = dict(kv.split("=", 1) for kv in a.param)
        mode = params.get("mode", "ok")
        if mode == "crash":
            sys.exit(4)
        if mode == "chatty":
            print("value is", 1.0)
        else:
            print((float(params["F"]) - 0.5) ** 2 + (a.seed % 10) * 1e-6)
    """))
    return f"{sys.executable} {script}"


def test_external_target_protocol(target_script):
    ev = command_evaluator(target_script)
    assert ev({"F": 0.7}, "inst", 30) == pytest.approx(0.04, abs=1e-12)
    with pytest.raises(EvaluationFailure, match="exit status 4"):
        ev({"F": 0.1, "mode": "crash"}, "inst", 1)
    with pytest.raises(TargetProtocolError, match="value is"):
        ev({"F": 0.1, "mode": "chatty"}, "inst", 1)


def test_external_target_tuning(target_script):
    best, _ = iterated_race(F_SPACE, command_evaluator(target_script), 60, seed=0, min_instances=3)
    assert abs(best.assignment["F"] - 0.5) < 0.25
