import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import TABLE4, TABLE4_COLUMNS, TABLE4_FUNCTIONS
from fairbench import optimizers
from fairbench.benchmark import SuiteManifest, derive_seed
from fairbench.harness import (
    CSV_COLUMNS,
    CsvSchemaError,
    DuplicateRecordError,
    ExperimentPlan,
    ManifestError,
    RunRecord,
    ablation,
    bias_probe,
    export_csv,
    ingest_csv,
    run_experiment,
)
from fairbench.optimizers import Budget, ConfigError, OptimizerConfig
from fairbench.stats import count_wins
from fairbench.workflow import ResultsMatrix


def small_plan(runs=5, algorithms=("de", "random_search"), fns=("sphere", "rastrigin", "ackley")):
    return ExperimentPlan(
        suite=SuiteManifest(fns, 3, "shift", 5),
        algorithms=tuple(OptimizerConfig(algorithm=a, population_size=10) for a in algorithms),
        runs=runs,
        budget=Budget.from_fractions(500),
        master_seed=99,
    )


def test_cardinality_order_and_seeds():
    recs = run_experiment(small_plan())
    assert len(recs) == 30
    assert [r.key for r in recs] == sorted(r.key for r in recs)
    for r in recs:
        assert r.seed == derive_seed(99, r.algorithm, r.function, r.run)
        assert set(r.errors) == {5, 50, 500}
        assert all(e >= 0 for e in r.errors.values())


def test_determinism_and_scheduling_independence(tmp_path):
    plan = small_plan(runs=3)
    a = run_experiment(plan, workers=1)
    b = run_experiment(plan, workers=1)
    c = run_experiment(plan, workers=2)
    assert a == b == c
    export_csv(a, tmp_path / "a.csv")
    export_csv(c, tmp_path / "c.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_failed_run_recorded(monkeypatch):
    def broken(spec, config, budget, seed, objective=None):
        t = optimizers.make_tracker(spec, budget, seed, objective=lambda x: np.full(np.atleast_2d(x).shape[0], np.inf))
        t.evaluate(np.atleast_2d(spec.optimum_location))

    monkeypatch.setitem(optimizers.ALGORITHMS, "broken", broken)
    recs = run_experiment(small_plan(runs=1, algorithms=("broken", "random_search")))
    bad = [r for r in recs if r.algorithm == "broken"]
    assert bad and all(r.failed and "inf" in r.diagnostics for r in bad)
    assert all(np.isnan(list(r.errors.values())).all() for r in bad)


def test_plan_validation(tmp_path):
    with pytest.raises(ManifestError):
        ExperimentPlan(SuiteManifest(("sphere",), 2), (OptimizerConfig("de"), OptimizerConfig("de")), 1, Budget(10))
    with pytest.raises(ManifestError, match="runs"):
        ExperimentPlan(SuiteManifest(("sphere",), 2), (OptimizerConfig("de"),), 0, Budget(10))
    with pytest.raises(ManifestError, match="budget"):
        ExperimentPlan.from_dict({"suite": {}, "algorithms": [], "runs": 1, "master_seed": 0})
    with pytest.raises(ManifestError, match="not found"):
        ExperimentPlan.load(tmp_path / "missing.json")
    p = tmp_path / "m.json"
    p.write_text(json.dumps(small_plan().to_dict()))
    assert ExperimentPlan.load(p) == small_plan()


# -- CSV ---------------------------------------------------------------------------

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=6))
def test_csv_round_trip_lossless(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "r.csv"
    recs = [RunRecord("alg", f"f{i}", 4, i % 2, derive_seed(i), {10: a, 100: min(a, b)}, wall_ms=b)
            for i, (a, b) in enumerate(values)]
    export_csv(recs, path)
    assert ingest_csv(path) == sorted(recs, key=lambda r: r.key)


def test_csv_header(tmp_path):
    export_csv([RunRecord("a", "f", 2, 0, 1, {5: 0.25})], tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_csv_missing_column(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("algorithm,function,dimension,run,evaluations,error,wall_ms\n")
    with pytest.raises(CsvSchemaError, match="seed"):
        ingest_csv(p)


def test_csv_bad_value_names_line_and_column(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text(",".join(CSV_COLUMNS) + "\na,f,2,0,10,0.5,1,0\na,f,2,1,10,oops,1,0\n")
    with pytest.raises(CsvSchemaError, match=r":3: column 'error'"):
        ingest_csv(p)


def test_csv_duplicate_key(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text(",".join(CSV_COLUMNS) + "\na,f,2,0,10,0.5,1,0\na,f,2,0,10,0.4,1,0\n")
    with pytest.raises(DuplicateRecordError):
        ingest_csv(p)


def write_table4_csv(path):
    lines = [",".join(CSV_COLUMNS)]
    for i, fn in enumerate(TABLE4_FUNCTIONS):
        for j, alg in enumerate(TABLE4_COLUMNS):
            lines.append(f"{alg},{fn},1000,0,3000000,{float(TABLE4[i, j])!r},0,0")
    path.write_text("\n".join(lines) + "\n")


def test_table4_csv_win_counts(tmp_path):
    write_table4_csv(tmp_path / "t4.csv")
    m = ResultsMatrix.from_records(ingest_csv(tmp_path / "t4.csv"), 3000000)
    order = [m.algorithms.index(a) for a in TABLE4_COLUMNS]
    wins = count_wins(m.summary())[order]
    np.testing.assert_array_equal(wins, [12, 1, 0, 2])


# -- ablation ------------------------------------------------------------------------

def test_ablation_grid_and_paired_seeds():
    base = OptimizerConfig("ils_hybrid", population_size=10, cycle_evaluations=200)
    suite = SuiteManifest(("sphere", "rastrigin", "griewank"), 3, "shift", 1)
    res = ablation(base, {"de_engine": ["de", "shade"], "restart": ["old", "new"]}, suite, Budget(600), 2, 5)
    assert res.matrix.cells.shape == (4, 3, 2)
    assert res.wins.sum() >= 3
    by = {}
    for r in res.records:
        by.setdefault((r.function, r.run), set()).add(r.seed)
    assert all(len(s) == 1 for s in by.values())
    assert {(f, k): s.pop() for (f, k), s in by.items()} == res.seeds


def test_ablation_single_combination():
    res = ablation(OptimizerConfig("de", population_size=8), {"CR": [0.5]},
                   SuiteManifest(("sphere", "ackley"), 2), Budget(200), 2)
    assert res.matrix.algorithms == ("CR=0.5",)
    np.testing.assert_array_equal(res.wins, [2])


def test_ablation_empty_grid():
    with pytest.raises(ConfigError):
        ablation(OptimizerConfig("de"), {}, SuiteManifest(("sphere",), 2), Budget(10), 1)


# -- bias probe ----------------------------------------------------------------------

def test_probe_zero_budget():
    with pytest.raises(ConfigError, match="at least one evaluation"):
        bias_probe(OptimizerConfig("random_search"), 3, 30, 0)


def test_probe_warns_on_few_runs():
    with pytest.warns(UserWarning, match="30"):
        rep = bias_probe(OptimizerConfig("random_search"), 2, 10, 50)
    assert rep.warnings and 0 <= rep.rejection_fraction <= 1


def test_probe_random_search_calibrated():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fr = [bias_probe(OptimizerConfig("random_search"), 10, 30, 200, master_seed=s).rejection_fraction
              for s in range(20)]
    assert 0.025 <= np.mean(fr) <= 0.10


def test_probe_report_dict():
    rep = bias_probe(OptimizerConfig("center_pull"), 4, 30, 200)
    d = rep.to_dict()
    assert d["verdict"] == "fail" and len(d["p_values"]) == 4
    assert rep.mean_center_distance < rep.uniform_center_distance / 3
