"""Convergence-aware comparison: rank the optimizers at several budgets.

A winner at the final budget can lose early on (or the other way round), so
errors are recorded at 1%, 10% and 100% of the evaluations and each
checkpoint gets its own gated comparison.  The grouped bar chart shows the
rankings side by side.

Usage: python demos/convergence_checkpoints.py [out_dir]
"""

import sys
from pathlib import Path

from fairbench.benchmark import SuiteManifest
from fairbench.harness import ExperimentPlan, export_csv, run_experiment
from fairbench.optimizers import Budget, OptimizerConfig
from fairbench.report import ranking_bars, render_report
from fairbench.workflow import ComparisonConfig, checkpoint_comparison


def main(out="demo_out/convergence"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    suite = SuiteManifest(("sphere", "schwefel_2_21", "rosenbrock", "rastrigin", "griewank", "ackley",
                           "schwefel_2_22", "schwefel_1_2"), dimension=10, policy="shift_rotate", master_seed=7)
    budget = Budget.from_fractions(20_000)
    plan = ExperimentPlan(
        suite=suite,
        algorithms=tuple(OptimizerConfig(algorithm=a) for a in ("de", "shade", "mts_ls1", "random_search")),
        runs=5,
        budget=budget,
        master_seed=1,
    )
    records = run_experiment(plan)
    export_csv(records, out / "results.csv")

    reports = checkpoint_comparison(records, budget.checkpoints, ComparisonConfig())
    for r in reports:
        order = sorted(r.average_ranks, key=r.average_ranks.get)
        print(f"{r.checkpoint:>6} evals: " + "  ".join(f"{a}={r.average_ranks[a]:.2f}" for a in order))

    (out / "ranking.svg").write_bytes(ranking_bars(reports))
    md, js = render_report(reports, {"Average ranking per checkpoint": "ranking.svg"})
    (out / "report.md").write_text(md, encoding="utf-8")
    (out / "report.json").write_text(js, encoding="utf-8")
    print(f"report written to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
