"""Component ablation of the ILS hybrid.

Every combination of the global engine (DE or SHADE) and the restart rule
(new, old, off) runs on the same suite with paired seeds, so differences
between columns come from the components alone.  The result is a
functions x variants table with a "Better" row and a statistical comparison.

Usage: python demos/hybrid_ablation.py [out_dir]
"""

import sys
from pathlib import Path

from fairbench.benchmark import SuiteManifest
from fairbench.harness import ablation, export_csv
from fairbench.optimizers import Budget, OptimizerConfig
from fairbench.report import ablation_table, render_report
from fairbench.workflow import ComparisonConfig, compare_algorithms


def main(out="demo_out/ablation"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    suite = SuiteManifest(("sphere", "rosenbrock", "rastrigin", "griewank", "ackley", "schwefel_1_2"),
                          dimension=10, policy="shift", master_seed=3)
    grid = {"de_engine": ["de", "shade"], "restart": ["new", "old", "off"]}
    res = ablation(OptimizerConfig(algorithm="ils_hybrid"), grid, suite, Budget(20_000), runs=5, master_seed=0)
    export_csv(res.records, out / "results.csv")

    table = ablation_table(res.matrix, res.wins)
    print(table)
    report = compare_algorithms(res.matrix, ComparisonConfig())
    md, js = render_report(report, title="ILS hybrid ablation")
    (out / "ablation.md").write_text(table + "\n" + md, encoding="utf-8")
    (out / "report.json").write_text(js, encoding="utf-8")


if __name__ == "__main__":
    main(*sys.argv[1:])
