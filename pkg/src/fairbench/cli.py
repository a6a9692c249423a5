"""Command-line entry point: ``fairbench <subcommand> ...``.

Exit status: 0 success, 1 runtime failure, 2 invalid input, 3 a valid
comparison whose omnibus test found no significant difference.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import __version__
from .benchmark import TAGS, BenchmarkError, SuiteManifest, function_names
from .harness import (
    CsvSchemaError,
    ExperimentPlan,
    ManifestError,
    ablation,
    bias_probe,
    default_workers,
    export_csv,
    ingest_csv,
    run_experiment,
)
from .optimizers import ALGORITHMS, Budget, ConfigError, OptimizerConfig
from .report import (
    ReportInputError,
    ablation_table,
    group_win_counts,
    has_differences,
    radar,
    ranking_bars,
    render_report,
    report_from_json,
    tag_groups,
    win_fraction,
)
from .stats import CorrectionMethod, StatsError
from .tuner import (
    BUILTIN_TARGETS,
    ParamSpace,
    TuningError,
    command_evaluator,
    iterated_race,
)
from .workflow import BEST_AVERAGE_RANK, ComparisonConfig, WorkflowError, checkpoint_comparison, group_average_ranks

OK, RUNTIME, INVALID, NOT_SIGNIFICANT = 0, 1, 2, 3
INPUT_ERRORS = (ManifestError, CsvSchemaError, ConfigError, BenchmarkError, TuningError, WorkflowError,
                ReportInputError, StatsError, FileNotFoundError, json.JSONDecodeError)


class InputError(ValueError):
    pass


def _read_json(path, what):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {p} is not valid JSON: {exc}") from exc


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _alpha(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def _optimizer_config(text) -> OptimizerConfig:
    """An algorithm name or a path to an optimizer-config JSON file."""
    if text in ALGORITHMS:
        return OptimizerConfig(algorithm=text)
    d = _read_json(text, "optimizer config")
    return OptimizerConfig.from_dict(d)


# -- subcommands ----------------------------------------------------------------


def cmd_run(args) -> int:
    manifest = Path(args.manifest)
    plan = ExperimentPlan.load(manifest)
    plan.suite.build()  # validate the suite before any run starts
    out = _out_dir(args.out)
    records = run_experiment(plan, workers=args.workers)
    export_csv(records, out / "results.csv")
    shutil.copyfile(manifest, out / "manifest.json")
    failed = sum(r.failed for r in records)
    print(f"wrote {len(records)} runs ({failed} failed) to {out / 'results.csv'}")
    return OK


def _tags_from_manifest(path):
    plan = ExperimentPlan.load(path)
    return {s.id: tuple(sorted(s.tags)) for s in plan.suite.build()}


def cmd_compare(args) -> int:
    results = Path(args.results)
    if not results.is_file():
        raise InputError(f"results file not found: {results}")
    records = ingest_csv(results)
    if not records:
        raise InputError(f"{results}: no data rows")
    manifest = Path(args.manifest) if args.manifest else results.with_name("manifest.json")
    tags = _tags_from_manifest(manifest) if manifest.is_file() else {}
    if tags:
        records = [replace(r, tags=tags.get(r.function, ())) for r in records]
    common = set.intersection(*(set(r.errors) for r in records))
    checkpoints = args.checkpoint or [max(common)]
    config = ComparisonConfig(alpha=args.alpha, correction=args.correction,
                              control=args.control or BEST_AVERAGE_RANK, summary=args.summary)
    reports = checkpoint_comparison(records, checkpoints, config, exclude_failed=args.exclude_failed)
    out = _out_dir(args.out)
    charts = {"Average ranking per checkpoint": "ranking.svg"}
    (out / "ranking.svg").write_bytes(ranking_bars(reports))
    final = reports[-1]
    if any(final.provenance["function_tags"].values()):
        from .workflow import ResultsMatrix

        matrix = ResultsMatrix.from_records(records, checkpoints[-1], args.exclude_failed)
        groups = tag_groups(matrix)
        if len(groups) >= 3:
            g = group_average_ranks(matrix, groups, config)
            (out / "radar.svg").write_bytes(radar(g, matrix.algorithms, list(groups)))
            charts["Average ranking by function group"] = "radar.svg"
        (out / "wins.svg").write_bytes(
            win_fraction(group_win_counts(matrix, None, config.summary), matrix.algorithms))
        charts["Fraction of best results"] = "wins.svg"
    md, js = render_report(reports if len(reports) > 1 else final, charts, tuned=args.tuned or ())
    (out / "report.md").write_text(md, encoding="utf-8")
    (out / "report.json").write_text(js, encoding="utf-8")
    print(md)
    return OK if all(has_differences(r) for r in reports) else NOT_SIGNIFICANT


def cmd_report(args) -> int:
    src = Path(args.report)
    if not src.is_file():
        raise InputError(f"report file not found: {src}")
    reports = report_from_json(src.read_text(encoding="utf-8"))
    reps = reports if isinstance(reports, list) else [reports]
    out = _out_dir(args.out)
    (out / "ranking.svg").write_bytes(ranking_bars(reps))
    md, js = render_report(reports, {"Average ranking per checkpoint": "ranking.svg"})
    (out / "report.md").write_text(md, encoding="utf-8")
    (out / "report.json").write_text(js, encoding="utf-8")
    return OK if all(has_differences(r) for r in reps) else NOT_SIGNIFICANT


def cmd_ablate(args) -> int:
    base = _optimizer_config(args.base)
    grid = _read_json(args.toggles, "toggle spec")
    if not isinstance(grid, dict) or not all(isinstance(v, list) and v for v in grid.values()):
        raise InputError("toggle spec must map option names to non-empty lists of values")
    suite_doc = _read_json(args.suite, "suite manifest")
    suite = SuiteManifest.from_dict(suite_doc.get("suite", suite_doc))
    budget = Budget.from_dict(suite_doc["budget"]) if "budget" in suite_doc else Budget(args.budget)
    runs = int(suite_doc.get("runs", args.runs))
    seed = int(suite_doc.get("master_seed", args.seed))
    suite.build()
    out = _out_dir(args.out)
    res = ablation(base, grid, suite, budget, runs, seed, workers=args.workers)
    export_csv(res.records, out / "results.csv")
    (out / "ablation.md").write_text(ablation_table(res.matrix, res.wins), encoding="utf-8")
    _write_json(out / "ablation.json", {
        "base": base.to_dict(),
        "columns": [{"id": cid, "toggles": c} for cid, c in zip(res.matrix.algorithms, res.columns)],
        "better": [int(w) for w in res.wins],
        "paired_seeds": [{"function": f, "run": k, "seed": s} for (f, k), s in sorted(res.seeds.items())],
        "budget": budget.to_dict(),
        "runs": runs,
    })
    print(ablation_table(res.matrix, res.wins))
    return OK


def cmd_tune(args) -> int:
    space = ParamSpace.from_dict(_read_json(args.space, "parameter space"))
    if args.target.startswith("builtin:"):
        name = args.target.split(":", 1)[1]
        if name not in BUILTIN_TARGETS:
            raise InputError(f"unknown builtin target {name!r}; choose from {sorted(BUILTIN_TARGETS)}")
        evaluate, instances = BUILTIN_TARGETS[name]
    else:
        evaluate, instances = command_evaluator(args.target, args.timeout), ("default",)
    if args.instances:
        instances = tuple(args.instances.split(","))
    out = _out_dir(args.out)
    best, audit = iterated_race(space, evaluate, args.budget, seed=args.seed, instances=instances,
                                min_instances=args.min_instances, alpha=args.alpha)
    _write_json(out / "tune.json", {"winner": best.to_dict(), "target": args.target, "audit": audit})
    print(json.dumps(best.to_dict(), sort_keys=True))
    return OK


def cmd_probe_bias(args) -> int:
    config = _optimizer_config(args.algorithm)
    out = _out_dir(args.out)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = bias_probe(config, args.dim, args.runs, args.budget, args.seed, args.alpha)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write_json(out / "bias.json", rep.to_dict())
    print(f"{rep.optimizer}: rejection fraction {rep.rejection_fraction:.3f} -> "
          f"{'pass' if rep.passed else 'fail'}")
    return OK


def cmd_functions(args) -> int:
    for name in function_names(args.tags):
        print(name)
    return OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairbench", description="Fair, reproducible comparison of optimizers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    workers_help = "worker processes (default: $FAIRBENCH_WORKERS or 1)"

    s = sub.add_parser("run", help="execute an experiment manifest")
    s.add_argument("--manifest", required=True, help="experiment manifest (JSON)")
    s.add_argument("--out", required=True, help="output directory for results.csv and the manifest copy")
    s.add_argument("--workers", type=_positive_int, default=None, help=workers_help)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("compare", help="statistical comparison of a results CSV")
    s.add_argument("--results", required=True, help="results CSV in the harness schema")
    s.add_argument("--checkpoint", type=_positive_int, action="append",
                   help="evaluation count to compare at; repeatable (default: the final checkpoint)")
    s.add_argument("--alpha", type=_alpha, default=0.05, help="significance level (default 0.05)")
    s.add_argument("--correction", choices=[c.value for c in CorrectionMethod], default="holm",
                   help="multiple-comparison correction (default holm)")
    s.add_argument("--control", default=None, help="control algorithm (default: best average rank)")
    s.add_argument("--summary", choices=("median", "mean"), default="median",
                   help="per-cell summary over runs (default median)")
    s.add_argument("--manifest", default=None,
                   help="manifest supplying function tags (default: manifest.json beside the CSV, if any)")
    s.add_argument("--exclude-failed", action="store_true", help="drop failed runs instead of aborting")
    s.add_argument("--tuned", action="append", default=None, metavar="NAME",
                   help="algorithm whose parameters were tuned; repeatable (asymmetric tuning is flagged)")
    s.add_argument("--out", required=True, help="output directory for report.md, report.json and charts")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("report", help="re-render Markdown and charts from a report.json")
    s.add_argument("--report", required=True, help="report.json written by compare")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("ablate", help="component ablation over a toggle grid")
    s.add_argument("--base", required=True, help="base optimizer: algorithm name or config JSON")
    s.add_argument("--toggles", required=True, help="JSON mapping option names to lists of values")
    s.add_argument("--suite", required=True,
                   help="suite manifest JSON, or an experiment manifest whose budget/runs/seed are used")
    s.add_argument("--budget", type=_positive_int, default=10000,
                   help="evaluations per run when the suite gives none (default 10000)")
    s.add_argument("--runs", type=_positive_int, default=5, help="runs per cell when the suite gives none")
    s.add_argument("--seed", type=int, default=0, help="master seed when the suite gives none")
    s.add_argument("--workers", type=_positive_int, default=None, help=workers_help)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_ablate)

    s = sub.add_parser("tune", help="iterated racing over a parameter space")
    s.add_argument("--space", required=True, help="parameter space JSON")
    s.add_argument("--target", required=True,
                   help="'builtin:quadratic', 'builtin:de', or a command following the target-runner protocol")
    s.add_argument("--budget", required=True, type=_positive_int, help="total target evaluations")
    s.add_argument("--seed", type=int, default=0, help="tuning seed (default 0)")
    s.add_argument("--instances", default=None, help="comma-separated instance ids")
    s.add_argument("--min-instances", type=_positive_int, default=5,
                   help="instances before the first elimination test (default 5)")
    s.add_argument("--alpha", type=_alpha, default=0.05, help="elimination significance level")
    s.add_argument("--timeout", type=float, default=None, help="seconds allowed per target call")
    s.add_argument("--out", required=True, help="output directory for tune.json")
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("probe-bias", help="structural-bias probe on a noise objective")
    s.add_argument("--algorithm", required=True, help="algorithm name or optimizer config JSON")
    s.add_argument("--dim", required=True, type=_positive_int, help="problem dimension")
    s.add_argument("--runs", required=True, type=_positive_int, help="independent runs (30 or more advised)")
    s.add_argument("--budget", type=_positive_int, default=1000, help="evaluations per run (default 1000)")
    s.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    s.add_argument("--alpha", type=_alpha, default=0.05, help="per-dimension KS level (default 0.05)")
    s.add_argument("--out", required=True, help="output directory for bias.json")
    s.set_defaults(func=cmd_probe_bias)

    s = sub.add_parser("functions", help="benchmark catalog queries")
    fsub = s.add_subparsers(dest="action", required=True, metavar="ACTION")
    ls = fsub.add_parser("list", help="list catalog functions")
    ls.add_argument("--tags", default=None, help=f"only functions carrying this tag ({', '.join(TAGS)})")
    ls.set_defaults(func=cmd_functions)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) is None:
        args.workers = default_workers()
    try:
        return args.func(args)
    except (InputError,) + INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    except Exception as exc:  # noqa: BLE001 - the exit code is the contract
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME


if __name__ == "__main__":
    sys.exit(main())
