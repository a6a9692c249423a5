"""Deterministic report artifacts: Markdown, JSON and self-contained SVG charts.

Every emitter is a pure function of its input: no timestamps, fixed float
formatting, fixed canvas sizes, so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .stats import TestResult
from .workflow import ComparisonReport, PairwiseDecision, ResultsMatrix

WIDTH, HEIGHT = 720, 420
PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")
FONT = "font-family:DejaVu Sans,Arial,sans-serif"
CHECK = "✓"


class ReportInputError(ValueError):
    pass


def sci(v) -> str:
    """Scientific notation with two decimals, e.g. ``4.79e-02``."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "n/a"
    return f"{v:.2e}"


def _n(v: float) -> str:
    return f"{v:.2f}"


def _color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def _svg_open(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<style>text{{{FONT};font-size:12px;fill:#222}} .title{{font-size:15px;font-weight:bold}}</style>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text class="title" x="{WIDTH // 2}" y="22" text-anchor="middle">{escape(title)}</text>',
    ]


def _legend(labels, x0, y0) -> list[str]:
    out = []
    for i, lab in enumerate(labels):
        y = y0 + 18 * i
        out.append(f'<rect x="{x0}" y="{y - 10}" width="12" height="12" fill="{_color(i)}"/>')
        out.append(f'<text x="{x0 + 18}" y="{y}">{escape(str(lab))}</text>')
    return out


def _finite(values, what):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ReportInputError(f"{what} contains non-finite values")
    return arr


def ranking_bars(reports, title="Average ranking per checkpoint") -> bytes:
    """Grouped bars: one group per checkpoint, one bar per algorithm."""
    reports = list(reports)
    if not reports:
        raise ReportInputError("need at least one report")
    algs = list(reports[0].average_ranks)
    for r in reports[1:]:
        if list(r.average_ranks) != algs:
            raise ReportInputError("reports cover different algorithm sets")
    data = _finite([[r.average_ranks[a] for a in algs] for r in reports], "average ranks")
    k = len(algs)
    left, right, top, bottom = 60, 180, 40, 60
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom
    ymax = float(max(k, np.max(data)))
    group_w = pw / len(reports)
    bar_w = group_w * 0.8 / k
    out = _svg_open(title)
    out.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="#222"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="#222"/>')
    for t in range(0, int(math.ceil(ymax)) + 1):
        y = top + ph - ph * t / ymax
        out.append(f'<text x="{left - 8}" y="{_n(y + 4)}" text-anchor="end">{t}</text>')
    for g, rep in enumerate(reports):
        gx = left + g * group_w + group_w * 0.1
        for i, a in enumerate(algs):
            v = data[g, i]
            h = ph * v / ymax
            out.append(
                f'<rect class="bar" data-algorithm={quoteattr(a)} data-value="{v:.6f}" '
                f'x="{_n(gx + i * bar_w)}" y="{_n(top + ph - h)}" width="{_n(bar_w)}" height="{_n(h)}" '
                f'fill="{_color(i)}"/>'
            )
        label = "final" if rep.checkpoint is None else f"{rep.checkpoint:.1e} evals"
        out.append(f'<text x="{_n(left + (g + 0.5) * group_w)}" y="{top + ph + 18}" text-anchor="middle">'
                   f"{escape(label)}</text>")
    out.append(f'<text x="16" y="{top + ph // 2}" transform="rotate(-90 16 {top + ph // 2})" '
               'text-anchor="middle">average rank (lower is better)</text>')
    out += _legend(algs, WIDTH - right + 20, top + 10)
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def radar(group_ranks, algorithms, groups, title="Average ranking by function group") -> bytes:
    """One closed polygon per algorithm over the group axes.

    Radius encodes ``(k + 1 - rank) / k``: the outer ring is rank 1, so a
    larger polygon means a better algorithm.
    """
    m = _finite(group_ranks, "group ranks")
    algorithms, groups = list(algorithms), list(groups)
    if m.shape != (len(algorithms), len(groups)):
        raise ReportInputError("group_ranks must be algorithms x groups")
    if len(groups) < 3:
        raise ReportInputError("a radar chart needs at least 3 groups; use ranking_bars instead")
    k = len(algorithms)
    cx, cy, rad = 270, 225, 160
    n = len(groups)
    angles = [-math.pi / 2 + 2 * math.pi * j / n for j in range(n)]
    out = _svg_open(title)
    for ring in range(1, k + 1):
        rr = rad * ring / k
        pts = " ".join(f"{_n(cx + rr * math.cos(a))},{_n(cy + rr * math.sin(a))}" for a in angles)
        out.append(f'<polygon class="grid" points="{pts}" fill="none" stroke="#cccccc"/>')
    for j, a in enumerate(angles):
        x, y = cx + rad * math.cos(a), cy + rad * math.sin(a)
        out.append(f'<line class="axis" x1="{cx}" y1="{cy}" x2="{_n(x)}" y2="{_n(y)}" stroke="#999999"/>')
        lx, ly = cx + (rad + 22) * math.cos(a), cy + (rad + 22) * math.sin(a)
        out.append(f'<text x="{_n(lx)}" y="{_n(ly + 4)}" text-anchor="middle">{escape(str(groups[j]))}</text>')
    for i, alg in enumerate(algorithms):
        pts = []
        for j, a in enumerate(angles):
            r = rad * (k + 1 - m[i, j]) / k if k > 1 else rad
            pts.append(f"{_n(cx + r * math.cos(a))},{_n(cy + r * math.sin(a))}")
        out.append(f'<polygon class="series" data-algorithm={quoteattr(alg)} points="{" ".join(pts)}" '
                   f'fill="{_color(i)}" fill-opacity="0.15" stroke="{_color(i)}" stroke-width="2"/>')
    out += _legend(algorithms, 520, 70)
    out.append(f'<text x="520" y="{70 + 18 * k + 14}">outer ring = rank 1 (better)</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def win_fraction(counts, algorithms, title="Fraction of best results") -> bytes:
    """A single stacked bar whose segments are each algorithm's share of wins."""
    c = _finite(counts, "win counts")
    algorithms = list(algorithms)
    if c.shape != (len(algorithms),):
        raise ReportInputError("one count per algorithm expected")
    total = float(c.sum())
    if total <= 0:
        raise ReportInputError("no wins to plot (empty group after filtering?)")
    left, bar_w, y, h = 40, WIDTH - 80, 80, 60
    out = _svg_open(title)
    x = float(left)
    for i, (a, v) in enumerate(zip(algorithms, c)):
        w = bar_w * v / total
        out.append(f'<rect class="segment" data-algorithm={quoteattr(a)} data-fraction="{v / total:.6f}" '
                   f'x="{_n(x)}" y="{y}" width="{_n(w)}" height="{h}" fill="{_color(i)}"/>')
        x += w
    for i, (a, v) in enumerate(zip(algorithms, c)):
        out.append(f'<rect x="{left}" y="{180 + 22 * i - 10}" width="12" height="12" fill="{_color(i)}"/>')
        out.append(f'<text x="{left + 18}" y="{180 + 22 * i}">{escape(a)}: {int(v)} ({v / total:.1%})</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def tag_groups(matrix: ResultsMatrix) -> dict:
    """Map each feature tag to the functions carrying it (sorted tag order)."""
    groups: dict = {}
    for f in matrix.functions:
        for t in matrix.function_tags.get(f, ()):
            groups.setdefault(t, []).append(f)
    return dict(sorted(groups.items()))


def group_win_counts(matrix: ResultsMatrix, tag=None, summary="median", direction="lower_is_better"):
    from .stats import count_wins

    idx = [i for i, f in enumerate(matrix.functions) if tag is None or tag in matrix.function_tags.get(f, ())]
    if not idx:
        raise ReportInputError(f"no functions carry tag {tag!r}")
    return count_wins(matrix.summary(summary)[idx], direction)


# -- Markdown / JSON ------------------------------------------------------------


def _nan_to_none(v):
    return None if isinstance(v, float) and math.isnan(v) else v


def has_differences(r: ComparisonReport) -> bool:
    """True when the omnibus (or the direct k = 2 test) is significant."""
    if r.friedman is not None:
        return r.friedman.p_value < r.alpha
    return any(d.significant for d in r.pairwise)


def report_to_dict(r: ComparisonReport) -> dict:
    prov = dict(r.provenance)
    prov["algorithms"] = list(r.algorithms)
    prov["functions"] = list(r.functions)
    prov["win_counts"] = {a: r.win_counts[a] for a in r.algorithms}
    return {
        "checkpoint": r.checkpoint,
        "average_ranks": {a: r.average_ranks[a] for a in r.algorithms},
        "friedman": None if r.friedman is None else r.friedman.to_dict(),
        "control": r.control,
        "pairwise": [
            {**d.to_dict(), "statistic": _nan_to_none(d.statistic)} for d in r.pairwise
        ],
        "provenance": prov,
    }


def report_from_dict(d: dict) -> ComparisonReport:
    prov = dict(d["provenance"])
    algorithms = tuple(prov.pop("algorithms"))
    functions = tuple(prov.pop("functions"))
    wins = prov.pop("win_counts")
    pairwise = tuple(
        PairwiseDecision(
            opponent=p["opponent"],
            test_used=p["test_used"],
            raw_p=p["raw_p"],
            adjusted_p=p["adjusted_p"],
            significant=p["significant"],
            statistic=float("nan") if p["statistic"] is None else p["statistic"],
            audit=p.get("audit", {}),
        )
        for p in d["pairwise"]
    )
    return ComparisonReport(
        checkpoint=d["checkpoint"],
        algorithms=algorithms,
        functions=functions,
        average_ranks=dict(d["average_ranks"]),
        win_counts=dict(wins),
        friedman=None if d["friedman"] is None else TestResult.from_dict(d["friedman"]),
        control=d["control"],
        pairwise=pairwise,
        provenance=prov,
    )


def report_to_json(reports) -> str:
    if isinstance(reports, ComparisonReport):
        doc = report_to_dict(reports)
    else:
        doc = [report_to_dict(r) for r in reports]
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def report_from_json(text: str):
    doc = json.loads(text)
    if isinstance(doc, list):
        return [report_from_dict(d) for d in doc]
    return report_from_dict(doc)


def pairwise_table(decisions, correction="holm") -> list[str]:
    """Control-versus-opponent table with raw and corrected p-values."""
    lines = [
        f"| Control versus | p-value | p-value ({correction}) | |",
        "|---|---|---|---|",
    ]
    for d in decisions:
        mark = CHECK if d.significant else ""
        lines.append(f"| {d.opponent} | {sci(d.raw_p)} | {sci(d.adjusted_p)} | {mark} |")
    return lines


def _markdown_one(r: ComparisonReport, charts) -> list[str]:
    cfg = r.provenance["config"]
    alpha = cfg["alpha"]
    head = "final checkpoint" if r.checkpoint is None else f"{r.checkpoint} evaluations"
    out = [f"## Comparison at {head}", "", "| Algorithm | Average rank | Best on |", "|---|---|---|"]
    for a in sorted(r.algorithms, key=lambda a: (r.average_ranks[a], r.algorithms.index(a))):
        out.append(f"| {a} | {r.average_ranks[a]:.3f} | {r.win_counts[a]} |")
    out.append("")
    if r.friedman is None:
        out.append("Omnibus test: skipped (two algorithms); a single direct comparison follows.")
    else:
        f = r.friedman
        verdict = "significant" if f.p_value < alpha else "not significant"
        out.append(
            f"Friedman test: statistic = {sci(f.statistic)}, p-value = {sci(f.p_value)} "
            f"({', '.join(f.notes)}); {verdict} at α = {alpha}."
        )
    out.append("")
    if not r.omnibus_significant:
        out.append(f"No significant differences at α = {alpha}; pairwise comparisons were not run.")
    else:
        out.append(f"Control algorithm: **{r.control}**")
        out.append("")
        out += pairwise_table(r.pairwise, cfg["correction"])
        out.append("")
        if any(d.significant for d in r.pairwise):
            out.append(f"{CHECK}: significant after correction at α = {alpha}.")
        else:
            out.append(f"No significant differences at α = {alpha}.")
        out.append("")
        out.append("| Opponent | Test | Normality (control, opponent) | Equal variances |")
        out.append("|---|---|---|---|")
        for d in r.pairwise:
            na, nb = d.audit.get("normality_a", {}), d.audit.get("normality_b", {})
            lev = d.audit.get("levene", {})
            out.append(
                f"| {d.opponent} | {d.test_used} | {sci(na.get('p_value'))}, {sci(nb.get('p_value'))} "
                f"| {sci(lev.get('p_value'))} |"
            )
    out.append("")
    return out


def tuning_note(algorithms, tuned) -> str | None:
    """Warning line when only some of the compared algorithms were tuned."""
    marked = set(tuned)
    unknown = sorted(marked - set(algorithms))
    if unknown:
        raise ReportInputError(f"tuned algorithm(s) {unknown} are not in the comparison")
    tuned = [a for a in algorithms if a in marked]
    untuned = [a for a in algorithms if a not in marked]
    if not tuned or not untuned:
        return None
    return (f"**Asymmetric tuning:** parameters were tuned for {', '.join(tuned)} but not for "
            f"{', '.join(untuned)}; differences may reflect tuning effort rather than design.")


def render_report(reports, charts=None, title="Comparison report", tuned=()) -> tuple[str, str]:
    """Markdown and JSON renderings of one or more comparison reports.

    ``charts`` maps a caption to a relative file name, linked from the
    Markdown.  ``tuned`` lists the algorithms whose parameters were tuned;
    tuning only some of them is flagged, not refused.
    """
    single = isinstance(reports, ComparisonReport)
    reps = [reports] if single else list(reports)
    md = [f"# {title}", ""]
    note = tuning_note(reps[0].algorithms, tuned)
    if note:
        md += [note, ""]
    for r in reps:
        md += _markdown_one(r, charts)
    if charts:
        md.append("## Charts")
        md.append("")
        for caption, path in charts.items():
            md.append(f"![{caption}]({path})")
        md.append("")
    prov = reps[0].provenance
    md += ["## Provenance", "", "```json",
           json.dumps({"config": prov["config"], "data_digest": prov["data_digest"], "runs": prov["runs"],
                       "function_tags": prov.get("function_tags", {})}, indent=2, sort_keys=True),
           "```", ""]
    return "\n".join(md), report_to_json(reports if single else reps)


def ablation_table(matrix: ResultsMatrix, wins, summary="median") -> str:
    """Functions x variants table of summarized errors plus a ``Better`` row."""
    s = matrix.summary(summary)
    cols = list(matrix.algorithms)
    lines = ["| Func. | " + " | ".join(cols) + " |", "|---|" + "---|" * len(cols)]
    for i, f in enumerate(matrix.functions):
        best = s[i].min()
        cells = [f"**{sci(v)}**" if v == best else sci(v) for v in s[i]]
        lines.append(f"| {f} | " + " | ".join(cells) + " |")
    lines.append("| **Better** | " + " | ".join(str(int(w)) for w in wins) + " |")
    return "\n".join(lines) + "\n"
