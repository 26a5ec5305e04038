"""Report artifacts: difference heatmap, size-sweep plot, aggregate tables.

Figures are written as SVG with a machine-readable annotation layer: every
cell rectangle and numeral carries an SVG id encoding its cell, label and
whether the size-based prediction missed, so tests assert colors and red
numerals without image diffing. Tables render both as TSV and as aligned
text; display values round half-up to one decimal while underlying stores
keep full precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .errors import IncompleteError, ValidationError  # noqa: E402
from .heuristic import HeuristicPrediction, Prediction  # noqa: E402
from .stats import (CellLabel, ScoreSample, SignificanceMatrix, aggregate,  # noqa: E402
                    t_quantile)

plt.rcParams["svg.hashsalt"] = "tlbench"

_SVG_METADATA = {"Date": None}  # keep outputs byte-identical across invocations

LABEL_COLORS = {
    CellLabel.MTL_BETTER: "#6baed6",      # blue
    CellLabel.STILTS_BETTER: "#74c476",   # green
    CellLabel.NOT_SIGNIFICANT: "#cccccc", # grey
}

ROW_AVG_STILTS = "avg_stilts"
ROW_AVG_MTL = "avg_mtl"
ROW_AVG_SH = "avg_size_heuristic"
ROW_ORACLE = "pairwise_oracle"


def display_round(value: float, places: int = 1) -> float:
    """Half-up rounding for presentation (Python's round is half-even)."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def order_by_size(task_ids, sizes: Mapping[str, int]) -> list[str]:
    """Descending training size; id breaks ties deterministically."""
    missing = sorted(set(task_ids) - set(sizes))
    if missing:
        raise ValidationError(f"training sizes missing for tasks: {missing}")
    return sorted(task_ids, key=lambda t: (-sizes[t], t))


def difference_matrix(sig: SignificanceMatrix) -> dict[tuple[str, str], float]:
    """Per-cell mtl_mean - stilts_mean; positive means MTL better."""
    return {cell: result.difference for cell, result in sorted(sig.cells.items())}


def write_difference_grid(sig: SignificanceMatrix, sizes: Mapping[str, int],
                          path: str | Path) -> None:
    order = order_by_size(sig.task_ids(), sizes)
    diffs = difference_matrix(sig)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("target\\support\t" + "\t".join(order) + "\n")
        for target in order:
            row = []
            for support in order:
                if target == support or (target, support) not in diffs:
                    row.append("")
                else:
                    row.append(f"{diffs[(target, support)]:+.2f}")
            fh.write(target + "\t" + "\t".join(row) + "\n")


@dataclass(frozen=True)
class AggregateTable:
    """Per-task scores per row kind plus the row means (full precision)."""

    rows: dict[str, dict[str, float]]
    mean_column: dict[str, float]
    task_order: tuple[str, ...]


def aggregate_table(
    sig: SignificanceMatrix,
    mtl_all_scores: Mapping[str, Mapping[str, float]] | None,
    sizes: Mapping[str, int],
    tiebreak: Prediction = Prediction.MTL_PAIR,
    require_mtl_all: bool = True,
) -> AggregateTable:
    """Build the strategy-comparison table from pairwise cell means.

    ``mtl_all_scores`` maps a policy name to per-task scores. The size-
    heuristic row averages, per target, the mean score of whichever pairwise
    method the size rule picks for each support (ties fall to ``tiebreak``).
    The oracle row takes the best (support, method) combination per target.
    """
    if not sig.cells:
        raise IncompleteError("significance matrix has no cells")
    if require_mtl_all and not mtl_all_scores:
        raise IncompleteError("all-task training scores are missing; run the "
                              "all-task experiment or pass require_mtl_all=False")
    targets = sorted({t for t, _ in sig.cells})
    missing = sorted(set(targets) - set(sizes))
    if missing:
        raise ValidationError(f"training sizes missing for tasks: {missing}")

    rows: dict[str, dict[str, float]] = {}
    for policy_name in sorted(mtl_all_scores or {}):
        scores = mtl_all_scores[policy_name]
        absent = sorted(set(targets) - set(scores))
        if absent:
            raise IncompleteError(
                f"all-task scores for policy {policy_name!r} missing tasks: {absent}")
        rows[f"mtl_all[{policy_name}]"] = {t: float(scores[t]) for t in targets}

    avg_stilts: dict[str, float] = {}
    avg_mtl: dict[str, float] = {}
    avg_sh: dict[str, float] = {}
    oracle: dict[str, float] = {}
    for target in targets:
        cells = {s: r for (t, s), r in sig.cells.items() if t == target}
        stilts_scores = [r.stilts_mean for _, r in sorted(cells.items())]
        mtl_scores = [r.mtl_mean for _, r in sorted(cells.items())]
        chosen = []
        for support, result in sorted(cells.items()):
            if sizes[support] > sizes[target]:
                pick = Prediction.MTL_PAIR
            elif sizes[support] < sizes[target]:
                pick = Prediction.STILTS
            else:
                pick = tiebreak
            chosen.append(result.mtl_mean if pick is Prediction.MTL_PAIR
                          else result.stilts_mean)
        avg_stilts[target] = sum(stilts_scores) / len(stilts_scores)
        avg_mtl[target] = sum(mtl_scores) / len(mtl_scores)
        avg_sh[target] = sum(chosen) / len(chosen)
        oracle[target] = max(max(stilts_scores), max(mtl_scores))
    rows[ROW_AVG_STILTS] = avg_stilts
    rows[ROW_AVG_MTL] = avg_mtl
    rows[ROW_AVG_SH] = avg_sh
    rows[ROW_ORACLE] = oracle

    mean_column = {name: sum(r.values()) / len(r) for name, r in rows.items()}
    return AggregateTable(
        rows=rows,
        mean_column=mean_column,
        task_order=tuple(order_by_size(targets, sizes)),
    )


def mean_of_row(values: Sequence[float]) -> float:
    """Mean of a table row as displayed (half-up, one decimal)."""
    if not values:
        raise ValidationError("row is empty")
    return display_round(sum(values) / len(values))


def write_table_tsv(table: AggregateTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("row\tmean\t" + "\t".join(table.task_order) + "\n")
        for name in table.rows:
            cells = [f"{display_round(table.rows[name][t]):.1f}" for t in table.task_order]
            fh.write(f"{name}\t{display_round(table.mean_column[name]):.1f}\t"
                     + "\t".join(cells) + "\n")


def format_table_text(table: AggregateTable) -> str:
    headers = ["row", "mean", *table.task_order]
    lines = [headers]
    for name in table.rows:
        lines.append([
            name,
            f"{display_round(table.mean_column[name]):.1f}",
            *(f"{display_round(table.rows[name][t]):.1f}" for t in table.task_order),
        ])
    widths = [max(len(row[i]) for row in lines) for i in range(len(headers))]
    rendered = []
    for row in lines:
        rendered.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(rendered) + "\n"


def render_heatmap(
    sig: SignificanceMatrix,
    sizes: Mapping[str, int],
    predictions: Mapping[tuple[str, str], HeuristicPrediction],
    path: str | Path,
    display_names: Mapping[str, str] | None = None,
) -> None:
    """Difference heatmap: color by winner, red numerals where the size rule misses.

    SVG ids: ``cell__<target>__<support>__<label>`` on rectangles and
    ``num__<target>__<support>__<ok|miss>`` on numerals.
    """
    missing = sorted(set(sig.cells) - set(predictions))
    if missing:
        raise ValidationError(f"predictions missing for cells: {missing}")
    order = order_by_size(sig.task_ids(), sizes)
    names = display_names or {}
    n = len(order)
    fig, ax = plt.subplots(figsize=(1.1 * n + 2.2, 0.9 * n + 1.8))
    for i, target in enumerate(order):
        for j, support in enumerate(order):
            y = n - 1 - i  # largest target on the top row
            if target == support or (target, support) not in sig.cells:
                tag = "diagonal" if target == support else "absent"
                rect = Rectangle((j, y), 1, 1, facecolor="white", edgecolor="#888888")
                rect.set_gid(f"cell__{target}__{support}__{tag}")
                ax.add_patch(rect)
                continue
            result = sig.cells[(target, support)]
            rect = Rectangle((j, y), 1, 1, facecolor=LABEL_COLORS[result.label],
                             edgecolor="#888888")
            rect.set_gid(f"cell__{target}__{support}__{result.label.value}")
            ax.add_patch(rect)
            significant = result.label is not CellLabel.NOT_SIGNIFICANT
            agrees = (
                (result.label is CellLabel.MTL_BETTER
                 and predictions[(target, support)].predicted is Prediction.MTL_PAIR)
                or (result.label is CellLabel.STILTS_BETTER
                    and predictions[(target, support)].predicted is Prediction.STILTS))
            miss = significant and not agrees
            text = ax.text(j + 0.5, y + 0.5, f"{result.difference:+.1f}",
                           ha="center", va="center", fontsize=9,
                           color="red" if miss else "black")
            text.set_gid(f"num__{target}__{support}__{'miss' if miss else 'ok'}")
    ax.set_xlim(0, n)
    ax.set_ylim(0, n)
    ax.set_xticks([i + 0.5 for i in range(n)])
    ax.set_xticklabels([names.get(t, t) for t in order], rotation=45, ha="right")
    ax.set_yticks([n - 1 - i + 0.5 for i in range(n)])
    ax.set_yticklabels([names.get(t, t) for t in order])
    ax.set_xlabel("supporting task")
    ax.set_ylabel("target task")
    ax.set_title("Joint-training score minus intermediate-fine-tuning score")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)


@dataclass(frozen=True, slots=True)
class SweepPoint:
    method: str
    proportion: float
    mean: float
    std: float
    ci_half_width: float
    n: int


@dataclass(frozen=True)
class SweepPlot:
    points: tuple[SweepPoint, ...]
    confidence: float

    def point(self, method: str, proportion: float) -> SweepPoint:
        for p in self.points:
            if p.method == method and abs(p.proportion - proportion) < 1e-12:
                return p
        raise KeyError((method, proportion))


def render_size_sweep(
    series: Mapping[str, Mapping[float, Sequence[float]]],
    path: str | Path,
    confidence: float = 0.90,
    title: str = "Support-size sweep",
) -> SweepPlot:
    """Score vs support-proportion plot with t-based confidence intervals.

    Every method must cover the same proportion grid; the interval half-width
    is t_{(1+confidence)/2, n-1} * std / sqrt(n), zero for constant samples.
    """
    if not series:
        raise ValidationError("no sweep series to plot")
    grids = {m: tuple(sorted(ks)) for m, ks in series.items()}
    reference = next(iter(grids.values()))
    mismatched = {m: g for m, g in grids.items() if g != reference}
    if mismatched:
        raise ValidationError(f"proportion grids differ across methods: {grids}")
    if not reference:
        raise ValidationError("sweep needs at least one proportion point")

    quantile = (1.0 + confidence) / 2.0
    points: list[SweepPoint] = []
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = {"mtl_pair": "#1f77b4", "stilts": "#2ca02c"}
    for method in sorted(series):
        xs, means, halves = [], [], []
        for k in reference:
            sample = ScoreSample(tuple(series[method][k]))
            mean, std = aggregate(sample)
            std = std if std is not None else 0.0
            half = 0.0
            if sample.n >= 2 and std > 0:
                half = t_quantile(quantile, sample.n - 1) * std / (sample.n ** 0.5)
            points.append(SweepPoint(method, k, mean, std, half, sample.n))
            xs.append(k)
            means.append(mean)
            halves.append(half)
        line = ax.errorbar(xs, means, yerr=halves, marker="o", capsize=3,
                           label=method, color=colors.get(method))
        line.lines[0].set_gid(f"series__{method}")
    ax.set_xlabel("support training size / target training size")
    ax.set_ylabel("target dev score")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    return SweepPlot(points=tuple(points), confidence=confidence)


def write_sweep_tsv(plot: SweepPlot, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method\tproportion\tmean\tstd\tci_half_width\tn\n")
        for p in sorted(plot.points, key=lambda p: (p.method, p.proportion)):
            fh.write(f"{p.method}\t{p.proportion:.6g}\t{p.mean:.6f}\t{p.std:.6f}\t"
                     f"{p.ci_half_width:.6f}\t{p.n}\n")
