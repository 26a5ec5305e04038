"""Experiment drivers: full pairwise matrix, size sweep, all-task runs, analysis.

Drivers are resume-safe: every run's id is computable before execution, runs
already present in the store are skipped, and killing a driver mid-flight
leaves a store that a re-invocation completes to the same final record set.
Stage-1 (support) models are shared: each task's support runs are trained once
and their best state initializes every stage-2 run that needs it.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import strategies
from .data import (DEFAULT_PROPORTIONS, SubsampleMode, SubsampleSpec,
                   manifest_for, subsample)
from .engine import TaskData, TrainConfig
from .errors import InsufficientDataError, ValidationError
from .heuristic import Prediction, heuristic_accuracy, predict_matrix
from .reporting import (AggregateTable, SweepPlot, aggregate_table,
                        display_round, format_table_text, order_by_size,
                        render_heatmap, render_size_sweep,
                        write_difference_grid, write_sweep_tsv, write_table_tsv)
from .scheduler import PolicyKind, SamplingPolicy
from .stats import (DEFAULT_ALPHA, SignificanceMatrix, TestVariant,
                    build_significance_matrix)
from .store import BlobStore, RunStore
from .strategies import (BackendFactory, RunRecord, Stage, Strategy,
                         SupportRun, best_support, run_identity,
                         compute_run_id)


class PlanKind(Enum):
    PAIR = "pair"
    MATRIX = "matrix"
    SIZE_SWEEP = "size_sweep"
    MTL_ALL = "mtl_all"


@dataclass(frozen=True, slots=True)
class SweepSettings:
    target_fraction: float = 1.0
    proportions: tuple[float, ...] = DEFAULT_PROPORTIONS
    subsample_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "proportions", tuple(self.proportions))
        if self.target_fraction not in (1.0, 0.5):
            raise ValidationError(
                f"target_fraction must be 1.0 or 0.5, got {self.target_fraction}")
        if not self.proportions:
            raise ValidationError("sweep needs at least one proportion")


@dataclass(frozen=True, slots=True)
class ExperimentPlan:
    kind: PlanKind
    task_ids: tuple[str, ...]
    seeds: tuple[int, ...] = strategies.DEFAULT_SEEDS
    config: TrainConfig = TrainConfig()
    policy: SamplingPolicy | None = None
    target: str | None = None
    support: str | None = None
    sweep: SweepSettings | None = None

    def __post_init__(self):
        object.__setattr__(self, "task_ids", tuple(self.task_ids))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if not self.seeds:
            raise ValidationError("plan needs at least one seed")
        if self.kind in (PlanKind.PAIR, PlanKind.SIZE_SWEEP):
            if self.target is None or self.support is None:
                raise ValidationError(f"{self.kind.value} plan needs target and support")
            if self.target == self.support:
                raise ValidationError("target and support must be distinct")
        if self.kind is PlanKind.SIZE_SWEEP and self.sweep is None:
            object.__setattr__(self, "sweep", SweepSettings())
        if self.kind is PlanKind.MATRIX and len(self.task_ids) < 2:
            raise ValidationError("matrix plan needs at least 2 tasks")
        if self.kind is PlanKind.MTL_ALL and len(self.task_ids) < 3:
            raise ValidationError("all-task plan needs at least 3 tasks")


@dataclass(frozen=True, slots=True)
class PlanCounts:
    """Planned record counts.

    ``stilts_target`` follows the experiment protocol's model accounting (one
    seed set per task, support models reused across targets);
    ``stilts_target_jobs`` is the number of stage-2 training jobs the driver
    actually schedules (one seed set per ordered pair).
    """

    mtl_pair: int = 0
    stilts_support: int = 0
    stilts_target: int = 0
    stilts_target_jobs: int = 0
    mtl_all: int = 0

    @property
    def stilts_total(self) -> int:
        return self.stilts_support + self.stilts_target

    def as_dict(self) -> dict:
        return {
            "mtl_pair": self.mtl_pair,
            "stilts_support": self.stilts_support,
            "stilts_target": self.stilts_target,
            "stilts_total": self.stilts_total,
            "stilts_target_jobs": self.stilts_target_jobs,
            "mtl_all": self.mtl_all,
        }


def dry_run(plan: ExperimentPlan) -> PlanCounts:
    n = len(plan.task_ids)
    s = len(plan.seeds)
    if plan.kind is PlanKind.MATRIX:
        return PlanCounts(
            mtl_pair=n * (n - 1) * s,
            stilts_support=n * s,
            stilts_target=n * s,
            stilts_target_jobs=n * (n - 1) * s,
        )
    if plan.kind is PlanKind.PAIR:
        return PlanCounts(mtl_pair=s, stilts_support=s, stilts_target=s,
                          stilts_target_jobs=s)
    if plan.kind is PlanKind.MTL_ALL:
        return PlanCounts(mtl_all=s)
    k = len(plan.sweep.proportions)
    return PlanCounts(
        mtl_pair=k * s,
        stilts_support=k * s,
        stilts_target=k * s,
        stilts_target_jobs=k * s,
    )


def _append_all(store: RunStore, records: Sequence[RunRecord]) -> list[RunRecord]:
    return [r for r in records if store.append(r)]


def _run_jobs(jobs: Sequence[Callable[[], list[RunRecord]]], store: RunStore,
              workers: int) -> list[RunRecord]:
    """Execute jobs (possibly in parallel); the caller's thread is the only writer."""
    new: list[RunRecord] = []
    if workers <= 1:
        for job in jobs:
            new.extend(_append_all(store, job()))
        return new
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for records in pool.map(lambda j: j(), jobs):
            new.extend(_append_all(store, records))
    return new


def _support_run_id(support: str, seed: int, config: TrainConfig,
                    tasks: Mapping[str, TaskData]) -> str:
    identity = run_identity(Strategy.STILTS, Stage.SUPPORT, None, [support], seed,
                            PolicyKind.UNIFORM.value, config, tasks, [support])
    return compute_run_id(identity)


def ensure_support_runs(support: str, seeds: Sequence[int], config: TrainConfig,
                        tasks: Mapping[str, TaskData], factory: BackendFactory,
                        store: RunStore, blobs: BlobStore,
                        extra_provenance: dict | None = None,
                        ) -> tuple[list[SupportRun], list[RunRecord]]:
    """Fetch or train the stage-1 seed set for one supporting task.

    Returns the full seed set plus the subset of records that were newly
    trained (missing from the store, or present without their state blob).
    """
    runs: list[SupportRun] = []
    new: list[RunRecord] = []
    for seed in seeds:
        run_id = _support_run_id(support, seed, config, tasks)
        if run_id in store:
            record = store.get(run_id)
            if record.best_state_hash and record.best_state_hash in blobs:
                runs.append(SupportRun(record, blobs.get(record.best_state_hash)))
                continue
        run = strategies.run_support_run(support, seed, config, tasks, factory)
        if extra_provenance:
            run = SupportRun(
                replace(run.record,
                        provenance={**run.record.provenance, **extra_provenance}),
                run.best_token)
        blobs.put(run.best_token)
        if store.append(run.record):
            new.append(run.record)
        runs.append(run)
    return runs, new


@dataclass(frozen=True)
class MatrixOutcome:
    new_records: tuple[RunRecord, ...]
    matrix: SignificanceMatrix


def run_matrix(plan: ExperimentPlan, tasks: Mapping[str, TaskData],
               factory: BackendFactory, store: RunStore, blobs: BlobStore,
               workers: int = 1, alpha: float = DEFAULT_ALPHA,
               variant: TestVariant = TestVariant.WELCH) -> MatrixOutcome:
    """Both pairwise methods over every ordered (target, support) pair."""
    if plan.kind is not PlanKind.MATRIX:
        raise ValidationError(f"expected a matrix plan, got {plan.kind.value}")
    ids = sorted(plan.task_ids)
    missing = [t for t in ids if t not in tasks]
    if missing:
        raise ValidationError(f"tasks without data: {missing}")
    policy = plan.policy or SamplingPolicy(PolicyKind.DYNAMIC)

    new: list[RunRecord] = []
    # Stage 1 first: stage-2 jobs need each support's best model.
    supports: dict[str, list[SupportRun]] = {}
    for support in ids:
        supports[support], fresh = ensure_support_runs(
            support, plan.seeds, plan.config, tasks, factory, store, blobs)
        new.extend(fresh)
    jobs: list[Callable[[], list[RunRecord]]] = []
    for target in ids:
        for support in ids:
            if target == support:
                continue
            chosen = best_support(supports[support])
            for seed in plan.seeds:
                jobs.append(_stilts_target_job(
                    support, target, seed, chosen, plan.config, tasks, factory, store))
                jobs.append(_mtl_pair_job(
                    target, support, seed, plan.config, tasks, factory, store, policy))
    new.extend(_run_jobs(jobs, store, workers))
    matrix = matrix_from_store(store, alpha=alpha, variant=variant)
    return MatrixOutcome(new_records=tuple(new), matrix=matrix)


def _stilts_target_job(support, target, seed, chosen, config, tasks, factory, store):
    identity = run_identity(Strategy.STILTS, Stage.TARGET, target, [support], seed,
                            PolicyKind.UNIFORM.value, config, tasks, [target, support])
    run_id = compute_run_id(identity)

    def job() -> list[RunRecord]:
        if run_id in store:
            return []
        return [strategies.run_stilts_target_run(
            support, target, seed, chosen, config, tasks, factory)]
    return job


def _mtl_pair_job(target, support, seed, config, tasks, factory, store, policy,
                  extra_provenance=None):
    identity = run_identity(Strategy.MTL_PAIR, Stage.JOINT, target, [support], seed,
                            policy.kind.value, config, tasks, [target, support])
    run_id = compute_run_id(identity)

    def job() -> list[RunRecord]:
        if run_id in store:
            return []
        return [strategies.run_mtl_pair_run(
            target, support, seed, config, tasks, factory, policy=policy,
            extra_provenance=extra_provenance)]
    return job


def run_mtl_all_plan(plan: ExperimentPlan, tasks: Mapping[str, TaskData],
                     factory: BackendFactory, store: RunStore,
                     workers: int = 1) -> list[RunRecord]:
    if plan.kind is not PlanKind.MTL_ALL:
        raise ValidationError(f"expected an mtl_all plan, got {plan.kind.value}")
    policy = plan.policy or SamplingPolicy(PolicyKind.SIZE)
    ids = sorted(plan.task_ids)
    jobs = []
    for seed in plan.seeds:
        identity = run_identity(Strategy.MTL_ALL, Stage.JOINT, None, ids, seed,
                                policy.kind.value, plan.config, tasks, ids)
        run_id = compute_run_id(identity)

        def job(seed=seed, run_id=run_id) -> list[RunRecord]:
            if run_id in store:
                return []
            return [strategies.run_mtl_all_run(ids, seed, plan.config, tasks,
                                               factory, policy=policy)]
        jobs.append(job)
    return _run_jobs(jobs, store, workers)


def sweep_support_size(proportion: float, effective_target_size: int) -> int:
    return math.floor(proportion * effective_target_size)


def sweep_task_data(plan: ExperimentPlan, tasks: Mapping[str, TaskData],
                    proportion: float) -> dict[str, TaskData]:
    """The pair's task map for one sweep point, with seeded subsamples applied."""
    sweep = plan.sweep
    target_data = tasks[plan.target]
    if sweep.target_fraction != 1.0:
        spec = SubsampleSpec(SubsampleMode.FRACTION, sweep.target_fraction,
                             seed=sweep.subsample_seed)
        reduced = subsample(target_data.train, spec)
        target_data = TaskData(
            spec=replace(target_data.spec, train_size=len(reduced)),
            train=reduced,
            dev=target_data.dev,
            provenance={"subsample": manifest_for(reduced, spec).as_dict()},
        )
    effective = len(target_data.train)
    support_data = tasks[plan.support]
    needed = sweep_support_size(proportion, effective)
    if needed > len(support_data.train):
        raise InsufficientDataError(
            f"proportion {proportion:g}: need {needed} support examples, "
            f"pool has {len(support_data.train)}")
    spec = SubsampleSpec(SubsampleMode.PROPORTION_OF_TARGET, proportion,
                         seed=sweep.subsample_seed,
                         allowed_proportions=sweep.proportions)
    sub = subsample(support_data.train, spec, target_size=effective)
    support_data = TaskData(
        spec=replace(support_data.spec, train_size=len(sub)),
        train=sub,
        dev=support_data.dev,
        provenance={"subsample": manifest_for(sub, spec).as_dict()},
    )
    return {plan.target: target_data, plan.support: support_data}


def run_size_sweep(plan: ExperimentPlan, tasks: Mapping[str, TaskData],
                   factory: BackendFactory, store: RunStore, blobs: BlobStore,
                   workers: int = 1) -> list[RunRecord]:
    """Both pairwise methods at every support-proportion point."""
    if plan.kind is not PlanKind.SIZE_SWEEP:
        raise ValidationError(f"expected a size_sweep plan, got {plan.kind.value}")
    policy = plan.policy or SamplingPolicy(PolicyKind.DYNAMIC)
    new: list[RunRecord] = []
    for proportion in plan.sweep.proportions:
        point_tasks = sweep_task_data(plan, tasks, proportion)
        tag = {"sweep": {
            "proportion": proportion,
            "target_fraction": plan.sweep.target_fraction,
            "target": plan.target,
            "support": plan.support,
        }}
        supports, fresh = ensure_support_runs(
            plan.support, plan.seeds, plan.config, point_tasks, factory, store,
            blobs, extra_provenance=tag)
        new.extend(fresh)
        chosen = best_support(supports)
        jobs = []
        for seed in plan.seeds:
            jobs.append(_stilts_sweep_job(plan, seed, chosen, point_tasks,
                                          factory, store, tag))
            jobs.append(_mtl_pair_job(plan.target, plan.support, seed, plan.config,
                                      point_tasks, factory, store, policy,
                                      extra_provenance=tag))
        new.extend(_run_jobs(jobs, store, workers))
    return new


def _stilts_sweep_job(plan, seed, chosen, point_tasks, factory, store, tag):
    identity = run_identity(Strategy.STILTS, Stage.TARGET, plan.target,
                            [plan.support], seed, PolicyKind.UNIFORM.value,
                            plan.config, point_tasks, [plan.target, plan.support])
    run_id = compute_run_id(identity)

    def job() -> list[RunRecord]:
        if run_id in store:
            return []
        return [strategies.run_stilts_target_run(
            plan.support, plan.target, seed, chosen, plan.config, point_tasks,
            factory, extra_provenance=tag)]
    return job


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

def _is_sweep(record: RunRecord) -> bool:
    return "sweep" in record.provenance


def _cell_samples(records: Sequence[RunRecord], strategy: Strategy,
                  stage: Stage) -> dict[tuple[str, str], list[float]]:
    grouped: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for rec in records:
        if rec.strategy is not strategy or rec.stage is not stage or _is_sweep(rec):
            continue
        cell = (rec.target_task, rec.support_tasks[0])
        grouped.setdefault(cell, []).append((rec.seed, rec.final_score))
    return {cell: [score for _, score in sorted(pairs)]
            for cell, pairs in grouped.items()}


def matrix_from_store(store: RunStore, alpha: float = DEFAULT_ALPHA,
                      variant: TestVariant = TestVariant.WELCH) -> SignificanceMatrix:
    records = store.records()
    mtl = _cell_samples(records, Strategy.MTL_PAIR, Stage.JOINT)
    stilts = _cell_samples(records, Strategy.STILTS, Stage.TARGET)
    if not mtl and not stilts:
        raise ValidationError("store has no pairwise runs to analyze")
    return build_significance_matrix(mtl, stilts, alpha=alpha, variant=variant)


def mtl_all_rows(records: Sequence[RunRecord]) -> dict[str, dict[str, float]]:
    """Per-policy, per-task mean scores over seeds from all-task runs."""
    by_policy: dict[str, dict[str, list[tuple[int, float]]]] = {}
    for rec in records:
        if rec.strategy is not Strategy.MTL_ALL or _is_sweep(rec):
            continue
        per_task = by_policy.setdefault(rec.sampling_policy, {})
        for task_id, score in rec.per_task_scores.items():
            per_task.setdefault(task_id, []).append((rec.seed, score))
    return {
        policy: {
            t: sum(s for _, s in scores) / len(scores)
            for t, scores in sorted(per_task.items())
        }
        for policy, per_task in sorted(by_policy.items())
    }


def sweep_series(records: Sequence[RunRecord]) -> dict[float, dict[str, dict[float, list[float]]]]:
    """target_fraction -> method -> proportion -> seed-ordered scores."""
    out: dict[float, dict[str, dict[float, list[tuple[int, float]]]]] = {}
    for rec in records:
        if not _is_sweep(rec):
            continue
        if rec.stage is Stage.SUPPORT:
            continue
        info = rec.provenance["sweep"]
        method = rec.strategy.value
        fraction = float(info["target_fraction"])
        k = float(info["proportion"])
        out.setdefault(fraction, {}).setdefault(method, {}).setdefault(k, []).append(
            (rec.seed, rec.final_score))
    return {
        fraction: {
            method: {k: [s for _, s in sorted(pairs)] for k, pairs in sorted(ks.items())}
            for method, ks in sorted(methods.items())
        }
        for fraction, methods in sorted(out.items())
    }


@dataclass(frozen=True)
class AnalysisSummary:
    matrix: SignificanceMatrix | None
    table: AggregateTable | None
    heuristic_report: object | None
    sweep_plots: dict[float, SweepPlot] = field(default_factory=dict)
    paths: dict[str, str] = field(default_factory=dict)
    notes: tuple[str, ...] = ()


def analyze(store: RunStore, sizes: Mapping[str, int], out_dir: str | Path,
            alpha: float = DEFAULT_ALPHA,
            variant: TestVariant = TestVariant.WELCH,
            tiebreak: Prediction = Prediction.MTL_PAIR,
            display_names: Mapping[str, str] | None = None,
            machine_readable: bool = True) -> AnalysisSummary:
    """Compose significance testing, the size heuristic and reporting over a store.

    ``machine_readable=False`` renders only the human-facing artifacts
    (figures, aligned table, summary).
    """
    records = store.records()
    if not records:
        raise ValidationError("run store is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, str] = {}
    notes: list[str] = []

    has_pairwise = any(
        not _is_sweep(r) and (
            (r.strategy is Strategy.MTL_PAIR and r.stage is Stage.JOINT)
            or (r.strategy is Strategy.STILTS and r.stage is Stage.TARGET))
        for r in records)
    has_sweep = any(_is_sweep(r) for r in records)
    if not has_pairwise and not has_sweep:
        raise ValidationError("store holds no analyzable pairwise or sweep runs")

    matrix = None
    table = None
    report = None
    if has_pairwise:
        matrix = matrix_from_store(store, alpha=alpha, variant=variant)
        report = heuristic_accuracy(matrix, sizes)
        predictions = predict_matrix(matrix, sizes)

        if machine_readable:
            write_difference_grid(matrix, sizes, out_dir / "difference_grid.tsv")
            paths["difference_grid"] = str(out_dir / "difference_grid.tsv")
            _write_cells(matrix, out_dir / "cells.jsonl")
            paths["cells"] = str(out_dir / "cells.jsonl")
            _write_predictions(matrix, predictions, sizes, out_dir / "predictions.tsv")
            paths["predictions"] = str(out_dir / "predictions.tsv")
        render_heatmap(matrix, sizes, predictions, out_dir / "heatmap.svg",
                       display_names=display_names)
        paths["heatmap"] = str(out_dir / "heatmap.svg")

        rows = mtl_all_rows(records)
        if not rows:
            targets = sorted({t for t, _ in matrix.cells})
            if len(targets) == 2:
                # With exactly two tasks, joint training on "all" tasks is the
                # pair itself; reuse the pairwise joint scores.
                policy_names = sorted({
                    r.sampling_policy for r in records
                    if r.strategy is Strategy.MTL_PAIR and not _is_sweep(r)})
                label = policy_names[0] if len(policy_names) == 1 else "pair"
                rows = {label: {
                    t: next(r.mtl_mean for (tt, _), r in sorted(matrix.cells.items())
                            if tt == t)
                    for t in targets
                }}
                notes.append("all-task rows derived from pairwise joint runs "
                             "(two-task store)")
            else:
                notes.append("all-task rows omitted: no all-task runs in store")
        table = aggregate_table(matrix, rows or None, sizes, tiebreak=tiebreak,
                                require_mtl_all=bool(rows))
        if machine_readable:
            write_table_tsv(table, out_dir / "aggregate_table.tsv")
            paths["aggregate_table"] = str(out_dir / "aggregate_table.tsv")
        (out_dir / "aggregate_table.txt").write_text(format_table_text(table),
                                                     encoding="utf-8")
        paths["aggregate_table_text"] = str(out_dir / "aggregate_table.txt")

    sweep_plots: dict[float, SweepPlot] = {}
    if has_sweep:
        for fraction, series in sweep_series(records).items():
            tag = f"{fraction:g}".replace(".", "_")
            svg = out_dir / f"size_sweep_fraction_{tag}.svg"
            plot = render_size_sweep(
                series, svg,
                title=f"Support-size sweep (target fraction {fraction:g})")
            sweep_plots[fraction] = plot
            paths[f"sweep_svg_{fraction:g}"] = str(svg)
            if machine_readable:
                tsv = out_dir / f"size_sweep_fraction_{tag}.tsv"
                write_sweep_tsv(plot, tsv)
                paths[f"sweep_tsv_{fraction:g}"] = str(tsv)

    summary_path = out_dir / "summary.txt"
    _write_summary(summary_path, matrix, report, table, sweep_plots, notes, alpha)
    paths["summary"] = str(summary_path)
    return AnalysisSummary(matrix=matrix, table=table, heuristic_report=report,
                           sweep_plots=sweep_plots, paths=paths,
                           notes=tuple(notes))


def _write_cells(matrix: SignificanceMatrix, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (target, support), r in sorted(matrix.cells.items()):
            fh.write(json.dumps({
                "target": target,
                "support": support,
                "mtl_mean": r.mtl_mean,
                "mtl_std": r.mtl_std,
                "stilts_mean": r.stilts_mean,
                "stilts_std": r.stilts_std,
                "difference": r.difference,
                "label": r.label.value,
                "t_statistic": r.test.t_statistic,
                "degrees_of_freedom": r.test.degrees_of_freedom,
                "p_value": r.test.p_value,
                "significant": r.test.significant,
                "alpha": r.test.alpha,
                "variant": r.test.variant.value,
            }, sort_keys=True) + "\n")


def _write_predictions(matrix: SignificanceMatrix, predictions, sizes,
                       path: Path) -> None:
    order = order_by_size(matrix.task_ids(), sizes)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("target\\support\t" + "\t".join(order) + "\n")
        for target in order:
            row = []
            for support in order:
                if (target, support) not in predictions:
                    row.append("")
                else:
                    row.append(predictions[(target, support)].predicted.value)
            fh.write(target + "\t" + "\t".join(row) + "\n")


def _write_summary(path: Path, matrix, report, table, sweep_plots, notes,
                   alpha: float) -> None:
    lines: list[str] = []
    if matrix is not None:
        significant = matrix.significant_cells()
        lines.append(f"cells analyzed: {len(matrix.cells)}")
        lines.append(f"significant cells (alpha={alpha:g}): {len(significant)}")
        accuracy = report.accuracy_percent
        shown = "absent (no significant cells)" if accuracy is None else f"{accuracy:.1f}%"
        lines.append(
            f"size-heuristic accuracy: {report.correct}/{report.total_significant} = {shown}")
        if report.misses:
            named = ", ".join(f"({t}, {s})" for t, s in report.misses)
            lines.append(f"misclassified cells: {named}")
        else:
            lines.append("misclassified cells: none")
    if table is not None:
        lines.append("aggregate row means:")
        for name in table.rows:
            lines.append(f"  {name}: {display_round(table.mean_column[name]):.1f}")
    for fraction in sorted(sweep_plots):
        plot = sweep_plots[fraction]
        lines.append(f"size sweep (target fraction {fraction:g}): "
                     f"{len(plot.points)} points, {int(plot.confidence * 100)}% CI")
    for note in notes:
        lines.append(f"note: {note}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
