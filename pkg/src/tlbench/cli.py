"""Command-line entry point.

One subcommand per experiment: ``run-pair``, ``run-matrix``,
``run-size-sweep``, ``run-mtl-all``, plus ``analyze`` and ``report`` over a
run store. Tasks come from a suite file (JSON; synthetic generators or
TSV/JSONL paths); ``--suite glue`` loads the built-in GLUE registry, which has
sizes but no data and therefore only supports ``--dry-run`` and analysis.
Every flag can also live in a ``--config`` JSON file; flags override it.
"""

from __future__ import annotations

import argparse
import importlib
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .backends import tiny_backend_factory
from .data import Split, load_split, make_synthetic_task
from .engine import TaskData, TrainConfig
from .errors import TlbenchError, ValidationError
from .experiments import (ExperimentPlan, PlanKind, SweepSettings, analyze,
                          dry_run, run_matrix, run_mtl_all_plan,
                          run_size_sweep)
from .heuristic import Prediction
from .scheduler import PolicyKind, SamplingPolicy
from .stats import TestVariant
from .store import BlobStore, RunStore
from .tasks import (DataFormat, MetricKind, Registry, TaskSpec,
                    builtin_glue_registry)

_CONFIG_KEYS = {
    "tasks", "target", "support", "seeds", "policy", "alpha", "epochs",
    "batch_size", "learning_rate", "checkpoint_interval", "seed", "backend",
    "out", "store", "jobs", "suite", "proportions", "target_fraction",
    "subsample_seed", "tiebreak", "variant",
}


def load_suite(path_or_name: str, base_dir: Path | None = None):
    """Load a suite: (registry, task data map). ``glue`` has sizes only."""
    if path_or_name == "glue":
        return builtin_glue_registry(), {}
    path = Path(path_or_name)
    base = base_dir or path.parent
    payload = json.loads(path.read_text(encoding="utf-8"))
    registry = Registry()
    data: dict[str, TaskData] = {}
    for entry in payload["tasks"]:
        task_id = entry["task_id"]
        if "synthetic" in entry:
            syn = entry["synthetic"]
            spec, train, dev = make_synthetic_task(
                task_id,
                n_train=syn["n_train"],
                n_dev=syn["n_dev"],
                n_features=syn.get("n_features", 400),
                class_count=syn.get("classes", 2),
                noise=syn.get("noise", 0.0),
                seed=syn.get("seed", 0),
            )
            registry.register(spec)
            data[task_id] = TaskData(spec=spec, train=train, dev=dev)
            continue
        fmt = DataFormat(entry["format"])
        train_path = base / entry["train"]
        dev_path = base / entry["dev"]
        labels = entry["labels"]
        spec = TaskSpec(
            task_id=task_id,
            display_name=entry.get("display_name", task_id),
            train_size=0,  # replaced once the split is loaded
            dev_size=0,
            metric_kind=MetricKind(entry.get("metric", "accuracy")),
            data_format=fmt,
            label_space=tuple(labels),
        )
        train = load_split(train_path, spec, Split.TRAIN)
        dev = load_split(dev_path, spec, Split.DEV)
        spec = replace(spec, train_size=len(train), dev_size=len(dev))
        registry.register(spec)
        data[task_id] = TaskData(spec=spec, train=train, dev=dev)
    return registry, data


def _resolve_backend(name: str):
    if name == "tiny":
        return tiny_backend_factory()
    if ":" not in name:
        raise ValidationError(
            f"unknown backend {name!r}; use 'tiny' or 'module.path:factory'")
    module_name, attr = name.split(":", 1)
    module = importlib.import_module(module_name)
    return getattr(module, attr)


def _parse_seeds(raw: str) -> tuple[int, ...]:
    return tuple(int(s) for s in raw.split(",") if s.strip())


def _parse_proportions(raw: str) -> tuple[float, ...]:
    return tuple(float(Fraction(p.strip())) for p in raw.split(",") if p.strip())


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--suite", help="suite JSON path, or 'glue' for the "
                        "built-in size registry (dry-run/analysis only)")
    parser.add_argument("--config", help="JSON file of flag defaults")
    parser.add_argument("--store", help="run store path (default runs/store.jsonl)")
    parser.add_argument("--seeds", help="comma-separated seeds (default 0,1,2,3,4)")
    parser.add_argument("--policy", choices=[k.value for k in PolicyKind])
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--learning-rate", type=float, dest="learning_rate")
    parser.add_argument("--checkpoint-interval", type=float, dest="checkpoint_interval")
    parser.add_argument("--seed", type=int, help="base seed recorded in the config")
    parser.add_argument("--backend", help="'tiny' or 'module.path:factory'")
    parser.add_argument("--jobs", type=int, help="parallel worker count")
    parser.add_argument("--dry-run", action="store_true",
                        help="print planned record counts and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlbench",
        description="Compare transfer-learning strategies: intermediate "
                    "fine-tuning vs pairwise and all-task joint training.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pair = sub.add_parser("run-pair", help="both methods for one (target, support) pair")
    _add_common(p_pair)
    p_pair.add_argument("--target", required=True)
    p_pair.add_argument("--support", required=True)

    p_matrix = sub.add_parser("run-matrix", help="both methods over every ordered pair")
    _add_common(p_matrix)
    p_matrix.add_argument("--tasks", help="comma-separated task subset (default: all)")

    p_sweep = sub.add_parser("run-size-sweep", help="vary the support pool size around the target")
    _add_common(p_sweep)
    p_sweep.add_argument("--target", required=True)
    p_sweep.add_argument("--support", required=True)
    p_sweep.add_argument("--proportions",
                         help="comma list, fractions allowed (default 1/3,1/2,1,2,3)")
    p_sweep.add_argument("--target-fraction", type=float, dest="target_fraction",
                         help="1.0 or 0.5 (default 1.0)")
    p_sweep.add_argument("--subsample-seed", type=int, dest="subsample_seed")

    p_all = sub.add_parser("run-mtl-all", help="joint training over every task")
    _add_common(p_all)
    p_all.add_argument("--tasks", help="comma-separated task subset (default: all)")

    for name, help_text in (("analyze", "build matrix, tables, figures and summary"),
                            ("report", "re-render the human-facing artifacts")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--suite", required=True)
        p.add_argument("--config")
        p.add_argument("--store")
        p.add_argument("--out")
        p.add_argument("--alpha", type=float)
        p.add_argument("--tiebreak", choices=["mtl_pair", "stilts"])
        p.add_argument("--variant", choices=[v.value for v in TestVariant])
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    merged: dict = {}
    if getattr(args, "config", None):
        file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(file_values) - _CONFIG_KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in vars(args).items():
        if key in ("command", "config", "dry_run"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _train_config(opts: dict) -> TrainConfig:
    return TrainConfig(
        epochs=opts.get("epochs", 10),
        batch_size=opts.get("batch_size", 128),
        learning_rate=opts.get("learning_rate", 2e-5),
        checkpoint_interval=opts.get("checkpoint_interval", 0.5),
        seed=opts.get("seed", 0),
    )


def _policy(opts: dict, default_kind: PolicyKind) -> SamplingPolicy:
    kind = PolicyKind(opts["policy"]) if "policy" in opts else default_kind
    return SamplingPolicy(kind)


def _stores(opts: dict) -> tuple[RunStore, BlobStore]:
    store_path = Path(opts.get("store", "runs/store.jsonl"))
    store_path.parent.mkdir(parents=True, exist_ok=True)
    return RunStore(store_path), BlobStore(store_path.parent / "blobs")


def _require_data(data: dict, ids) -> None:
    missing = sorted(set(ids) - set(data))
    if missing:
        raise ValidationError(
            f"suite has no data for tasks {missing}; the glue suite is size-only "
            "(usable with --dry-run and analyze)")


def _plan_tasks(opts: dict, registry: Registry) -> tuple[str, ...]:
    if opts.get("tasks"):
        ids = tuple(t.strip() for t in opts["tasks"].split(",") if t.strip())
        for t in ids:
            registry.get(t)  # raises UnknownTaskError
        return ids
    return tuple(registry.task_ids())


def _print_counts(plan: ExperimentPlan) -> None:
    counts = dry_run(plan)
    print(f"plan: {plan.kind.value} over {len(plan.task_ids)} tasks, "
          f"{len(plan.seeds)} seeds")
    for key, value in counts.as_dict().items():
        print(f"  {key}: {value}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except TlbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    opts = _merge_config(args)
    if args.command in ("analyze", "report"):
        return _cmd_analyze(opts, machine_readable=args.command == "analyze")

    if "suite" not in opts:
        raise ValidationError("--suite is required")
    registry, data = load_suite(opts["suite"])
    config = _train_config(opts)
    seeds = _parse_seeds(opts["seeds"]) if "seeds" in opts else (0, 1, 2, 3, 4)
    jobs = opts.get("jobs", 1)

    if args.command == "run-pair":
        plan = ExperimentPlan(
            kind=PlanKind.PAIR, task_ids=(opts["target"], opts["support"]),
            seeds=seeds, config=config,
            policy=_policy(opts, PolicyKind.DYNAMIC),
            target=opts["target"], support=opts["support"])
    elif args.command == "run-matrix":
        plan = ExperimentPlan(
            kind=PlanKind.MATRIX, task_ids=_plan_tasks(opts, registry),
            seeds=seeds, config=config,
            policy=_policy(opts, PolicyKind.DYNAMIC))
    elif args.command == "run-size-sweep":
        sweep = SweepSettings(
            target_fraction=opts.get("target_fraction", 1.0),
            proportions=(_parse_proportions(opts["proportions"])
                         if "proportions" in opts else SweepSettings().proportions),
            subsample_seed=opts.get("subsample_seed", 0))
        plan = ExperimentPlan(
            kind=PlanKind.SIZE_SWEEP, task_ids=(opts["target"], opts["support"]),
            seeds=seeds, config=config,
            policy=_policy(opts, PolicyKind.DYNAMIC),
            target=opts["target"], support=opts["support"], sweep=sweep)
    elif args.command == "run-mtl-all":
        plan = ExperimentPlan(
            kind=PlanKind.MTL_ALL, task_ids=_plan_tasks(opts, registry),
            seeds=seeds, config=config,
            policy=_policy(opts, PolicyKind.SIZE))
    else:
        raise ValidationError(f"unknown command {args.command}")

    if args.dry_run:
        _print_counts(plan)
        return 0

    factory = _resolve_backend(opts.get("backend", "tiny"))
    store, blobs = _stores(opts)
    if plan.kind is PlanKind.MATRIX:
        _require_data(data, plan.task_ids)
        outcome = run_matrix(plan, data, factory, store, blobs, workers=jobs)
        print(f"matrix complete: {len(outcome.new_records)} new records, "
              f"{len(store)} total; {len(outcome.matrix.cells)} cells")
    elif plan.kind is PlanKind.PAIR:
        _require_data(data, plan.task_ids)
        matrix_plan = ExperimentPlan(
            kind=PlanKind.MATRIX, task_ids=plan.task_ids, seeds=plan.seeds,
            config=plan.config, policy=plan.policy)
        pair_data = {t: data[t] for t in plan.task_ids}
        outcome = run_matrix(matrix_plan, pair_data, factory, store, blobs,
                             workers=jobs)
        print(f"pair complete: {len(outcome.new_records)} new records, "
              f"{len(store)} total")
    elif plan.kind is PlanKind.SIZE_SWEEP:
        _require_data(data, plan.task_ids)
        sweep_data = {t: data[t] for t in plan.task_ids}
        new = run_size_sweep(plan, sweep_data, factory, store, blobs, workers=jobs)
        print(f"sweep complete: {len(new)} new records, {len(store)} total")
    else:
        _require_data(data, plan.task_ids)
        new = run_mtl_all_plan(plan, data, factory, store, workers=jobs)
        print(f"all-task runs complete: {len(new)} new records, {len(store)} total")
    return 0


def _cmd_analyze(opts: dict, machine_readable: bool) -> int:
    registry, _ = load_suite(opts["suite"])
    store, _ = _stores(opts)
    sizes = {spec.task_id: spec.train_size for spec in registry}
    names = {spec.task_id: spec.display_name for spec in registry}
    summary = analyze(
        store, sizes,
        out_dir=opts.get("out", "analysis"),
        alpha=opts.get("alpha", 0.1),
        variant=TestVariant(opts.get("variant", "welch")),
        tiebreak=Prediction(opts.get("tiebreak", "mtl_pair")),
        display_names=names,
        machine_readable=machine_readable,
    )
    print(Path(summary.paths["summary"]).read_text(encoding="utf-8"), end="")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
