"""The three transfer-learning strategy pipelines.

* STILTS: train on the supporting task first (one run per seed), pick the best
  of those models, then fine-tune it on the target task with a fresh set of
  seeds. Support models are trained once per task and reused as the
  initialization for every target.
* MTL_PAIR: joint two-task training over a heterogeneous batch schedule,
  checkpoint-selected on the target task's dev metric.
* MTL_ALL: joint training over every registered task, checkpoint-selected on
  the macro mean of normalized dev metrics, with one recorded score per task.

Every run is an independent, seeded job; run ids are content hashes of the
run's full identity so re-execution is idempotent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from .engine import (TaskData, TrainConfig, Trainable, select_macro_mean,
                     select_on, train)
from .errors import ValidationError
from .scheduler import PolicyKind, PolicySchedule, SamplingPolicy
from .tasks import TaskSpec

BackendFactory = Callable[[Sequence[TaskSpec], TrainConfig], Trainable]

DEFAULT_SEEDS = (0, 1, 2, 3, 4)


class Strategy(Enum):
    STILTS = "stilts"
    MTL_PAIR = "mtl_pair"
    MTL_ALL = "mtl_all"


class Stage(Enum):
    SUPPORT = "support"
    TARGET = "target"
    JOINT = "joint"


@dataclass(frozen=True, slots=True)
class RunRecord:
    run_id: str
    strategy: Strategy
    stage: Stage
    target_task: str | None
    support_tasks: tuple[str, ...]
    seed: int
    sampling_policy: str
    final_score: float  # 0-100 scale; macro mean for MTL_ALL
    per_task_scores: dict[str, float]
    selection_score: float
    checkpoint_history: tuple[dict, ...]
    provenance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    best_state_hash: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "strategy": self.strategy.value,
            "stage": self.stage.value,
            "target_task": self.target_task,
            "support_tasks": list(self.support_tasks),
            "seed": self.seed,
            "sampling_policy": self.sampling_policy,
            "final_score": self.final_score,
            "per_task_scores": dict(sorted(self.per_task_scores.items())),
            "selection_score": self.selection_score,
            "checkpoint_history": list(self.checkpoint_history),
            "provenance": self.provenance,
            "config": self.config,
            "best_state_hash": self.best_state_hash,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "RunRecord":
        return cls(
            run_id=rec["run_id"],
            strategy=Strategy(rec["strategy"]),
            stage=Stage(rec["stage"]),
            target_task=rec["target_task"],
            support_tasks=tuple(rec["support_tasks"]),
            seed=rec["seed"],
            sampling_policy=rec["sampling_policy"],
            final_score=rec["final_score"],
            per_task_scores=dict(rec["per_task_scores"]),
            selection_score=rec["selection_score"],
            checkpoint_history=tuple(rec["checkpoint_history"]),
            provenance=rec.get("provenance", {}),
            config=rec.get("config", {}),
            best_state_hash=rec.get("best_state_hash"),
        )


@dataclass(frozen=True, slots=True)
class SupportRun:
    """A stage-1 run together with the state needed to initialize stage 2."""

    record: RunRecord
    best_token: bytes


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def compute_run_id(identity: dict) -> str:
    return hashlib.sha256(canonical_json(identity).encode()).hexdigest()[:16]


def run_identity(strategy: Strategy, stage: Stage, target: str | None,
                 supports: Sequence[str], seed: int, policy_kind: str,
                 config: TrainConfig, tasks: Mapping[str, TaskData],
                 scheduled: Sequence[str]) -> dict:
    return {
        "v": 1,
        "strategy": strategy.value,
        "stage": stage.value,
        "target": target,
        "supports": sorted(supports),
        "seed": seed,
        "policy": policy_kind,
        "config": config.digest_fields(),
        "data": [
            [t, len(tasks[t].train), tasks[t].provenance]
            for t in sorted(scheduled)
        ],
        "universe": sorted(tasks),
    }


def _universe_specs(tasks: Mapping[str, TaskData]) -> list[TaskSpec]:
    return [tasks[t].spec for t in sorted(tasks)]


def _check_seeds(seeds: Sequence[int]) -> None:
    if not seeds:
        raise ValidationError("need at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValidationError(f"duplicate seeds: {list(seeds)}")


def _data_provenance(tasks: Mapping[str, TaskData], scheduled: Sequence[str]) -> dict:
    prov = {t: tasks[t].provenance for t in sorted(scheduled) if tasks[t].provenance}
    return {"data": prov} if prov else {}


def _execute(scheduled: Sequence[str], policy: SamplingPolicy, seed: int,
             config: TrainConfig, tasks: Mapping[str, TaskData],
             factory: BackendFactory, selection_rule,
             init_token: bytes | None = None):
    backend = factory(_universe_specs(tasks), config)
    backend.init(seed)
    if init_token is not None:
        backend.restore(init_token)
    sizes = {t: len(tasks[t].train) for t in scheduled}
    source = PolicySchedule(policy, sizes, config.batch_size, seed)
    result = train(backend, source, tasks, config, selection_rule)
    return result, backend


def _scores(result, scheduled: Sequence[str]) -> dict[str, float]:
    return {t: 100.0 * result.best.per_task_dev[t] for t in sorted(scheduled)}


def run_support_run(support: str, seed: int, config: TrainConfig,
                    tasks: Mapping[str, TaskData], factory: BackendFactory) -> SupportRun:
    """One stage-1 run: single-task training on the supporting task."""
    policy = SamplingPolicy(PolicyKind.UNIFORM)
    result, _ = _execute([support], policy, seed, config, tasks, factory,
                         select_on(support))
    identity = run_identity(Strategy.STILTS, Stage.SUPPORT, None, [support], seed,
                            policy.kind.value, config, tasks, [support])
    token = result.best.state_token
    record = RunRecord(
        run_id=compute_run_id(identity),
        strategy=Strategy.STILTS,
        stage=Stage.SUPPORT,
        target_task=None,
        support_tasks=(support,),
        seed=seed,
        sampling_policy=policy.kind.value,
        final_score=100.0 * result.best.per_task_dev[support],
        per_task_scores=_scores(result, [support]),
        selection_score=result.best.selection_score,
        checkpoint_history=tuple(r.summary() for r in result.history),
        provenance=_data_provenance(tasks, [support]),
        config=config.digest_fields(),
        best_state_hash=hashlib.sha256(token).hexdigest(),
    )
    return SupportRun(record=record, best_token=token)


def best_support(runs: Sequence[SupportRun]) -> SupportRun:
    """Argmax by stage-1 selection score; ties keep the earliest run."""
    best = runs[0]
    for run in runs[1:]:
        if run.record.selection_score > best.record.selection_score:
            best = run
    return best


def run_stilts_target_run(support: str, target: str, seed: int,
                          chosen: SupportRun, config: TrainConfig,
                          tasks: Mapping[str, TaskData], factory: BackendFactory,
                          extra_provenance: dict | None = None) -> RunRecord:
    """One stage-2 run: fine-tune the chosen support model on the target task."""
    policy = SamplingPolicy(PolicyKind.UNIFORM)
    result, _ = _execute([target], policy, seed, config, tasks, factory,
                         select_on(target), init_token=chosen.best_token)
    identity = run_identity(Strategy.STILTS, Stage.TARGET, target, [support], seed,
                            policy.kind.value, config, tasks, [target, support])
    provenance = _data_provenance(tasks, [target, support])
    provenance["initialized_from"] = chosen.record.run_id
    if extra_provenance:
        provenance.update(extra_provenance)
    return RunRecord(
        run_id=compute_run_id(identity),
        strategy=Strategy.STILTS,
        stage=Stage.TARGET,
        target_task=target,
        support_tasks=(support,),
        seed=seed,
        sampling_policy=policy.kind.value,
        final_score=100.0 * result.best.per_task_dev[target],
        per_task_scores=_scores(result, [target]),
        selection_score=result.best.selection_score,
        checkpoint_history=tuple(r.summary() for r in result.history),
        provenance=provenance,
        config=config.digest_fields(),
    )


def run_stilts(support: str, target: str, seeds: Sequence[int],
               config: TrainConfig, tasks: Mapping[str, TaskData],
               factory: BackendFactory,
               support_runs: Sequence[SupportRun] | None = None,
               extra_provenance: dict | None = None) -> list[RunRecord]:
    """Full two-stage pipeline for one (support, target) pair.

    Pass ``support_runs`` to reuse precomputed stage-1 models (the full-matrix
    protocol trains each task's support models once).
    """
    if support == target:
        raise ValidationError("support and target must be distinct tasks")
    _check_seeds(seeds)
    if support_runs is None:
        support_runs = [run_support_run(support, s, config, tasks, factory)
                        for s in seeds]
    chosen = best_support(support_runs)
    records = [run.record for run in support_runs]
    for seed in seeds:
        records.append(run_stilts_target_run(
            support, target, seed, chosen, config, tasks, factory,
            extra_provenance=extra_provenance))
    return records


def run_mtl_pair_run(target: str, support: str, seed: int, config: TrainConfig,
                     tasks: Mapping[str, TaskData], factory: BackendFactory,
                     policy: SamplingPolicy | None = None,
                     extra_provenance: dict | None = None) -> RunRecord:
    """One joint two-task run, checkpoint-selected on the target dev metric."""
    if support == target:
        raise ValidationError("support and target must be distinct tasks")
    policy = policy or SamplingPolicy(PolicyKind.DYNAMIC)
    scheduled = [target, support]
    result, _ = _execute(scheduled, policy, seed, config, tasks, factory,
                         select_on(target))
    identity = run_identity(Strategy.MTL_PAIR, Stage.JOINT, target, [support], seed,
                            policy.kind.value, config, tasks, scheduled)
    provenance = _data_provenance(tasks, scheduled)
    if extra_provenance:
        provenance.update(extra_provenance)
    return RunRecord(
        run_id=compute_run_id(identity),
        strategy=Strategy.MTL_PAIR,
        stage=Stage.JOINT,
        target_task=target,
        support_tasks=(support,),
        seed=seed,
        sampling_policy=policy.kind.value,
        final_score=100.0 * result.best.per_task_dev[target],
        per_task_scores=_scores(result, scheduled),
        selection_score=result.best.selection_score,
        checkpoint_history=tuple(r.summary() for r in result.history),
        provenance=provenance,
        config=config.digest_fields(),
    )


def run_mtl_pair(target: str, support: str, seeds: Sequence[int],
                 config: TrainConfig, tasks: Mapping[str, TaskData],
                 factory: BackendFactory,
                 policy: SamplingPolicy | None = None,
                 extra_provenance: dict | None = None) -> list[RunRecord]:
    _check_seeds(seeds)
    return [run_mtl_pair_run(target, support, seed, config, tasks, factory,
                             policy=policy, extra_provenance=extra_provenance)
            for seed in seeds]


def run_mtl_all_run(task_ids: Sequence[str], seed: int, config: TrainConfig,
                    tasks: Mapping[str, TaskData], factory: BackendFactory,
                    policy: SamplingPolicy | None = None) -> RunRecord:
    """One joint run over every task, selected on the macro-mean dev metric."""
    if len(task_ids) < 3:
        raise ValidationError("all-task training needs at least 3 tasks; use the "
                              "pairwise pipeline for 2")
    if len(set(task_ids)) != len(task_ids):
        raise ValidationError("duplicate task ids")
    policy = policy or SamplingPolicy(PolicyKind.SIZE)
    scheduled = sorted(task_ids)
    kinds = {t: tasks[t].spec.metric_kind for t in scheduled}
    result, _ = _execute(scheduled, policy, seed, config, tasks, factory,
                         select_macro_mean(kinds))
    identity = run_identity(Strategy.MTL_ALL, Stage.JOINT, None, scheduled, seed,
                            policy.kind.value, config, tasks, scheduled)
    scores = _scores(result, scheduled)
    return RunRecord(
        run_id=compute_run_id(identity),
        strategy=Strategy.MTL_ALL,
        stage=Stage.JOINT,
        target_task=None,
        support_tasks=tuple(scheduled),
        seed=seed,
        sampling_policy=policy.kind.value,
        final_score=sum(scores.values()) / len(scores),
        per_task_scores=scores,
        selection_score=result.best.selection_score,
        checkpoint_history=tuple(r.summary() for r in result.history),
        provenance=_data_provenance(tasks, scheduled),
        config=config.digest_fields(),
    )


def run_mtl_all(task_ids: Sequence[str], seeds: Sequence[int], config: TrainConfig,
                tasks: Mapping[str, TaskData], factory: BackendFactory,
                policy: SamplingPolicy | None = None) -> list[RunRecord]:
    _check_seeds(seeds)
    return [run_mtl_all_run(task_ids, seed, config, tasks, factory, policy=policy)
            for seed in seeds]
