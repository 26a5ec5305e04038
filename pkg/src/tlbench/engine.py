"""Seeded training loop with periodic checkpointing and best-checkpoint selection.

The loop is backend-agnostic: anything satisfying :class:`Trainable` can be
driven. Checkpoints are taken every ``checkpoint_interval`` epochs (default
every half epoch, 20 checkpoints over the default 10 epochs); the checkpoint
with the best selection score wins and its state is restored before the loop
returns, so callers always end up with the best dev-set model rather than the
last one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence, runtime_checkable

from . import metrics
from .data import Example, SplitData
from .errors import RunError, ValidationError
from .scheduler import PolicyKind, PolicySchedule
from .tasks import MetricKind, TaskSpec


@dataclass(frozen=True, slots=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 128
    learning_rate: float = 2e-5  # passed through to the backend untouched
    checkpoint_interval: float = 0.5  # epochs
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 < self.checkpoint_interval <= self.epochs:
            raise ValidationError(
                f"checkpoint_interval must be in (0, epochs], got {self.checkpoint_interval}")

    def digest_fields(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "checkpoint_interval": self.checkpoint_interval,
        }


@runtime_checkable
class Trainable(Protocol):
    """Contract every training backend satisfies.

    restore(snapshot()) must be an exact round trip, and init(seed) must be
    deterministic: equal seeds plus equal schedules give equal evaluations.
    """

    def init(self, seed: int) -> None: ...

    def train_step(self, task_id: str, batch: Sequence[Example]) -> float: ...

    def evaluate(self, task_id: str, split: SplitData) -> float: ...

    def snapshot(self) -> bytes: ...

    def restore(self, token: bytes) -> None: ...


@dataclass(frozen=True, slots=True)
class TaskData:
    """One task's spec plus its attached splits (train possibly subsampled)."""

    spec: TaskSpec
    train: SplitData
    dev: SplitData
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for split in (self.train, self.dev):
            if split.task_id != self.spec.task_id:
                raise ValidationError(
                    f"split for {split.task_id!r} attached to spec {self.spec.task_id!r}")
        if self.spec.train_size != len(self.train):
            raise ValidationError(
                f"{self.spec.task_id}: spec says {self.spec.train_size} training "
                f"examples but the split holds {len(self.train)}")


SelectionRule = Callable[[Mapping[str, float]], float]


def select_on(task_id: str) -> SelectionRule:
    """Select checkpoints by a single task's raw dev metric."""
    def rule(per_task_dev: Mapping[str, float]) -> float:
        return per_task_dev[task_id]
    return rule


def select_macro_mean(metric_kinds: Mapping[str, MetricKind]) -> SelectionRule:
    """Unweighted mean of all tasks' normalized dev metrics."""
    def rule(per_task_dev: Mapping[str, float]) -> float:
        values = [metrics.normalize(metric_kinds[t], v) for t, v in sorted(per_task_dev.items())]
        return sum(values) / len(values)
    return rule


@dataclass(frozen=True, slots=True)
class CheckpointRecord:
    step: int
    epoch_position: float
    per_task_dev: dict[str, float]
    selection_score: float
    state_token: bytes

    def summary(self) -> dict:
        return {
            "step": self.step,
            "epoch_position": self.epoch_position,
            "per_task_dev": dict(sorted(self.per_task_dev.items())),
            "selection_score": self.selection_score,
        }


@dataclass(frozen=True, slots=True)
class TrainResult:
    best: CheckpointRecord
    history: tuple[CheckpointRecord, ...]


def checkpoint_boundaries(epochs: int, interval: float, steps_per_epoch: int) -> list[int]:
    """Global step counts at which checkpoints fall; exactly floor(epochs/interval) of them."""
    n_checkpoints = int(epochs / interval + 1e-9)
    total = epochs * steps_per_epoch
    bounds = []
    for k in range(1, n_checkpoints + 1):
        step = int(round(k * interval * steps_per_epoch))
        bounds.append(min(max(step, 1), total))
    return bounds


def train(backend: Trainable, source: PolicySchedule,
          tasks: Mapping[str, TaskData], config: TrainConfig,
          selection_rule: SelectionRule) -> TrainResult:
    """Run the schedule against the backend and return the best checkpoint.

    Under a DYNAMIC source, sampling weights are refreshed from normalized dev
    metrics at each checkpoint that crosses the policy's update interval.
    """
    scheduled = set(source.split_sizes)
    missing = scheduled - set(tasks)
    if missing:
        raise ValidationError(f"scheduled tasks without data: {sorted(missing)}")
    for task_id in scheduled:
        if len(tasks[task_id].dev) == 0:
            raise ValidationError(f"task {task_id!r} has an empty dev split")

    spe = source.steps_per_epoch
    if spe < 1:
        raise ValidationError("schedule is empty")
    boundaries = checkpoint_boundaries(config.epochs, config.checkpoint_interval, spe)

    history: list[CheckpointRecord] = []
    last_refresh_epoch = 0.0
    pos = 0
    b_idx = 0

    def run_checkpoint() -> None:
        nonlocal last_refresh_epoch
        per_task_dev = {
            t: backend.evaluate(t, tasks[t].dev) for t in sorted(scheduled)
        }
        record = CheckpointRecord(
            step=pos,
            epoch_position=pos / spe,
            per_task_dev=per_task_dev,
            selection_score=selection_rule(per_task_dev),
            state_token=backend.snapshot(),
        )
        history.append(record)
        if source.policy.kind is PolicyKind.DYNAMIC:
            epoch_pos = pos / spe
            if epoch_pos + 1e-9 >= last_refresh_epoch + source.policy.update_interval:
                normalized = {
                    t: metrics.normalize(tasks[t].spec.metric_kind, v)
                    for t, v in per_task_dev.items()
                }
                source.refresh(normalized)
                last_refresh_epoch = epoch_pos

    for epoch in range(config.epochs):
        epoch_end = (epoch + 1) * spe
        while True:
            while b_idx < len(boundaries) and boundaries[b_idx] == pos:
                run_checkpoint()
                b_idx += 1
            if pos == epoch_end:
                break
            next_stop = epoch_end
            if b_idx < len(boundaries) and boundaries[b_idx] < epoch_end:
                next_stop = boundaries[b_idx]
            chunk = next_stop - pos
            for task_id, indices in source.take(epoch, chunk):
                batch = [tasks[task_id].train.examples[i] for i in indices]
                try:
                    backend.train_step(task_id, batch)
                except Exception as exc:
                    raise RunError(f"backend failed on task {task_id!r}", step=pos) from exc
                pos += 1
    while b_idx < len(boundaries) and boundaries[b_idx] == pos:
        run_checkpoint()
        b_idx += 1

    if not history:
        raise ValidationError("no checkpoints recorded; check epochs and interval")
    best = history[0]
    for record in history[1:]:
        if record.selection_score > best.selection_score:
            best = record
    backend.restore(best.state_token)
    return TrainResult(best=best, history=tuple(history))


def evaluate_final(backend: Trainable, task_id: str, dev: SplitData | None) -> float:
    """Reported score of the restored-best backend: raw metric x 100."""
    if dev is None or len(dev) == 0:
        raise ValidationError(f"task {task_id!r} has no dev split to evaluate")
    return metrics.reported_score(backend.evaluate(task_id, dev))
