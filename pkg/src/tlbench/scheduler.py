"""Heterogeneous batch schedules over multiple tasks.

Three sampling policies decide which task each training step draws its batch
from: UNIFORM (equal), SIZE (proportional to training-set size) and DYNAMIC
(headroom sampling: weight proportional to max(1 - normalized dev metric,
epsilon), refreshed at every evaluation). Batches are homogeneous in task;
successive steps may switch tasks. Within one epoch a task's example indices
cycle through a seeded permutation, so nothing repeats before the pool is
exhausted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ValidationError

# Sub-stream tags for seeding, so task draws and per-task permutations are
# independent of each other and of task-set iteration order.
_TASK_DRAW = 0
_PERMUTATION = 1

Step = tuple[str, list[int]]


class PolicyKind(Enum):
    UNIFORM = "uniform"
    SIZE = "size"
    DYNAMIC = "dynamic"


@dataclass(frozen=True, slots=True)
class SamplingPolicy:
    kind: PolicyKind
    epsilon: float = 0.01
    update_interval: float = 0.5  # epochs between weight refreshes (DYNAMIC)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.update_interval <= 0:
            raise ValidationError(f"update_interval must be positive, got {self.update_interval}")


@dataclass(frozen=True)
class TaskWeights:
    """Per-task sampling distribution; weights are positive and sum to 1."""

    weights: dict[str, float]

    def __post_init__(self):
        if not self.weights:
            raise ValidationError("weights must cover at least one task")
        if any(w <= 0 for w in self.weights.values()):
            raise ValidationError("every task weight must be positive")
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1, got {total!r}")

    def __getitem__(self, task_id: str) -> float:
        return self.weights[task_id]

    def task_ids(self) -> list[str]:
        return sorted(self.weights)


@dataclass(frozen=True, slots=True)
class BatchSchedule:
    steps: tuple[Step, ...]
    batch_size: int
    epoch_index: int

    def __len__(self) -> int:
        return len(self.steps)

    def task_fractions(self) -> dict[str, float]:
        counts: dict[str, int] = {}
        for task_id, _ in self.steps:
            counts[task_id] = counts.get(task_id, 0) + 1
        return {t: c / len(self.steps) for t, c in sorted(counts.items())}


def initial_weights(policy: SamplingPolicy, sizes: Mapping[str, int]) -> TaskWeights:
    """UNIFORM and DYNAMIC start equal; SIZE is proportional to training size."""
    if not sizes:
        raise ValidationError("need at least one task")
    if any(n < 1 for n in sizes.values()):
        raise ValidationError("every task needs at least one training example")
    if policy.kind is PolicyKind.SIZE:
        total = sum(sizes.values())
        return TaskWeights({t: n / total for t, n in sizes.items()})
    equal = 1.0 / len(sizes)
    return TaskWeights({t: equal for t in sizes})


def dynamic_update(current: TaskWeights, dev_metrics: Mapping[str, float],
                   epsilon: float) -> TaskWeights:
    """Headroom sampling: new weight proportional to max(1 - metric, epsilon).

    Tasks already near a perfect dev metric are sampled less; the epsilon floor
    keeps mastered tasks from starving entirely.
    """
    missing = set(current.weights) - set(dev_metrics)
    if missing:
        raise ValidationError(f"dev metrics missing for tasks: {sorted(missing)}")
    for task_id in current.weights:
        m = dev_metrics[task_id]
        if not 0.0 <= m <= 1.0:
            raise ValidationError(f"metric for {task_id!r} must be in [0, 1], got {m}")
    gaps = {t: max(1.0 - dev_metrics[t], epsilon) for t in current.weights}
    total = sum(gaps.values())
    return TaskWeights({t: g / total for t, g in gaps.items()})


def default_steps_per_epoch(split_sizes: Mapping[str, int], batch_size: int) -> int:
    """One epoch sees roughly the combined data volume once."""
    return math.ceil(sum(split_sizes.values()) / batch_size)


class _IndexStream:
    """Cycles through seeded permutations of one task's example indices."""

    def __init__(self, size: int, rng: np.random.Generator):
        self._size = size
        self._rng = rng
        self._perm = rng.permutation(size)
        self._pos = 0

    def take(self, count: int) -> list[int]:
        out: list[int] = []
        while len(out) < count:
            if self._pos == self._size:
                self._perm = self._rng.permutation(self._size)
                self._pos = 0
            grab = min(count - len(out), self._size - self._pos)
            out.extend(int(i) for i in self._perm[self._pos:self._pos + grab])
            self._pos += grab
        return out


def _make_streams(split_sizes: Mapping[str, int], task_order: list[str],
                  seed: int, epoch_index: int) -> dict[str, _IndexStream]:
    streams = {}
    for k, task_id in enumerate(task_order):
        size = split_sizes[task_id]
        if size < 1:
            raise ValidationError(f"task {task_id!r} has no examples but nonzero weight")
        streams[task_id] = _IndexStream(
            size, np.random.default_rng([seed, epoch_index, _PERMUTATION, k]))
    return streams


def _draw_steps(weights: TaskWeights, streams: Mapping[str, _IndexStream],
                task_order: list[str], rng: np.random.Generator,
                batch_size: int, n_steps: int) -> list[Step]:
    probs = np.array([weights[t] for t in task_order])
    probs = probs / probs.sum()
    picks = rng.choice(len(task_order), size=n_steps, p=probs)
    return [(task_order[k], streams[task_order[k]].take(batch_size)) for k in picks]


def build_schedule(weights: TaskWeights, split_sizes: Mapping[str, int],
                   batch_size: int, steps_per_epoch: int, seed: int,
                   epoch_index: int = 0) -> BatchSchedule:
    """One epoch of steps; the task of each step is drawn i.i.d. from weights."""
    if batch_size < 1:
        raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
    if steps_per_epoch < 1:
        raise ValidationError(f"steps_per_epoch must be >= 1, got {steps_per_epoch}")
    missing = set(weights.weights) - set(split_sizes)
    if missing:
        raise ValidationError(f"split sizes missing for tasks: {sorted(missing)}")
    order = weights.task_ids()
    streams = _make_streams(split_sizes, order, seed, epoch_index)
    rng = np.random.default_rng([seed, epoch_index, _TASK_DRAW])
    steps = _draw_steps(weights, streams, order, rng, batch_size, steps_per_epoch)
    return BatchSchedule(steps=tuple(steps), batch_size=batch_size, epoch_index=epoch_index)


class PolicySchedule:
    """Stateful schedule source for one training run.

    The training loop consumes steps segment by segment (segments end at
    checkpoints) via :meth:`take`; per-task permutation streams reset at epoch
    boundaries, so mid-epoch weight refreshes never break the no-repeat
    guarantee. :meth:`refresh` applies headroom reweighting under DYNAMIC and
    is a no-op for the static policies.
    """

    def __init__(self, policy: SamplingPolicy, split_sizes: Mapping[str, int],
                 batch_size: int, seed: int, steps_per_epoch: int | None = None):
        if batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
        self.policy = policy
        self.split_sizes = dict(split_sizes)
        self.batch_size = batch_size
        self.seed = seed
        self.steps_per_epoch = (
            steps_per_epoch if steps_per_epoch is not None
            else default_steps_per_epoch(split_sizes, batch_size))
        if self.steps_per_epoch < 1:
            raise ValidationError("steps_per_epoch must be >= 1")
        self._weights = initial_weights(policy, split_sizes)
        self._order = self._weights.task_ids()
        self._epoch = None
        self._streams: dict[str, _IndexStream] = {}
        self._rng = None

    @property
    def weights(self) -> TaskWeights:
        return self._weights

    def refresh(self, normalized_dev: Mapping[str, float]) -> None:
        if self.policy.kind is PolicyKind.DYNAMIC:
            self._weights = dynamic_update(self._weights, normalized_dev, self.policy.epsilon)

    def take(self, epoch_index: int, n_steps: int) -> list[Step]:
        if epoch_index != self._epoch:
            self._epoch = epoch_index
            self._streams = _make_streams(self.split_sizes, self._order, self.seed, epoch_index)
            self._rng = np.random.default_rng([self.seed, epoch_index, _TASK_DRAW])
        return _draw_steps(self._weights, self._streams, self._order, self._rng,
                           self.batch_size, n_steps)


def dump_schedule(schedule: BatchSchedule, path: str | Path) -> None:
    """Line-oriented audit dump: step index, task id, example indices."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, (task_id, indices) in enumerate(schedule.steps):
            fh.write(f"{i}\t{task_id}\t{' '.join(map(str, indices))}\n")
