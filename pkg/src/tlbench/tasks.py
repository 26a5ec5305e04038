"""Task definitions, the registry, and the built-in GLUE size table.

The registry is the single source of truth for task identity, split sizes,
metric kind and label space. The built-in GLUE registry carries the published
training-set sizes that the size-based strategy selector consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterator

from .errors import DuplicateTaskError, UnknownTaskError, ValidationError

REGRESSION = "<regression>"


class MetricKind(Enum):
    ACCURACY = "accuracy"
    F1 = "f1"
    MATTHEWS_CORR = "matthews_corr"
    PEARSON_SPEARMAN_AVG = "pearson_spearman_avg"


class DataFormat(Enum):
    TSV = "tsv"
    JSONL = "jsonl"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True, slots=True)
class TaskSpec:
    """Identity and metadata of one task.

    ``label_space`` lists the class labels in a fixed order, or is the
    ``REGRESSION`` marker (as a one-element list) for real-valued targets.
    """

    task_id: str
    display_name: str
    train_size: int
    dev_size: int
    metric_kind: MetricKind
    data_format: DataFormat
    label_space: tuple[str, ...]

    def __post_init__(self):
        if not self.task_id:
            raise ValidationError("task_id must be non-empty")
        if self.train_size < 0 or self.dev_size < 0:
            raise ValidationError(f"{self.task_id}: split sizes must be non-negative")
        object.__setattr__(self, "label_space", tuple(self.label_space))
        if not self.label_space:
            raise ValidationError(f"{self.task_id}: label_space must be non-empty")

    @property
    def is_regression(self) -> bool:
        return self.label_space == (REGRESSION,)

    @property
    def num_classes(self) -> int:
        if self.is_regression:
            raise ValidationError(f"{self.task_id} is a regression task")
        return len(self.label_space)


class Registry:
    """Task collection, immutable once construction is done."""

    def __init__(self, specs: list[TaskSpec] | None = None):
        self._specs: dict[str, TaskSpec] = {}
        for spec in specs or []:
            self.register(spec)

    def register(self, spec: TaskSpec) -> str:
        if spec.task_id in self._specs:
            raise DuplicateTaskError(f"task {spec.task_id!r} already registered")
        self._specs[spec.task_id] = spec
        return spec.task_id

    def get(self, task_id: str) -> TaskSpec:
        try:
            return self._specs[task_id]
        except KeyError:
            raise UnknownTaskError(f"task {task_id!r} not registered") from None

    def training_size(self, task_id: str) -> int:
        return self.get(task_id).train_size

    def task_ids(self) -> list[str]:
        return list(self._specs)

    def __len__(self) -> int:
        return len(self._specs)

    def __contains__(self, task_id: str) -> bool:
        return task_id in self._specs

    def __iter__(self) -> Iterator[TaskSpec]:
        return iter(self._specs.values())

    def with_train_size(self, task_id: str, train_size: int) -> "Registry":
        """Copy of the registry with one task's train_size replaced."""
        specs = [
            replace(s, train_size=train_size) if s.task_id == task_id else s
            for s in self
        ]
        if task_id not in self:
            raise UnknownTaskError(f"task {task_id!r} not registered")
        return Registry(specs)


# Published GLUE training-set sizes, descending. Dev sizes are the standard
# public dev splits (MNLI: matched split only).
_GLUE_TABLE = [
    # (id, display, train, dev, metric, labels)
    ("mnli", "MNLI", 392_662, 9_815, MetricKind.ACCURACY,
     ("entailment", "neutral", "contradiction")),
    ("qqp", "QQP", 363_846, 40_430, MetricKind.F1,
     ("not_duplicate", "duplicate")),
    ("qnli", "QNLI", 104_743, 5_463, MetricKind.ACCURACY,
     ("entailment", "not_entailment")),
    ("sst2", "SST-2", 67_349, 872, MetricKind.ACCURACY,
     ("negative", "positive")),
    ("cola", "CoLA", 8_551, 1_043, MetricKind.MATTHEWS_CORR,
     ("unacceptable", "acceptable")),
    ("stsb", "STS-B", 5_749, 1_500, MetricKind.PEARSON_SPEARMAN_AVG,
     (REGRESSION,)),
    ("mrpc", "MRPC", 3_668, 408, MetricKind.F1,
     ("not_equivalent", "equivalent")),
    ("rte", "RTE", 2_490, 277, MetricKind.ACCURACY,
     ("entailment", "not_entailment")),
    ("wnli", "WNLI", 635, 71, MetricKind.ACCURACY,
     ("not_entailment", "entailment")),
]


def builtin_glue_registry() -> Registry:
    """The nine GLUE tasks with their published training sizes, largest first."""
    specs = [
        TaskSpec(
            task_id=tid,
            display_name=name,
            train_size=train,
            dev_size=dev,
            metric_kind=metric,
            data_format=DataFormat.TSV,
            label_space=labels,
        )
        for tid, name, train, dev, metric, labels in _GLUE_TABLE
    ]
    return Registry(specs)


def save_registry(registry: Registry, path: str | Path) -> None:
    """One JSON record per task: id, name, sizes, metric kind, format, labels."""
    with open(path, "w", encoding="utf-8") as fh:
        for spec in registry:
            fh.write(json.dumps({
                "task_id": spec.task_id,
                "display_name": spec.display_name,
                "train_size": spec.train_size,
                "dev_size": spec.dev_size,
                "metric_kind": spec.metric_kind.value,
                "data_format": spec.data_format.value,
                "label_space": list(spec.label_space),
            }, sort_keys=True) + "\n")


def load_registry(path: str | Path) -> Registry:
    registry = Registry()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            registry.register(TaskSpec(
                task_id=rec["task_id"],
                display_name=rec["display_name"],
                train_size=rec["train_size"],
                dev_size=rec["dev_size"],
                metric_kind=MetricKind(rec["metric_kind"]),
                data_format=DataFormat(rec["data_format"]),
                label_space=tuple(rec["label_space"]),
            ))
    return registry
