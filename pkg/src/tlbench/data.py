"""Data loading, seeded subsampling, and synthetic task generation.

Subsampling is uniform without replacement and floor-rounded; it is the
mechanism behind the size-sweep experiments where the supporting pool is
constrained to a proportion of the target's training-set size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError
from .tasks import DataFormat, MetricKind, TaskSpec

DEFAULT_PROPORTIONS = (1 / 3, 1 / 2, 1.0, 2.0, 3.0)


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


class SubsampleMode(Enum):
    FRACTION = "fraction"
    COUNT = "count"
    PROPORTION_OF_TARGET = "proportion_of_target"


@dataclass(frozen=True, slots=True)
class Example:
    example_id: int
    text_a: str
    text_b: str | None
    label: str | float


@dataclass(frozen=True, slots=True)
class SplitData:
    task_id: str
    split: Split
    examples: tuple[Example, ...]

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        ids = [ex.example_id for ex in self.examples]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"{self.task_id}/{self.split.value}: duplicate example ids")

    def __len__(self) -> int:
        return len(self.examples)


@dataclass(frozen=True, slots=True)
class SubsampleSpec:
    """How to shrink (or size-match) a split.

    PROPORTION_OF_TARGET draws floor(value * target_size) examples and is only
    accepted for values in ``allowed_proportions`` (pass None to allow any
    positive proportion).
    """

    mode: SubsampleMode
    value: float
    seed: int
    allowed_proportions: tuple[float, ...] | None = DEFAULT_PROPORTIONS

    def __post_init__(self):
        if self.mode is SubsampleMode.FRACTION:
            if not 0.0 < self.value <= 1.0:
                raise ValidationError(f"FRACTION value must be in (0, 1], got {self.value}")
        elif self.mode is SubsampleMode.COUNT:
            if self.value <= 0 or self.value != int(self.value):
                raise ValidationError(f"COUNT value must be a positive integer, got {self.value}")
        elif self.mode is SubsampleMode.PROPORTION_OF_TARGET:
            if self.value <= 0:
                raise ValidationError(f"proportion must be positive, got {self.value}")
            if self.allowed_proportions is not None and not any(
                    math.isclose(self.value, p, rel_tol=1e-9) for p in self.allowed_proportions):
                raise ValidationError(
                    f"proportion {self.value} not in the configured sweep set "
                    f"{tuple(round(p, 6) for p in self.allowed_proportions)}")


@dataclass(frozen=True, slots=True)
class SubsampleManifest:
    """Provenance record written alongside any subsampled split."""

    task_id: str
    split: str
    mode: str
    value: float
    seed: int
    count: int

    def as_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "split": self.split,
            "mode": self.mode,
            "value": self.value,
            "seed": self.seed,
            "count": self.count,
        }


def _parse_label(raw, spec: TaskSpec, path: str, line_no: int):
    if spec.is_regression:
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ParseError(f"label {raw!r} is not a real value", path, line_no) from None
    if raw not in spec.label_space:
        raise ParseError(
            f"label {raw!r} not in label space {list(spec.label_space)}", path, line_no)
    return raw


def load_split(path: str | Path, spec: TaskSpec, split: Split) -> SplitData:
    """Parse a TSV or JSONL file into a SplitData; malformed rows name their line."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no data file at {path}")
    if spec.data_format is DataFormat.TSV:
        examples = _load_tsv(path, spec)
    elif spec.data_format is DataFormat.JSONL:
        examples = _load_jsonl(path, spec)
    else:
        raise ValidationError(f"{spec.task_id}: format {spec.data_format.value} is generated, not loaded")
    return SplitData(task_id=spec.task_id, split=split, examples=tuple(examples))


def _load_tsv(path: Path, spec: TaskSpec) -> list[Example]:
    examples: list[Example] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            return examples  # empty file -> empty split
        columns = header.rstrip("\n").split("\t")
        try:
            a_col = columns.index("text_a")
            label_col = columns.index("label")
        except ValueError:
            raise ParseError(f"header must name text_a and label, got {columns}", str(path), 1) from None
        b_col = columns.index("text_b") if "text_b" in columns else None
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != len(columns):
                raise ParseError(
                    f"expected {len(columns)} columns, got {len(fields)}", str(path), line_no)
            label = _parse_label(fields[label_col], spec, str(path), line_no)
            examples.append(Example(
                example_id=len(examples),
                text_a=fields[a_col],
                text_b=fields[b_col] if b_col is not None else None,
                label=label,
            ))
    return examples


def _load_jsonl(path: Path, spec: TaskSpec) -> list[Example]:
    examples: list[Example] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", str(path), line_no) from None
            if "text_a" not in rec or "label" not in rec:
                raise ParseError("record needs text_a and label keys", str(path), line_no)
            label = _parse_label(rec["label"], spec, str(path), line_no)
            examples.append(Example(
                example_id=len(examples),
                text_a=str(rec["text_a"]),
                text_b=None if rec.get("text_b") is None else str(rec["text_b"]),
                label=label,
            ))
    return examples


def subsample(split: SplitData, spec: SubsampleSpec,
              target_size: int | None = None) -> SplitData:
    """Uniform draw without replacement; deterministic per seed; keeps input order."""
    n = len(split)
    if spec.mode is SubsampleMode.FRACTION:
        requested = math.floor(spec.value * n)
    elif spec.mode is SubsampleMode.COUNT:
        requested = int(spec.value)
    else:
        if target_size is None:
            raise ValidationError("PROPORTION_OF_TARGET requires target_size")
        requested = math.floor(spec.value * target_size)
    if requested > n:
        raise InsufficientDataError(
            f"{split.task_id}/{split.split.value}: requested {requested} examples "
            f"but only {n} available")
    rng = np.random.default_rng(spec.seed)
    chosen = np.sort(rng.choice(n, size=requested, replace=False))
    return SplitData(
        task_id=split.task_id,
        split=split.split,
        examples=tuple(split.examples[i] for i in chosen),
    )


def manifest_for(split: SplitData, spec: SubsampleSpec) -> SubsampleManifest:
    return SubsampleManifest(
        task_id=split.task_id,
        split=split.split.value,
        mode=spec.mode.value,
        value=spec.value,
        seed=spec.seed,
        count=len(split),
    )


def make_synthetic_task(
    task_id: str,
    n_train: int,
    n_dev: int,
    n_features: int = 400,
    class_count: int = 2,
    noise: float = 0.0,
    seed: int = 0,
) -> tuple[TaskSpec, SplitData, SplitData]:
    """Generate a linearly separable text-classification task.

    The vocabulary is partitioned into one signal-token group per class plus a
    shared background group. Every example draws at least one signal token from
    its true class and none from other classes, so counting signal tokens per
    class recovers the label exactly; ``noise`` then flips each stored label to
    a different class with that probability (dev labels included).
    """
    if n_train < 1 or n_dev < 1:
        raise ValidationError("n_train and n_dev must be >= 1")
    if class_count < 2:
        raise ValidationError("need at least 2 classes")
    if not 0.0 <= noise < 0.5:
        raise ValidationError(f"noise must be in [0, 0.5), got {noise}")
    if n_features < 2 * class_count:
        raise ValidationError("n_features too small for the class count")

    rng = np.random.default_rng(seed)
    per_class = n_features // (class_count + 1)
    signal_vocab = {
        c: [f"sig{c}_{j}" for j in range(per_class)] for c in range(class_count)
    }
    background = [f"bg_{j}" for j in range(n_features - per_class * class_count)]
    labels = [f"class{c}" for c in range(class_count)]

    def draw_split(split: Split, count: int) -> list[Example]:
        examples = []
        for i in range(count):
            true_class = int(rng.integers(class_count))
            n_tokens = int(rng.integers(8, 24))
            n_signal = max(1, int(round(n_tokens * 0.4)))
            sig = rng.choice(signal_vocab[true_class], size=n_signal).tolist()
            bg = rng.choice(background, size=n_tokens - n_signal).tolist()
            tokens = sig + bg
            rng.shuffle(tokens)
            label_class = true_class
            if noise > 0 and rng.random() < noise:
                offset = int(rng.integers(1, class_count))
                label_class = (true_class + offset) % class_count
            examples.append(Example(
                example_id=i,
                text_a=" ".join(tokens),
                text_b=None,
                label=labels[label_class],
            ))
        return examples

    train = SplitData(task_id, Split.TRAIN, tuple(draw_split(Split.TRAIN, n_train)))
    dev = SplitData(task_id, Split.DEV, tuple(draw_split(Split.DEV, n_dev)))
    spec = TaskSpec(
        task_id=task_id,
        display_name=task_id,
        train_size=n_train,
        dev_size=n_dev,
        metric_kind=MetricKind.ACCURACY,
        data_format=DataFormat.SYNTHETIC,
        label_space=tuple(labels),
    )
    return spec, train, dev


def synthetic_oracle_label(example: Example, class_count: int) -> str:
    """Independent reference classifier: majority signal-token prefix count."""
    counts = [0] * class_count
    for token in example.text_a.split():
        if token.startswith("sig"):
            counts[int(token[3:token.index("_")])] += 1
    return f"class{int(np.argmax(counts))}"
