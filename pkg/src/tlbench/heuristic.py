"""Size-based strategy selection and its accuracy against a significance matrix.

The rule: joint multi-task training wins when the supporting task has more
training instances than the target; intermediate fine-tuning wins when it has
fewer; exactly equal sizes are a TIE (callers may configure a tiebreak).
Accuracy is scored only over cells with a statistically significant winner.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import ValidationError
from .stats import CellLabel, SignificanceMatrix


class Prediction(Enum):
    STILTS = "stilts"
    MTL_PAIR = "mtl_pair"
    TIE = "tie"


@dataclass(frozen=True, slots=True)
class HeuristicPrediction:
    target_task: str
    support_task: str
    predicted: Prediction


@dataclass(frozen=True, slots=True)
class AccuracyReport:
    correct: int
    total_significant: int
    misses: tuple[tuple[str, str], ...]

    @property
    def accuracy(self) -> float | None:
        """Fraction of significant cells predicted correctly; None when there are none."""
        if self.total_significant == 0:
            return None
        return self.correct / self.total_significant

    @property
    def accuracy_percent(self) -> float | None:
        return None if self.accuracy is None else round(100.0 * self.accuracy, 1)


def select_strategy(target_size: int, support_size: int,
                    target_task: str = "target", support_task: str = "support") -> HeuristicPrediction:
    if target_size < 1 or support_size < 1:
        raise ValidationError("training sizes must be >= 1")
    if support_size > target_size:
        predicted = Prediction.MTL_PAIR
    elif support_size < target_size:
        predicted = Prediction.STILTS
    else:
        predicted = Prediction.TIE
    return HeuristicPrediction(target_task, support_task, predicted)


_AGREES = {
    CellLabel.MTL_BETTER: Prediction.MTL_PAIR,
    CellLabel.STILTS_BETTER: Prediction.STILTS,
}


def predict_matrix(sig_matrix: SignificanceMatrix,
                   sizes: Mapping[str, int]) -> dict[tuple[str, str], HeuristicPrediction]:
    missing = sorted(sig_matrix.task_ids() - set(sizes))
    if missing:
        raise ValidationError(f"training sizes missing for tasks: {missing}")
    return {
        (t, s): select_strategy(sizes[t], sizes[s], t, s)
        for t, s in sig_matrix.cells
    }


def heuristic_accuracy(sig_matrix: SignificanceMatrix,
                       sizes: Mapping[str, int]) -> AccuracyReport:
    """Count significant cells where the size-based prediction matches the label."""
    predictions = predict_matrix(sig_matrix, sizes)
    correct = 0
    total = 0
    misses: list[tuple[str, str]] = []
    for cell, result in sorted(sig_matrix.cells.items()):
        if result.label is CellLabel.NOT_SIGNIFICANT:
            continue
        total += 1
        if predictions[cell].predicted is _AGREES[result.label]:
            correct += 1
        else:
            misses.append(cell)
    return AccuracyReport(correct=correct, total_significant=total, misses=tuple(misses))
