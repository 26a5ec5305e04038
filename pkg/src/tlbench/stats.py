"""Multi-seed aggregation and the two-sided two-sample t-test labeling.

Each matrix cell compares the per-seed score samples of two methods with a
two-sided t-test (Welch by default; pooled-variance Student available behind
a flag) at alpha = 0.1. The t-distribution tail is computed through the
regularized incomplete beta function. Degenerate zero-variance cases follow
the statistic's limits: identical constants give p = 1, distinct constants
give p = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from scipy.optimize import brentq
from scipy.special import betainc

from .errors import IncompleteCellError, ValidationError

DEFAULT_ALPHA = 0.1

Cell = tuple[str, str]  # (target_task, support_task)


class TestVariant(Enum):
    WELCH = "welch"
    POOLED = "pooled"


class CellLabel(Enum):
    MTL_BETTER = "mtl_better"
    STILTS_BETTER = "stilts_better"
    NOT_SIGNIFICANT = "not_significant"


@dataclass(frozen=True, slots=True)
class ScoreSample:
    """Per-seed scores on the 0-100 scale."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValidationError("a score sample cannot be empty")

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True, slots=True)
class TestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    alpha: float
    significant: bool
    variant: TestVariant = TestVariant.WELCH


@dataclass(frozen=True, slots=True)
class CellResult:
    mtl_mean: float
    mtl_std: float
    stilts_mean: float
    stilts_std: float
    difference: float  # mtl_mean - stilts_mean; positive means MTL better
    label: CellLabel
    test: TestResult


@dataclass(frozen=True)
class SignificanceMatrix:
    cells: dict[Cell, CellResult]
    alpha: float

    def __post_init__(self):
        for target, support in self.cells:
            if target == support:
                raise ValidationError(f"diagonal cell ({target}, {target}) not allowed")

    def task_ids(self) -> set[str]:
        out: set[str] = set()
        for target, support in self.cells:
            out.add(target)
            out.add(support)
        return out

    def significant_cells(self) -> dict[Cell, CellResult]:
        return {c: r for c, r in self.cells.items()
                if r.label is not CellLabel.NOT_SIGNIFICANT}


def aggregate(sample: ScoreSample) -> tuple[float, float | None]:
    """Arithmetic mean and sample standard deviation (n-1); std None for n=1."""
    mean = sum(sample.values) / sample.n
    if sample.n < 2:
        return mean, None
    var = sum((v - mean) ** 2 for v in sample.values) / (sample.n - 1)
    return mean, math.sqrt(var)


def t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t) of the t-distribution via the incomplete beta function."""
    if df <= 0:
        raise ValidationError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    tail = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return tail if t >= 0 else 1.0 - tail


def t_two_sided_p(t: float, df: float) -> float:
    return min(1.0, 2.0 * t_sf(abs(t), df))


def t_quantile(q: float, df: float) -> float:
    """Inverse CDF by bracketing the betainc-based tail; q in (0, 1)."""
    if not 0.0 < q < 1.0:
        raise ValidationError(f"quantile must be in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_quantile(1.0 - q, df)
    hi = 2.0
    while t_sf(hi, df) > 1.0 - q:
        hi *= 2.0
        if hi > 1e12:
            raise ValidationError("t quantile bracket failed")
    return float(brentq(lambda x: t_sf(x, df) - (1.0 - q), 0.0, hi, xtol=1e-12))


def t_test(a: ScoreSample, b: ScoreSample, alpha: float = DEFAULT_ALPHA,
           variant: TestVariant = TestVariant.WELCH) -> TestResult:
    """Two-sided two-sample t-test of mean(a) - mean(b)."""
    if a.n < 2 or b.n < 2:
        raise ValidationError("both samples need n >= 2 for a t-test")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    mean_a, std_a = aggregate(a)
    mean_b, std_b = aggregate(b)
    var_a, var_b = std_a ** 2, std_b ** 2

    if var_a == 0.0 and var_b == 0.0:
        # Limits of the statistic: no within-sample spread at all.
        if mean_a == mean_b:
            t, df, p = 0.0, float(a.n + b.n - 2), 1.0
        else:
            t = math.inf if mean_a > mean_b else -math.inf
            df, p = float(a.n + b.n - 2), 0.0
        return TestResult(t, df, p, alpha, p < alpha, variant)

    if variant is TestVariant.WELCH:
        se_sq = var_a / a.n + var_b / b.n
        t = (mean_a - mean_b) / math.sqrt(se_sq)
        # Ratios are in [0, 1], which keeps the df formula away from underflow
        # when one variance is subnormal.
        ratio_a = (var_a / a.n) / se_sq
        ratio_b = (var_b / b.n) / se_sq
        df = 1.0 / (ratio_a ** 2 / (a.n - 1) + ratio_b ** 2 / (b.n - 1))
    else:
        pooled = ((a.n - 1) * var_a + (b.n - 1) * var_b) / (a.n + b.n - 2)
        t = (mean_a - mean_b) / math.sqrt(pooled * (1.0 / a.n + 1.0 / b.n))
        df = float(a.n + b.n - 2)
    p = t_two_sided_p(t, df)
    return TestResult(t, df, p, alpha, p < alpha, variant)


def build_significance_matrix(
    mtl_samples: Mapping[Cell, Sequence[float]],
    stilts_samples: Mapping[Cell, Sequence[float]],
    alpha: float = DEFAULT_ALPHA,
    variant: TestVariant = TestVariant.WELCH,
) -> SignificanceMatrix:
    """Aggregate, test and label every (target, support) cell."""
    cells = set(mtl_samples) | set(stilts_samples)
    missing = [c for c in cells if c not in mtl_samples or c not in stilts_samples]
    if missing:
        raise IncompleteCellError(missing)
    results: dict[Cell, CellResult] = {}
    for cell in sorted(cells):
        mtl = ScoreSample(tuple(mtl_samples[cell]))
        stilts = ScoreSample(tuple(stilts_samples[cell]))
        mtl_mean, mtl_std = aggregate(mtl)
        stilts_mean, stilts_std = aggregate(stilts)
        test = t_test(mtl, stilts, alpha=alpha, variant=variant)
        difference = mtl_mean - stilts_mean
        if test.significant and difference > 0:
            label = CellLabel.MTL_BETTER
        elif test.significant and difference < 0:
            label = CellLabel.STILTS_BETTER
        else:
            label = CellLabel.NOT_SIGNIFICANT
        results[cell] = CellResult(
            mtl_mean=mtl_mean,
            mtl_std=mtl_std if mtl_std is not None else 0.0,
            stilts_mean=stilts_mean,
            stilts_std=stilts_std if stilts_std is not None else 0.0,
            difference=difference,
            label=label,
            test=test,
        )
    return SignificanceMatrix(cells=results, alpha=alpha)
