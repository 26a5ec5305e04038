import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlbench.errors import IncompleteCellError, ValidationError
from tlbench.stats import TestVariant as Variant
from tlbench.stats import (CellLabel, ScoreSample, aggregate,
                           build_significance_matrix, t_quantile, t_test,
                           t_two_sided_p)

import oracles


class TestAggregate:
    def test_constant_sample(self):
        mean, std = aggregate(ScoreSample((10, 10, 10)))
        assert mean == 10
        assert std == 0

    def test_hand_computed(self):
        mean, std = aggregate(ScoreSample((1, 2, 3, 4, 5)))
        assert mean == 3
        assert std == pytest.approx(math.sqrt(2.5), abs=1e-12)

    def test_single_value_has_no_std(self):
        mean, std = aggregate(ScoreSample((7,)))
        assert mean == 7
        assert std is None

    def test_empty_sample_rejected(self):
        with pytest.raises(ValidationError):
            ScoreSample(())

    @given(st.lists(st.floats(min_value=-100, max_value=200,
                              allow_nan=False), min_size=2, max_size=12))
    def test_matches_two_pass_brute_force(self, values):
        mean, std = aggregate(ScoreSample(tuple(values)))
        brute_mean = sum(values) / len(values)
        brute_std = math.sqrt(
            sum((v - brute_mean) ** 2 for v in values) / (len(values) - 1))
        assert mean == pytest.approx(brute_mean, abs=1e-12)
        assert std == pytest.approx(brute_std, abs=1e-12)


class TestTTest:
    def test_identical_samples(self):
        result = t_test(ScoreSample((3, 4, 5)), ScoreSample((3, 4, 5)))
        assert result.t_statistic == 0
        assert result.p_value == 1
        assert not result.significant

    def test_distinct_constant_samples_are_significant(self):
        result = t_test(ScoreSample((0,) * 5), ScoreSample((1,) * 5))
        assert result.p_value == 0
        assert result.significant

    def test_identical_constant_samples(self):
        result = t_test(ScoreSample((2, 2, 2)), ScoreSample((2, 2, 2)))
        assert result.t_statistic == 0
        assert result.p_value == 1

    def test_hand_computed_example(self):
        # means 3 vs 4, both variances 2.5: t = -1, Welch df = 8
        result = t_test(ScoreSample((1, 2, 3, 4, 5)), ScoreSample((2, 3, 4, 5, 6)))
        assert result.t_statistic == pytest.approx(-1.0, abs=1e-12)
        assert result.degrees_of_freedom == pytest.approx(8.0, abs=1e-12)
        assert result.p_value == pytest.approx(0.3466, abs=2e-4)
        assert not result.significant

    def test_small_samples_rejected(self):
        with pytest.raises(ValidationError):
            t_test(ScoreSample((1,)), ScoreSample((1, 2)))

    def test_pooled_variant_df(self):
        result = t_test(ScoreSample((1, 2, 3)), ScoreSample((2, 3, 4, 5)),
                        variant=Variant.POOLED)
        assert result.degrees_of_freedom == 5
        assert result.variant is Variant.POOLED

    @given(st.lists(st.floats(0, 100), min_size=2, max_size=8),
           st.lists(st.floats(0, 100), min_size=2, max_size=8))
    @settings(max_examples=60)
    def test_antisymmetry_exact(self, a, b):
        fwd = t_test(ScoreSample(tuple(a)), ScoreSample(tuple(b)))
        rev = t_test(ScoreSample(tuple(b)), ScoreSample(tuple(a)))
        assert fwd.t_statistic == -rev.t_statistic
        assert fwd.p_value == rev.p_value
        assert 0.0 <= fwd.p_value <= 1.0

    @given(st.lists(st.floats(0, 100), min_size=3, max_size=8),
           st.lists(st.floats(0, 100), min_size=3, max_size=8),
           st.floats(0.01, 0.4), st.floats(0.0, 0.5))
    @settings(max_examples=60)
    def test_alpha_monotonicity(self, a, b, alpha, bump):
        small = t_test(ScoreSample(tuple(a)), ScoreSample(tuple(b)), alpha=alpha)
        larger = t_test(ScoreSample(tuple(a)), ScoreSample(tuple(b)),
                        alpha=min(alpha + bump, 0.99))
        if small.significant:
            assert larger.significant


class TestTDistribution:
    def test_known_quantile(self):
        assert t_quantile(0.95, 4) == pytest.approx(2.1318, abs=2e-4)

    def test_quantile_round_trip(self):
        for df in (1, 2.5, 7, 30):
            for q in (0.6, 0.9, 0.95, 0.995):
                x = t_quantile(q, df)
                assert t_two_sided_p(x, df) == pytest.approx(2 * (1 - q), rel=1e-9)

    def test_matches_quadrature_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            t = float(rng.uniform(-6, 6))
            df = float(rng.uniform(1, 40))
            assert t_two_sided_p(t, df) == pytest.approx(
                oracles.two_sided_p(t, df), abs=1e-10)


class TestSignificanceMatrix:
    def test_constant_difference_cell(self):
        matrix = build_significance_matrix(
            {("a", "b"): [60] * 5}, {("a", "b"): [50] * 5})
        cell = matrix.cells[("a", "b")]
        assert cell.difference == 10
        assert cell.label is CellLabel.MTL_BETTER

    def test_noisy_equal_means_not_significant(self):
        rng = np.random.default_rng(3)
        a = (50 + rng.normal(0, 5, size=5)).tolist()
        b = (50 + rng.normal(0, 5, size=5)).tolist()
        matrix = build_significance_matrix({("a", "b"): a}, {("a", "b"): b})
        cell = matrix.cells[("a", "b")]
        assert cell.test.p_value == pytest.approx(
            oracles.two_sided_p(*oracles.welch_statistic(a, b)), abs=1e-10)
        assert cell.label is CellLabel.NOT_SIGNIFICANT

    def test_large_difference_high_variance_can_be_not_significant(self):
        # A 9-point gap that high seed variance renders inconclusive.
        mtl = [35.2, 58.9, 44.1, 61.5, 39.8]
        stilts = [50.1, 52.3, 48.8, 51.0, 49.4]
        mean_gap = sum(mtl) / 5 - sum(stilts) / 5
        assert abs(mean_gap) > 2.0
        matrix = build_significance_matrix({("wnli", "stsb"): mtl},
                                           {("wnli", "stsb"): stilts})
        assert matrix.cells[("wnli", "stsb")].label is CellLabel.NOT_SIGNIFICANT

    def test_missing_side_raises_incomplete(self):
        with pytest.raises(IncompleteCellError) as err:
            build_significance_matrix({("a", "b"): [1, 2]}, {})
        assert ("a", "b") in err.value.cells

    def test_diagonal_rejected(self):
        with pytest.raises(ValidationError):
            build_significance_matrix({("a", "a"): [1, 2]}, {("a", "a"): [1, 2]})

    def test_labels_consistent_with_tests(self):
        rng = np.random.default_rng(11)
        mtl, stilts = {}, {}
        for i in range(12):
            cell = (f"t{i}", f"s{i}")
            mtl[cell] = (50 + rng.normal(0, 4, 5) + rng.uniform(-8, 8)).tolist()
            stilts[cell] = (50 + rng.normal(0, 4, 5)).tolist()
        matrix = build_significance_matrix(mtl, stilts)
        for cell, r in matrix.cells.items():
            if r.label is CellLabel.MTL_BETTER:
                assert r.test.significant and r.difference > 0
            elif r.label is CellLabel.STILTS_BETTER:
                assert r.test.significant and r.difference < 0
            else:
                assert not r.test.significant
            assert r.test.significant == (r.test.p_value < matrix.alpha)

    def test_pooled_variant_propagates(self):
        matrix = build_significance_matrix(
            {("a", "b"): [1.0, 2.0, 3.0]}, {("a", "b"): [2.5, 3.5, 4.0]},
            variant=Variant.POOLED)
        assert matrix.cells[("a", "b")].test.variant is Variant.POOLED
