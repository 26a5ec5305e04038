import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlbench.errors import ValidationError
from tlbench.scheduler import (BatchSchedule, PolicyKind, PolicySchedule,
                               SamplingPolicy, TaskWeights, build_schedule,
                               default_steps_per_epoch, dump_schedule,
                               dynamic_update, initial_weights)

UNIFORM = SamplingPolicy(PolicyKind.UNIFORM)
SIZE = SamplingPolicy(PolicyKind.SIZE)
DYNAMIC = SamplingPolicy(PolicyKind.DYNAMIC)


class TestInitialWeights:
    def test_uniform_symmetry(self):
        weights = initial_weights(UNIFORM, {"a": 10, "b": 99})
        assert weights.weights == {"a": 0.5, "b": 0.5}

    def test_size_proportionality(self):
        weights = initial_weights(SIZE, {"a": 300, "b": 100})
        assert weights["a"] == pytest.approx(0.75)
        assert weights["b"] == pytest.approx(0.25)

    def test_size_on_published_extremes(self):
        weights = initial_weights(SIZE, {"mnli": 392_662, "rte": 2_490})
        assert weights["mnli"] == pytest.approx(0.99370, abs=1e-5)
        assert weights["rte"] == pytest.approx(0.00630, abs=1e-5)

    def test_dynamic_starts_uniform(self):
        weights = initial_weights(DYNAMIC, {"a": 5, "b": 5000, "c": 17})
        assert all(w == pytest.approx(1 / 3) for w in weights.weights.values())

    def test_empty_task_set_rejected(self):
        with pytest.raises(ValidationError):
            initial_weights(UNIFORM, {})

    @given(st.dictionaries(st.text("abcdef", min_size=1, max_size=4),
                           st.integers(1, 10_000), min_size=1, max_size=8),
           st.sampled_from([UNIFORM, SIZE, DYNAMIC]))
    @settings(max_examples=60)
    def test_weights_always_sum_to_one(self, sizes, policy):
        weights = initial_weights(policy, sizes)
        assert sum(weights.weights.values()) == pytest.approx(1.0, abs=1e-9)


class TestDynamicUpdate:
    def test_hand_computed_gaps(self):
        current = initial_weights(DYNAMIC, {"a": 1, "b": 1})
        updated = dynamic_update(current, {"a": 0.9, "b": 0.5}, epsilon=0.01)
        assert updated["a"] == pytest.approx(1 / 6, abs=1e-9)
        assert updated["b"] == pytest.approx(5 / 6, abs=1e-9)

    def test_both_perfect_clamp_to_floor(self):
        current = initial_weights(DYNAMIC, {"a": 1, "b": 1})
        updated = dynamic_update(current, {"a": 1.0, "b": 1.0}, epsilon=0.01)
        assert updated.weights == {"a": 0.5, "b": 0.5}

    def test_floor_versus_full_gap(self):
        current = initial_weights(DYNAMIC, {"a": 1, "b": 1})
        updated = dynamic_update(current, {"a": 0.0, "b": 1.0}, epsilon=0.01)
        assert updated["a"] == pytest.approx(1.0 / 1.01, abs=1e-12)
        assert updated["b"] == pytest.approx(0.01 / 1.01, abs=1e-12)

    def test_metric_out_of_range(self):
        current = initial_weights(DYNAMIC, {"a": 1, "b": 1})
        with pytest.raises(ValidationError):
            dynamic_update(current, {"a": 1.2, "b": 0.5}, epsilon=0.01)

    def test_missing_task_metric(self):
        current = initial_weights(DYNAMIC, {"a": 1, "b": 1})
        with pytest.raises(ValidationError):
            dynamic_update(current, {"a": 0.5}, epsilon=0.01)

    @given(st.dictionaries(st.text("abcd", min_size=1, max_size=3),
                           st.floats(0.0, 1.0), min_size=2, max_size=6))
    @settings(max_examples=60)
    def test_gap_monotone(self, metrics):
        current = initial_weights(DYNAMIC, {t: 1 for t in metrics})
        updated = dynamic_update(current, metrics, epsilon=0.01)
        assert sum(updated.weights.values()) == pytest.approx(1.0, abs=1e-9)
        tasks = sorted(metrics)
        for a in tasks:
            for b in tasks:
                gap_a = max(1 - metrics[a], 0.01)
                gap_b = max(1 - metrics[b], 0.01)
                if gap_a > gap_b:
                    assert updated[a] > updated[b]


class TestBuildSchedule:
    def test_degenerate_single_task(self):
        weights = TaskWeights({"a": 1.0})
        schedule = build_schedule(weights, {"a": 30}, 5, 10, seed=0)
        assert len(schedule) == 10
        assert all(task == "a" for task, _ in schedule.steps)

    def test_single_task_reproduces_plain_epoch_iteration(self):
        weights = TaskWeights({"a": 1.0})
        schedule = build_schedule(weights, {"a": 20}, 5, 4, seed=3)
        seen = [i for _, batch in schedule.steps for i in batch]
        assert sorted(seen) == list(range(20))  # one full permutation, no repeats

    def test_determinism(self):
        weights = TaskWeights({"a": 0.3, "b": 0.7})
        kwargs = dict(split_sizes={"a": 40, "b": 60}, batch_size=8,
                      steps_per_epoch=25, seed=11)
        assert build_schedule(weights, **kwargs) == build_schedule(weights, **kwargs)

    def test_even_weights_frequency(self):
        weights = TaskWeights({"a": 0.5, "b": 0.5})
        schedule = build_schedule(weights, {"a": 50, "b": 50}, 1, 10_000, seed=0)
        assert 0.48 <= schedule.task_fractions()["a"] <= 0.52

    def test_zero_example_task_rejected(self):
        weights = TaskWeights({"a": 0.5, "b": 0.5})
        with pytest.raises(ValidationError):
            build_schedule(weights, {"a": 0, "b": 10}, 2, 5, seed=0)

    def test_no_repeat_before_exhaustion_exhaustive(self):
        # Every task pool of size <= 200: each consecutive window of pool-size
        # indices within the epoch is a full permutation.
        weights = TaskWeights({"a": 0.6, "b": 0.4})
        sizes = {"a": 17, "b": 200}
        schedule = build_schedule(weights, sizes, 7, 400, seed=2)
        streams = {"a": [], "b": []}
        for task, batch in schedule.steps:
            streams[task].extend(batch)
        for task, indices in streams.items():
            pool = sizes[task]
            for start in range(0, len(indices) - pool + 1, pool):
                window = indices[start:start + pool]
                assert sorted(window) == list(range(pool)), (
                    f"{task}: window at {start} repeats an index early")

    def test_batches_cross_permutation_boundaries(self):
        weights = TaskWeights({"a": 1.0})
        schedule = build_schedule(weights, {"a": 10}, 8, 5, seed=1)
        seen = [i for _, batch in schedule.steps for i in batch]
        assert len(seen) == 40
        # four complete passes over the 10-element pool
        for start in range(0, 40, 10):
            assert sorted(seen[start:start + 10]) == list(range(10))

    def test_dump_schedule(self, tmp_path):
        weights = TaskWeights({"a": 1.0})
        schedule = build_schedule(weights, {"a": 6}, 3, 2, seed=0)
        path = tmp_path / "schedule.txt"
        dump_schedule(schedule, path)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 2
        step, task, indices = lines[0].split("\t")
        assert step == "0" and task == "a" and len(indices.split()) == 3


class TestPolicySchedule:
    def test_steps_per_epoch_default(self):
        assert default_steps_per_epoch({"a": 100, "b": 60}, 16) == 10
        source = PolicySchedule(UNIFORM, {"a": 100, "b": 60}, 16, seed=0)
        assert source.steps_per_epoch == 10

    def test_take_is_deterministic_and_segmented(self):
        def collect(chunks):
            source = PolicySchedule(SIZE, {"a": 40, "b": 10}, 4, seed=9,
                                    steps_per_epoch=10)
            steps = []
            for epoch, n in chunks:
                steps.extend(source.take(epoch, n))
            return steps

        whole = collect([(0, 10), (1, 10)])
        pieces = collect([(0, 5), (0, 5), (1, 3), (1, 7)])
        assert whole == pieces

    def test_refresh_only_changes_dynamic(self):
        static = PolicySchedule(SIZE, {"a": 10, "b": 30}, 2, seed=0)
        before = dict(static.weights.weights)
        static.refresh({"a": 0.1, "b": 0.9})
        assert static.weights.weights == before

        dynamic = PolicySchedule(DYNAMIC, {"a": 10, "b": 30}, 2, seed=0)
        dynamic.refresh({"a": 0.1, "b": 0.9})
        assert dynamic.weights["a"] == pytest.approx(0.9 / 1.0, abs=1e-9)

    def test_size_policy_empirical_frequencies(self):
        sizes = {"a": 600, "b": 300, "c": 100}
        source = PolicySchedule(SIZE, sizes, 1, seed=1, steps_per_epoch=10_000)
        steps = source.take(0, 10_000)
        schedule = BatchSchedule(tuple(steps), 1, 0)
        fractions = schedule.task_fractions()
        for task, weight in source.weights.weights.items():
            assert abs(fractions[task] - weight) <= 0.02

    def test_size_policy_on_extreme_published_pair(self):
        # The largest/smallest published pair: the big task should take about
        # 99.37% of the steps under SIZE sampling.
        sizes = {"mnli": 392_662, "rte": 2_490}
        source = PolicySchedule(SIZE, sizes, 1, seed=4, steps_per_epoch=10_000)
        steps = source.take(0, 10_000)
        fraction = sum(1 for task, _ in steps if task == "mnli") / 10_000
        assert fraction == pytest.approx(0.9937, abs=0.003)
