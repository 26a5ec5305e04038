import pytest

from tlbench.errors import IntegrityError
from tlbench.store import BlobStore, RunStore
from tlbench.strategies import RunRecord, Stage, Strategy


def record(run_id="r1", seed=0, score=75.0):
    return RunRecord(
        run_id=run_id,
        strategy=Strategy.MTL_PAIR,
        stage=Stage.JOINT,
        target_task="a",
        support_tasks=("b",),
        seed=seed,
        sampling_policy="dynamic",
        final_score=score,
        per_task_scores={"a": score},
        selection_score=score / 100,
        checkpoint_history=({"step": 1, "selection_score": score / 100},),
    )


class TestRunStore:
    def test_append_and_reload(self, tmp_path):
        path = tmp_path / "store.jsonl"
        store = RunStore(path)
        assert store.append(record()) is True
        assert store.append(record("r2", seed=1)) is True
        reloaded = RunStore(path)
        assert len(reloaded) == 2
        assert reloaded.get("r1").final_score == 75.0

    def test_identical_duplicate_skipped(self, tmp_path):
        store = RunStore(tmp_path / "store.jsonl")
        store.append(record())
        assert store.append(record()) is False
        assert len(store) == 1

    def test_conflicting_duplicate_rejected(self, tmp_path):
        store = RunStore(tmp_path / "store.jsonl")
        store.append(record(score=75.0))
        with pytest.raises(IntegrityError):
            store.append(record(score=80.0))

    def test_torn_final_line_tolerated(self, tmp_path):
        path = tmp_path / "store.jsonl"
        store = RunStore(path)
        store.append(record())
        store.append(record("r2", seed=1))
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"run_id": "r3", "strat')  # interrupted writer
        reloaded = RunStore(path)
        assert len(reloaded) == 2
        # the torn record can be re-appended cleanly
        assert reloaded.append(record("r3", seed=2)) is True
        assert len(RunStore(path)) == 3

    def test_mid_file_corruption_rejected(self, tmp_path):
        path = tmp_path / "store.jsonl"
        store = RunStore(path)
        store.append(record())
        content = path.read_text()
        path.write_text("garbage line\n" + content)
        with pytest.raises(IntegrityError):
            RunStore(path)

    def test_records_sorted_by_run_id(self, tmp_path):
        store = RunStore(tmp_path / "store.jsonl")
        store.append(record("zz", seed=0))
        store.append(record("aa", seed=1))
        assert [r.run_id for r in store.records()] == ["aa", "zz"]


class TestBlobStore:
    def test_round_trip_content_addressed(self, tmp_path):
        blobs = BlobStore(tmp_path / "blobs")
        digest = blobs.put(b"model state")
        assert digest in blobs
        assert blobs.get(digest) == b"model state"
        assert blobs.put(b"model state") == digest  # idempotent

    def test_missing_blob(self, tmp_path):
        blobs = BlobStore(tmp_path / "blobs")
        with pytest.raises(KeyError):
            blobs.get("0" * 64)
