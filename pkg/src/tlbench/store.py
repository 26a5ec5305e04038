"""Append-only run store plus a content-addressed blob store for model states.

Records are one JSON object per line, indexed by run_id. Appending an id that
is already present is a no-op when the content matches (idempotent resume) and
an integrity error when it differs. A torn final line (interrupted writer) is
tolerated on load; corruption anywhere else is an error.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import IntegrityError
from .strategies import RunRecord, canonical_json


class RunStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._records: dict[str, RunRecord] = {}
        self._canonical: dict[str, str] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        raw = self.path.read_text(encoding="utf-8")
        lines = raw.split("\n")
        good_chars = 0
        for i, line in enumerate(lines):
            if not line.strip():
                good_chars += len(line) + 1
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                if i == len(lines) - 1 or all(not l.strip() for l in lines[i + 1:]):
                    # Torn final line from an interrupted append: drop it so
                    # the next append starts on a clean boundary.
                    with open(self.path, "w", encoding="utf-8") as fh:
                        fh.write(raw[:good_chars])
                    return
                raise IntegrityError(f"{self.path}: corrupt record at line {i + 1}")
            self._index(RunRecord.from_dict(rec))
            good_chars += len(line) + 1
        if raw and not raw.endswith("\n"):
            # Valid final record without its newline; terminate it.
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write("\n")

    def _index(self, record: RunRecord) -> None:
        content = canonical_json(record.to_dict())
        existing = self._canonical.get(record.run_id)
        if existing is not None and existing != content:
            raise IntegrityError(
                f"run {record.run_id} already stored with different content")
        self._records[record.run_id] = record
        self._canonical[record.run_id] = content

    def append(self, record: RunRecord) -> bool:
        """Persist a record; returns False if it was already stored."""
        if record.run_id in self._records:
            self._index(record)  # raises on content mismatch
            return False
        self._index(record)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(canonical_json(record.to_dict()) + "\n")
            fh.flush()
        return True

    def __contains__(self, run_id: str) -> bool:
        return run_id in self._records

    def __len__(self) -> int:
        return len(self._records)

    def get(self, run_id: str) -> RunRecord:
        return self._records[run_id]

    def records(self) -> list[RunRecord]:
        return sorted(self._records.values(), key=lambda r: r.run_id)


class BlobStore:
    """Opaque binary blobs addressed by their sha256 content hash."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def put(self, blob: bytes) -> str:
        digest = hashlib.sha256(blob).hexdigest()
        path = self.directory / f"{digest}.bin"
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(blob)
            tmp.rename(path)
        return digest

    def get(self, digest: str) -> bytes:
        path = self.directory / f"{digest}.bin"
        if not path.exists():
            raise KeyError(f"no blob {digest} in {self.directory}")
        return path.read_bytes()

    def __contains__(self, digest: str) -> bool:
        return (self.directory / f"{digest}.bin").exists()
