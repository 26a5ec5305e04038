"""Shared test doubles."""

import pickle
import zlib


class FakeBackend:
    """Deterministic, contract-satisfying backend that trains instantly.

    The dev metric is a stable pseudo-random function of (task, init seed)
    that saturates with training steps, so selection scores differ across
    seeds in a reproducible way. Snapshot state is (seed, steps); restoring a
    token transplants both, which makes stage-2 initialization observable.
    """

    def __init__(self, specs, config=None):
        self.task_ids = sorted(s.task_id for s in specs)
        self.seed = None
        self.steps = 0

    @staticmethod
    def factory(specs, config):
        return FakeBackend(specs, config)

    def init(self, seed):
        self.seed = seed
        self.steps = 0

    def train_step(self, task_id, batch):
        assert task_id in self.task_ids
        self.steps += 1
        return 1.0 / (1.0 + self.steps)

    def evaluate(self, task_id, split):
        base = (zlib.crc32(f"{task_id}:{self.seed}".encode()) % 1000) / 1000
        return min(1.0, 0.25 + base / 2 + min(self.steps, 50) / 200.0)

    def snapshot(self):
        return pickle.dumps((self.seed, self.steps))

    def restore(self, token):
        self.seed, self.steps = pickle.loads(token)
