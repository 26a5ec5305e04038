"""Built-in desk-scale training backend.

A multinomial logistic classifier over hashed bag-of-token features. All tasks
share one learned feature map (identity plus a low-rank adaptation of the
hashed feature space); each task owns a softmax head over the adapted
features. Heads only ever receive gradients from their own task's batches, so
cross-task transfer flows exclusively through the shared map, mirroring the
shared-encoder/per-task-head structure of transformer fine-tuning at a scale
that trains in seconds. Classification only; regression tasks need a plugin
backend.
"""

from __future__ import annotations

import pickle
import zlib
from typing import Sequence

import numpy as np

from . import metrics
from .data import Example, SplitData
from .engine import TrainConfig, Trainable
from .errors import ValidationError
from .tasks import MetricKind, TaskSpec


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class TinyTextBackend:
    """Hashed bag-of-tokens -> shared adapted feature map -> per-task softmax head.

    The shared map is phi(x) = x + up @ (down @ x), starting at the identity
    (up = 0), so every head begins as plain logistic regression over the
    hashed features and the shared adaptation grows from the tasks' gradients.
    """

    def __init__(self, specs: Sequence[TaskSpec], learning_rate: float = 0.5,
                 n_features: int = 2048, rank: int = 64):
        if not specs:
            raise ValidationError("backend needs at least one task")
        for spec in specs:
            if spec.is_regression:
                raise ValidationError(
                    f"task {spec.task_id!r} is regression; the tiny backend is "
                    "classification-only")
        self.specs = {s.task_id: s for s in sorted(specs, key=lambda s: s.task_id)}
        self.lr = learning_rate
        self.n_features = n_features
        self.rank = rank
        self._params: dict[str, np.ndarray] | None = None
        self._feat_cache: dict[Example, tuple[np.ndarray, np.ndarray]] = {}

    # -- contract ----------------------------------------------------------

    def init(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        params: dict[str, np.ndarray] = {
            "enc_down": rng.standard_normal((self.rank, self.n_features))
            / np.sqrt(self.n_features),
            "enc_up": np.zeros((self.n_features, self.rank)),
        }
        for task_id, spec in self.specs.items():
            params[f"head_w:{task_id}"] = np.zeros((spec.num_classes, self.n_features))
            params[f"head_b:{task_id}"] = np.zeros(spec.num_classes)
        self._params = params

    def train_step(self, task_id: str, batch: Sequence[Example]) -> float:
        params = self._require_params()
        spec = self._spec(task_id)
        if not batch:
            raise ValidationError("empty batch")
        head_w = params[f"head_w:{task_id}"]
        head_b = params[f"head_b:{task_id}"]

        x = self._featurize(batch)
        mid = x @ params["enc_down"].T
        phi = x + mid @ params["enc_up"].T
        logits = phi @ head_w.T + head_b
        probs = _softmax(logits)
        targets = np.array([spec.label_space.index(ex.label) for ex in batch])
        n = len(batch)
        loss = -float(np.mean(np.log(probs[np.arange(n), targets] + 1e-12)))

        d_logits = probs
        d_logits[np.arange(n), targets] -= 1.0
        d_logits /= n
        d_head_w = d_logits.T @ phi
        d_head_b = d_logits.sum(axis=0)
        d_phi = d_logits @ head_w
        d_up = d_phi.T @ mid
        d_mid = d_phi @ params["enc_up"]
        d_down = d_mid.T @ x

        head_w -= self.lr * d_head_w
        head_b -= self.lr * d_head_b
        params["enc_up"] -= self.lr * d_up
        params["enc_down"] -= self.lr * d_down
        return loss

    def evaluate(self, task_id: str, split: SplitData) -> float:
        spec = self._spec(task_id)
        if len(split) == 0:
            raise ValidationError(f"cannot evaluate on an empty split ({task_id})")
        predicted = self._predict(task_id, split.examples)
        golds = [ex.label for ex in split.examples]
        positive = spec.label_space[-1] if spec.metric_kind is MetricKind.F1 else None
        return metrics.compute_metric(spec.metric_kind, predicted, golds,
                                      positive_label=positive)

    def snapshot(self) -> bytes:
        params = self._require_params()
        payload = {k: params[k] for k in sorted(params)}
        return pickle.dumps(payload, protocol=4)

    def restore(self, token: bytes) -> None:
        params = pickle.loads(token)
        expected = {"enc_down", "enc_up"} | {
            f"head_{part}:{t}" for t in self.specs for part in ("w", "b")}
        if set(params) != expected:
            raise ValidationError("state token does not match this backend's task set")
        self._params = {k: np.array(v) for k, v in params.items()}

    # -- internals ----------------------------------------------------------

    def _predict(self, task_id: str, examples: Sequence[Example]) -> list[str]:
        params = self._require_params()
        spec = self._spec(task_id)
        x = self._featurize(examples)
        phi = x + (x @ params["enc_down"].T) @ params["enc_up"].T
        logits = phi @ params[f"head_w:{task_id}"].T + params[f"head_b:{task_id}"]
        return [spec.label_space[i] for i in np.argmax(logits, axis=1)]

    def _featurize(self, examples: Sequence[Example]) -> np.ndarray:
        x = np.zeros((len(examples), self.n_features))
        for row, ex in enumerate(examples):
            cached = self._feat_cache.get(ex)
            if cached is None:
                tokens = ex.text_a.lower().split()
                if ex.text_b:
                    tokens += ex.text_b.lower().split()
                if tokens:
                    idx = np.array([zlib.crc32(t.encode()) % self.n_features
                                    for t in tokens])
                    uniq, counts = np.unique(idx, return_counts=True)
                    cached = (uniq, counts / np.linalg.norm(counts))
                else:
                    cached = (np.array([], dtype=int), np.array([]))
                self._feat_cache[ex] = cached
            x[row, cached[0]] = cached[1]
        return x

    def _spec(self, task_id: str) -> TaskSpec:
        try:
            return self.specs[task_id]
        except KeyError:
            raise ValidationError(f"backend has no head for task {task_id!r}") from None

    def _require_params(self) -> dict[str, np.ndarray]:
        if self._params is None:
            raise ValidationError("backend not initialized; call init(seed) first")
        return self._params


def tiny_backend_factory(n_features: int = 2048, rank: int = 64):
    """Factory with the signature strategies expect: (specs, config) -> Trainable."""
    def build(specs: Sequence[TaskSpec], config: TrainConfig) -> Trainable:
        return TinyTextBackend(specs, learning_rate=config.learning_rate,
                               n_features=n_features, rank=rank)
    return build
