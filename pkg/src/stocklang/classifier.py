"""Feature construction and the regularized softmax action classifier.

Two feature builders feed the same 3-class softmax:

* basic features: the day's normalized candle ratios (h, l, c), width 3;
* context features: the sum of the embedding vectors of the current word
  and its n_m predecessors, width n_v.

The context sum looks strictly backward.  Only the labeler sees future
prices; features never do.

Training minimizes mean cross-entropy plus an L2 penalty on the weights
(biases are not penalized) by full-batch gradient descent with a fixed
step, which keeps runs deterministic and the gradient finite-difference
checkable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .embedding import EmbeddingMatrix
from .labeler import ActionLabel
from .market_data import NormalizedBar

N_CLASSES = 3


class ClassifierError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-day feature rows aligned with their action labels."""

    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        if rows.ndim != 2:
            raise ClassifierError(f"expected 2-d feature matrix, got {rows.shape}")
        if len(rows) != len(labels):
            raise ClassifierError(
                f"{len(rows)} feature rows vs {len(labels)} labels")
        if not np.all(np.isfinite(rows)):
            raise ClassifierError("non-finite feature value")

    @property
    def feature_dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class ContextParams:
    """n_m: how many previous trading days are summed into each feature."""

    n_m: int = 2

    def __post_init__(self) -> None:
        if self.n_m < 0:
            raise ClassifierError("n_m must be >= 0")


@dataclass(frozen=True)
class SoftmaxModel:
    """3-class linear softmax: weights (3 x feature_dim), bias (3,)."""

    weights: np.ndarray
    bias: np.ndarray
    l2_lambda: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        if w.ndim != 2 or w.shape[0] != N_CLASSES or b.shape != (N_CLASSES,):
            raise ClassifierError(f"bad parameter shapes {w.shape}, {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ClassifierError("non-finite model parameter")
        if self.l2_lambda < 0:
            raise ClassifierError("l2_lambda must be >= 0")

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[1]

    def to_json(self, feature_kind: str = "context") -> str:
        return json.dumps(
            {
                "feature_kind": feature_kind,
                "feature_dim": self.feature_dim,
                "l2_lambda": self.l2_lambda,
                "weights": self.weights.tolist(),
                "bias": self.bias.tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SoftmaxModel":
        obj = json.loads(text)
        return cls(weights=np.array(obj["weights"], dtype=float),
                   bias=np.array(obj["bias"], dtype=float),
                   l2_lambda=float(obj["l2_lambda"]))

    def save(self, path: str | Path, feature_kind: str = "context") -> None:
        Path(path).write_text(self.to_json(feature_kind) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SoftmaxModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def build_basic_features(bars: Sequence[NormalizedBar],
                         labels: Sequence[ActionLabel]) -> FeatureMatrix:
    """Row i = day i's (h_ratio, l_ratio, c_ratio), truncated to labeled days."""
    if not labels:
        raise ClassifierError("no labeled days")
    if len(bars) < len(labels):
        raise ClassifierError(
            f"{len(bars)} bars cannot carry {len(labels)} labels")
    rows = np.array([bars[i].as_tuple() for i in range(len(labels))], dtype=float)
    return FeatureMatrix(rows=rows, labels=np.asarray(labels, dtype=int))


def build_context_features(words: Sequence[int], wm: EmbeddingMatrix,
                           labels: Sequence[ActionLabel],
                           ctx: ContextParams) -> FeatureMatrix:
    """Row for day t = sum of word vectors over days t-n_m .. t.

    Only days with n_m predecessors get a row, so the output has
    len(labels) - n_m rows, aligned with labels[n_m:].
    """
    n_m = ctx.n_m
    if len(labels) <= n_m:
        raise ClassifierError(
            f"{len(labels)} labeled days cannot support n_m={n_m}")
    if len(words) < len(labels):
        raise ClassifierError("fewer words than labeled days")
    vectors = wm.rows[np.asarray(words, dtype=int)]
    rows = np.stack([
        vectors[t - n_m:t + 1].sum(axis=0)
        for t in range(n_m, len(labels))
    ])
    return FeatureMatrix(rows=rows, labels=np.asarray(labels[n_m:], dtype=int))


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    p = np.exp(shifted)
    return p / p.sum(axis=-1, keepdims=True)


def softmax_loss(weights: np.ndarray, bias: np.ndarray, rows: np.ndarray,
                 labels: np.ndarray, l2_lambda: float) -> float:
    """Mean cross-entropy over rows plus l2_lambda * sum(weights**2)."""
    logits = rows @ weights.T + bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    ce = log_z - shifted[np.arange(len(rows)), labels]
    return float(ce.mean() + l2_lambda * np.sum(weights ** 2))


def softmax_gradients(weights: np.ndarray, bias: np.ndarray, rows: np.ndarray,
                      labels: np.ndarray, l2_lambda: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of softmax_loss w.r.t. weights and bias."""
    n = len(rows)
    p = _softmax_rows(rows @ weights.T + bias)
    p[np.arange(n), labels] -= 1.0
    g_w = p.T @ rows / n + 2.0 * l2_lambda * weights
    g_b = p.mean(axis=0)
    return g_w, g_b


def train_softmax(features: FeatureMatrix, l2_lambda: float = 1e-3,
                  epochs: int = 500, learning_rate: float = 0.1,
                  seed: int = 0,
                  loss_hook: Callable[[int, float], None] | None = None) -> SoftmaxModel:
    """Full-batch gradient descent from a small seeded random start.

    A single-class training set is fine: the model simply learns to always
    predict that class.  ``loss_hook(epoch, loss)`` observes the objective
    before each update.
    """
    if len(features.rows) < 1:
        raise ClassifierError("no training rows")
    if learning_rate <= 0:
        raise ClassifierError("learning rate must be positive")
    if epochs < 1:
        raise ClassifierError("epochs must be >= 1")
    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, 0.01, size=(N_CLASSES, features.feature_dim))
    bias = np.zeros(N_CLASSES)
    rows, labels = features.rows, features.labels
    for epoch in range(epochs):
        if loss_hook is not None:
            loss_hook(epoch, softmax_loss(weights, bias, rows, labels, l2_lambda))
        g_w, g_b = softmax_gradients(weights, bias, rows, labels, l2_lambda)
        weights = weights - learning_rate * g_w
        bias = bias - learning_rate * g_b
    return SoftmaxModel(weights=weights, bias=bias, l2_lambda=l2_lambda)


def predict(model: SoftmaxModel, feature_row: np.ndarray) -> tuple[np.ndarray, ActionLabel]:
    """Class probabilities and the argmax action for one feature row.

    Ties break toward the lowest action code (BUY < SELL < HOLD).
    """
    row = np.asarray(feature_row, dtype=float)
    if row.shape != (model.feature_dim,):
        raise ClassifierError(
            f"feature row of shape {row.shape} does not match model dim "
            f"{model.feature_dim}")
    probs = _softmax_rows(model.weights @ row + model.bias)
    return probs, ActionLabel(int(np.argmax(probs)))


def predict_many(model: SoftmaxModel, rows: np.ndarray) -> list[ActionLabel]:
    """Argmax actions for a batch of feature rows."""
    rows = np.asarray(rows, dtype=float)
    probs = _softmax_rows(rows @ model.weights.T + model.bias)
    return [ActionLabel(int(i)) for i in np.argmax(probs, axis=1)]
