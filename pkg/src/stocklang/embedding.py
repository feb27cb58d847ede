"""Skip-gram word vectors for the candle-word corpus.

A one-hidden-layer network trained by per-pair stochastic gradient descent:
for each (center, context) pair drawn from the sentences, the center word's
input vector is pushed to predict the context word under a full-softmax
output layer.  The vocabulary is tiny (tens of words), so the exact softmax
objective is cheap and keeps training deterministic and gradient-checkable.

Context pairs never cross sentence boundaries.  The learned word vectors
are the input-side weight matrix: row i is word i's vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import SentenceMatrix


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingConfig:
    """Training hyperparameters.

    n_v: vector dimension (hidden-layer width).
    n_ww: context window, in words (trading days) to each side.
    learning_rate decays linearly to min_learning_rate over all SGD steps.
    """

    n_v: int = 10
    n_ww: int = 2
    epochs: int = 50
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_v < 1 or self.n_ww < 1:
            raise EmbeddingError("n_v and n_ww must be >= 1")
        if self.epochs < 1:
            raise EmbeddingError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise EmbeddingError("learning rate must be positive")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Learned word vectors, one row per word (n_w x n_v)."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", r)
        if r.ndim != 2:
            raise EmbeddingError(f"expected 2-d matrix, got shape {r.shape}")
        if not np.all(np.isfinite(r)):
            raise EmbeddingError("non-finite embedding entry")

    @property
    def n_w(self) -> int:
        return self.rows.shape[0]

    @property
    def n_v(self) -> int:
        return self.rows.shape[1]

    def to_json(self, config: EmbeddingConfig | None = None) -> str:
        obj = {"n_w": self.n_w, "n_v": self.n_v, "rows": self.rows.tolist()}
        if config is not None:
            obj["config"] = asdict(config)
        return json.dumps(obj, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EmbeddingMatrix":
        obj = json.loads(text)
        rows = np.array(obj["rows"], dtype=float)
        if rows.shape != (obj["n_w"], obj["n_v"]):
            raise EmbeddingError("rows shape disagrees with declared n_w/n_v")
        return cls(rows=rows)

    def save(self, path: str | Path, config: EmbeddingConfig | None = None) -> None:
        Path(path).write_text(self.to_json(config) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingMatrix":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class SkipGramModel:
    """Full trained state: input vectors, output layer, per-epoch mean loss."""

    w_in: np.ndarray
    w_out: np.ndarray
    epoch_losses: list[float] = field(default_factory=list)

    def predict_context(self, word: int) -> np.ndarray:
        """Softmax distribution over context words given a center word."""
        logits = self.w_out @ self.w_in[word]
        logits = logits - logits.max()
        p = np.exp(logits)
        return p / p.sum()


def context_pairs(sentences: SentenceMatrix, n_ww: int) -> list[tuple[int, int]]:
    """(center, context) pairs: for each position in each sentence, every
    other word within +-n_ww positions in the same sentence."""
    pairs = []
    for row in sentences.sentences:
        length = len(row)
        for i in range(length):
            lo = max(0, i - n_ww)
            hi = min(length, i + n_ww + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((int(row[i]), int(row[j])))
    return pairs


def skipgram_loss(w_in: np.ndarray, w_out: np.ndarray,
                  pairs: Sequence[tuple[int, int]]) -> float:
    """Total cross-entropy of context words under the full softmax."""
    total = 0.0
    for center, context in pairs:
        logits = w_out @ w_in[center]
        m = logits.max()
        log_z = m + np.log(np.exp(logits - m).sum())
        total += log_z - logits[context]
    return float(total)


def skipgram_gradients(w_in: np.ndarray, w_out: np.ndarray,
                       pairs: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of skipgram_loss w.r.t. both weight matrices,
    summed over the batch."""
    g_in = np.zeros_like(w_in)
    g_out = np.zeros_like(w_out)
    for center, context in pairs:
        h = w_in[center]
        logits = w_out @ h
        logits = logits - logits.max()
        p = np.exp(logits)
        p /= p.sum()
        p[context] -= 1.0
        g_in[center] += w_out.T @ p
        g_out += np.outer(p, h)
    return g_in, g_out


def fit_skipgram(sentences: SentenceMatrix, n_w: int,
                 config: EmbeddingConfig) -> SkipGramModel:
    """Train by SGD, one (center, context) pair at a time.

    Pair order is reshuffled each epoch with the seeded RNG and the step
    size decays linearly from learning_rate to min_learning_rate across
    all steps, so identical inputs give bit-identical weights.
    """
    if int(np.max(sentences.sentences)) >= n_w or int(np.min(sentences.sentences)) < 0:
        raise EmbeddingError("word id out of range for n_w")
    pairs = context_pairs(sentences, config.n_ww)
    if not pairs:
        raise EmbeddingError("corpus has no context pairs (need a sentence of length >= 2)")

    rng = np.random.default_rng(config.seed)
    w_in = (rng.random((n_w, config.n_v)) - 0.5) / config.n_v
    w_out = np.zeros((n_w, config.n_v))

    pair_arr = np.asarray(pairs, dtype=int)
    total_steps = config.epochs * len(pairs)
    lr0, lr1 = config.learning_rate, config.min_learning_rate
    step = 0
    epoch_losses = []
    for _ in range(config.epochs):
        order = rng.permutation(len(pairs))
        epoch_loss = 0.0
        for idx in order:
            center, context = pair_arr[idx]
            lr = lr0 + (lr1 - lr0) * (step / max(1, total_steps - 1))
            h = w_in[center].copy()
            logits = w_out @ h
            m = logits.max()
            shifted = np.exp(logits - m)
            z = shifted.sum()
            epoch_loss += float(m + np.log(z) - logits[context])
            p = shifted / z
            p[context] -= 1.0
            w_in[center] -= lr * (w_out.T @ p)
            w_out -= lr * np.outer(p, h)
            step += 1
        epoch_losses.append(epoch_loss / len(pairs))
    return SkipGramModel(w_in=w_in, w_out=w_out, epoch_losses=epoch_losses)


def train_embeddings(sentences: SentenceMatrix, n_w: int,
                     config: EmbeddingConfig) -> EmbeddingMatrix:
    """Train skip-gram vectors and return the input-side weight matrix."""
    model = fit_skipgram(sentences, n_w, config)
    return EmbeddingMatrix(rows=model.w_in)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    norm = np.linalg.norm(u) * np.linalg.norm(v)
    return float(u @ v / norm) if norm > 0 else 0.0


def vector_arithmetic_probe(wm: EmbeddingMatrix, a: int, b: int, c: int) -> int:
    """Word whose vector is most cosine-similar to vec(a) - vec(b) + vec(c).

    The words a, b, c themselves are excluded from the candidates; ties go
    to the lowest word id.  Diagnostic analogy probe, not used by the
    prediction pipeline.
    """
    if wm.n_w <= 3:
        raise EmbeddingError("analogy probe needs a vocabulary larger than 3")
    for w in (a, b, c):
        if not 0 <= w < wm.n_w:
            raise EmbeddingError(f"word id {w} out of range")
    target = wm.rows[a] - wm.rows[b] + wm.rows[c]
    best, best_sim = -1, -np.inf
    for w in range(wm.n_w):
        if w in (a, b, c):
            continue
        sim = cosine_similarity(target, wm.rows[w])
        if sim > best_sim:
            best, best_sim = w, sim
    return best
