"""Candle-word lexicon: K-Means codebook over normalized candle shapes.

Each trading day's normalized bar (h_ratio, l_ratio, c_ratio) is mapped to
the nearest of ``n_w`` centroids; the centroid index is the day's word id.
Word ids are plain ints in ``[0, n_w)``.

The clustering is written here rather than delegated to a library because
the contract demands bit-identical results for a fixed seed, an observable
per-iteration objective (``iteration_hook``), and a pinned empty-cluster
repair rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .market_data import NormalizedBar


class LexiconError(ValueError):
    """Raised for infeasible clustering requests or degenerate inputs."""


@dataclass(frozen=True)
class Codebook:
    """K-Means centroids defining the candle-word vocabulary.

    ``centroids`` is an (n_w, 3) array in (h_ratio, l_ratio, c_ratio) space;
    ``seed`` is the RNG seed the fit was initialized with.
    """

    centroids: np.ndarray
    n_w: int
    seed: int

    def __post_init__(self) -> None:
        c = np.asarray(self.centroids, dtype=float)
        object.__setattr__(self, "centroids", c)
        if c.shape != (self.n_w, 3):
            raise LexiconError(f"expected {self.n_w} centroids of dim 3, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise LexiconError("non-finite centroid")
        if len(np.unique(c, axis=0)) != self.n_w:
            raise LexiconError("duplicate centroids")

    def to_json(self) -> str:
        return json.dumps(
            {"n_w": self.n_w, "seed": self.seed, "centroids": self.centroids.tolist()},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        obj = json.loads(text)
        return cls(centroids=np.array(obj["centroids"], dtype=float),
                   n_w=int(obj["n_w"]), seed=int(obj["seed"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Codebook":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _as_points(bars: Sequence[NormalizedBar]) -> np.ndarray:
    return np.array([b.as_tuple() for b in bars], dtype=float)


def _cluster_mean(members: np.ndarray) -> np.ndarray:
    # Mean of deviations from the first member: exact when all members
    # coincide (clusters of identical trading days are common).
    return members[0] + (members - members[0]).mean(axis=0)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new centroid drawn with prob ∝ squared
    distance to the nearest centroid chosen so far."""
    n = len(points)
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        probs = d2 / d2.sum()
        centroids[i] = points[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((points - centroids[i]) ** 2, axis=1))
    return centroids


def fit_codebook(
    bars: Sequence[NormalizedBar],
    n_w: int = 20,
    seed: int = 0,
    max_iters: int = 300,
    iteration_hook: Callable[[int, float], None] | None = None,
) -> Codebook:
    """Lloyd's K-Means over normalized bars with k-means++ seeding.

    Deterministic for fixed (bars, n_w, seed, max_iters).  Stops when
    assignments are unchanged or after ``max_iters`` iterations.  An empty
    cluster is repaired by promoting the point currently farthest from its
    assigned centroid.  ``iteration_hook(iteration, wcss)`` is called once
    per iteration with the within-cluster sum of squares measured right
    after assignment, a non-increasing sequence.
    """
    if not bars:
        raise LexiconError("empty input")
    if n_w < 1:
        raise LexiconError(f"n_w must be >= 1, got {n_w}")
    if max_iters < 1:
        raise LexiconError("max_iters must be >= 1")
    points = _as_points(bars)
    n_distinct = len(np.unique(points, axis=0))
    if n_w > n_distinct:
        raise LexiconError(f"n_w={n_w} exceeds {n_distinct} distinct bar values")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(points, n_w, rng)
    assignments = np.full(len(points), -1, dtype=int)

    for iteration in range(max_iters):
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_assignments = np.argmin(d2, axis=1)
        if iteration_hook is not None:
            wcss = float(d2[np.arange(len(points)), new_assignments].sum())
            iteration_hook(iteration, wcss)
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        promoted: list[int] = []
        for c in range(n_w):
            members = points[assignments == c]
            if len(members):
                centroids[c] = _cluster_mean(members)
            else:
                own = np.sum((points - centroids[assignments]) ** 2, axis=1)
                own[promoted] = -1.0
                j = int(np.argmax(own))
                centroids[c] = points[j]
                promoted.append(j)

    # Distinct cluster means can coincide on degenerate inputs; promote
    # distant non-centroid points until all centroids are unique (always
    # possible because n_w never exceeds the distinct point count).
    while len(np.unique(centroids, axis=0)) < n_w:
        _, first = np.unique(centroids, axis=0, return_index=True)
        dup = min(c for c in range(n_w) if c not in first)
        at_centroid = (points[:, None, :] == centroids[None, :, :]).all(axis=2).any(axis=1)
        own = np.sum((points - centroids[assignments]) ** 2, axis=1)
        own[at_centroid] = -1.0
        centroids[dup] = points[np.argmax(own)]

    return Codebook(centroids=centroids, n_w=n_w, seed=seed)


def assign_word(bar: NormalizedBar, codebook: Codebook) -> int:
    """Index of the nearest centroid (Euclidean); ties go to the lowest index."""
    d2 = np.sum((codebook.centroids - np.array(bar.as_tuple())) ** 2, axis=1)
    return int(np.argmin(d2))


def assign_words(bars: Sequence[NormalizedBar], codebook: Codebook) -> list[int]:
    """Vectorized assign_word over a whole series."""
    if not bars:
        return []
    points = _as_points(bars)
    d2 = np.sum((points[:, None, :] - codebook.centroids[None, :, :]) ** 2, axis=2)
    return [int(i) for i in np.argmin(d2, axis=1)]


def silhouette_score(
    bars: Sequence[NormalizedBar],
    assignments: Sequence[int],
    codebook: Codebook,
) -> float:
    """Mean silhouette over samples: (b - a) / max(a, b) per sample.

    ``a`` is the mean distance to other members of the sample's own cluster
    and ``b`` the smallest mean distance to any other non-empty cluster.
    Samples in singleton clusters score 0, as do degenerate samples with
    a = b = 0.  Requires at least two non-empty clusters.
    """
    if len(bars) != len(assignments):
        raise LexiconError("assignments not aligned with bars")
    labels = np.asarray(assignments, dtype=int)
    occupied = np.unique(labels)
    if len(occupied) < 2:
        raise LexiconError("silhouette needs at least 2 non-empty clusters")
    points = _as_points(bars)
    dist = np.sqrt(np.maximum(
        np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2), 0.0))

    sizes = {int(c): int(np.sum(labels == c)) for c in occupied}
    scores = np.zeros(len(points))
    for i in range(len(points)):
        own = int(labels[i])
        if sizes[own] == 1:
            continue  # singleton: score 0
        a = dist[i, labels == own].sum() / (sizes[own] - 1)
        b = min(
            dist[i, labels == other].mean()
            for other in sizes
            if other != own
        )
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return float(scores.mean())


def sweep_vocab_sizes(
    bars: Sequence[NormalizedBar],
    k_min: int,
    k_max: int,
    seed: int = 0,
    max_iters: int = 300,
) -> list[tuple[int, float]]:
    """Fit codebooks for each n_w in [k_min, k_max] and score each with the
    silhouette measure.  Returns (n_w, score) pairs in ascending n_w order."""
    if k_min < 2:
        raise LexiconError("silhouette sweep needs n_w >= 2")
    if k_max < k_min:
        raise LexiconError("empty sweep range")
    out = []
    for k in range(k_min, k_max + 1):
        codebook = fit_codebook(bars, n_w=k, seed=seed, max_iters=max_iters)
        words = assign_words(bars, codebook)
        out.append((k, silhouette_score(bars, words, codebook)))
    return out
