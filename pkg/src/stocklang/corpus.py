"""Rolling-window sentences over the candle-word sequence."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class SentenceMatrix:
    """Stride-1 rolling windows of the word sequence.

    ``sentences`` has shape (n_s, l_s) with n_s = n_d - (l_s - 1); row r is
    the word subsequence [r, r + l_s).
    """

    sentences: np.ndarray
    l_s: int
    n_s: int


def build_sentences(words: Sequence[int], l_s: int = 5) -> SentenceMatrix:
    """Group consecutive words into overlapping sentences of length l_s."""
    if l_s < 1:
        raise CorpusError(f"l_s must be >= 1, got {l_s}")
    if len(words) < l_s:
        raise CorpusError(f"sequence of {len(words)} words is shorter than l_s={l_s}")
    seq = np.asarray(words, dtype=int)
    n_s = len(seq) - (l_s - 1)
    rows = np.stack([seq[r:r + l_s] for r in range(n_s)])
    return SentenceMatrix(sentences=rows, l_s=l_s, n_s=n_s)
