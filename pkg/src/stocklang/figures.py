"""Report figures, rendered headless to PNG files next to the CSVs.

Rendering is deterministic: fixed figure geometry, no timestamps, and the
PNG metadata stripped, so reruns with identical inputs are byte-identical.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}


def render_mean_yields(means: dict[tuple[str, str], float], path: str | Path) -> None:
    """Grouped bar chart of mean yield per strategy for each phase."""
    strategies = sorted({s for s, _ in means}) or ["(none)"]
    phases = ("test", "validation")
    x = range(len(strategies))
    width = 0.38

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    for k, phase in enumerate(phases):
        values = [means.get((s, phase), 0.0) for s in strategies]
        offset = (k - 0.5) * width
        ax.bar([i + offset for i in x], values, width, label=phase)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(list(x))
    ax.set_xticklabels(strategies)
    ax.set_ylabel("mean yield ($)")
    ax.set_title("Mean simulated yield by strategy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_silhouette_sweep(pairs: Sequence[tuple[int, float]], path: str | Path) -> None:
    """Silhouette score against vocabulary size, for choosing n_w."""
    ks = [k for k, _ in pairs]
    scores = [s for _, s in pairs]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(ks, scores, marker="o")
    if scores:
        best = max(range(len(scores)), key=scores.__getitem__)
        ax.scatter([ks[best]], [scores[best]], color="crimson", zorder=3,
                   label=f"best n_w = {ks[best]}")
        ax.legend()
    ax.set_xlabel("vocabulary size n_w")
    ax.set_ylabel("mean silhouette")
    ax.set_title("Codebook size selection")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
