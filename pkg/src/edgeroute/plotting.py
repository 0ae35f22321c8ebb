"""Tradeoff figures rendered next to the delimited output.

One figure, two panels: quality against realized latency, and quality
against edge usage. Points follow threshold order, so each line traces
the sweep from edge-everything to device-everything.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import SweepPoint

_MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")


def _draw(axes, label: str, points: list[SweepPoint], marker: str) -> None:
    filled = [p for p in points if p.metrics.turn_count > 0]
    latency_ms = [p.metrics.avg_latency * 1000.0 for p in filled]
    quality = [p.metrics.avg_quality for p in filled]
    usage = [p.metrics.llm_usage for p in filled]
    axes[0].plot(latency_ms, quality, marker=marker, markersize=3.5, linewidth=1.2, label=label)
    axes[1].plot(usage, quality, marker=marker, markersize=3.5, linewidth=1.2, label=label)


def _render(curves: dict[str, list[SweepPoint]], path: str | Path, title: str | None) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for i, (label, points) in enumerate(curves.items()):
        _draw(axes, label, points, _MARKERS[i % len(_MARKERS)])
    axes[0].set_xlabel("avg latency (ms)")
    axes[0].set_ylabel("avg quality")
    axes[1].set_xlabel("edge usage")
    axes[1].set_ylabel("avg quality")
    for ax in axes:
        ax.grid(True, alpha=0.3)
        if len(curves) > 1:
            ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(points: list[SweepPoint], path: str | Path, *, title: str | None = None) -> None:
    """Render one sweep's tradeoff curves to an image file."""
    _render({"sweep": points}, path, title)


def plot_compare(
    curves: dict[str, list[SweepPoint]], path: str | Path, *, title: str | None = None
) -> None:
    """Render labeled sweeps onto shared tradeoff axes."""
    _render(curves, path, title)
