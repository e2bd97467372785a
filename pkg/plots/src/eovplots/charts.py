"""Chart builders: offsets by block height, offset growth by delay.

Data points are plotted exactly as read from the CSV, with no smoothing or
resampling; a halted delay's line simply stops at its last reported block.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .summary import Summary

SLOPE_FROM_BLOCK = 1
SLOPE_TO_BLOCK = 97


def offsets_figure(summary: Summary):
    """One line per delay: x is block height, y is mean commit offset."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for delay in summary.delays:
        rows = summary.series(delay)
        ax.plot(
            [r.block_index for r in rows],
            [r.offset_value for r in rows],
            marker="o",
            markersize=3,
            label=f"{delay} ms",
        )
    ax.set_xlabel("block height")
    ax.set_ylabel("mean commit offset (ms)")
    ax.set_title("Commit offset by block height")
    ax.legend(title="injected delay")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def slope_points(summary: Summary) -> list[tuple[float, float]]:
    """(delay, growth in ms/block) per delay, from the sampled endpoints."""
    points = []
    for delay in summary.delays:
        first = summary.cell(delay, SLOPE_FROM_BLOCK)
        last = summary.cell(delay, SLOPE_TO_BLOCK)
        if first is None or last is None:
            raise ValueError(
                f"delay {delay}: blocks {SLOPE_FROM_BLOCK} and {SLOPE_TO_BLOCK} "
                "are both required for the growth chart (halted sweep?)"
            )
        growth = (float(last) - float(first)) / (SLOPE_TO_BLOCK - SLOPE_FROM_BLOCK)
        points.append((float(delay), growth))
    return points


def slope_figure(summary: Summary):
    """Offset growth rate against injected delay: flat, then a knee."""
    points = slope_points(summary)
    if len(points) < 2:
        raise ValueError("the growth chart needs at least two delay values")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([p[0] for p in points], [p[1] for p in points], marker="o")
    ax.set_xlabel("injected one-way delay (ms)")
    ax.set_ylabel(f"offset growth (ms/block, blocks {SLOPE_FROM_BLOCK}-{SLOPE_TO_BLOCK})")
    ax.set_title("Offset growth by injected delay")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def save_figure(fig, out_path: str | Path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path)
    plt.close(fig)
