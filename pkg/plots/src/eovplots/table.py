"""Text table renderer: sampled block heights down, delays across.

Cells are the summary CSV's strings, unmodified, so the table can be
diffed against other renderings of the same file character by character.
"""

from __future__ import annotations

from .summary import Summary

MISSING = "-"


def format_table(summary: Summary) -> str:
    delays = summary.delays
    indices = summary.block_indices
    header = ["block"] + [f"{d}ms" for d in delays]
    body = [
        [str(idx)] + [summary.cell(d, idx) or MISSING for d in delays]
        for idx in indices
    ]
    widths = [max(len(header[c]), *(len(row[c]) for row in body)) for c in range(len(header))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(header, widths))]
    for row in body:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
