"""Reader for sweep summary CSVs.

The input contract is the simulator's summary schema::

    delay_ms,block_index,mean_offset_ms,runs

Cells are kept verbatim as strings (the table renderer must reproduce them
exactly); numeric views are derived on demand. Files are opened read-only
and never modified.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

HEADER = ["delay_ms", "block_index", "mean_offset_ms", "runs"]


class SummaryFormatError(ValueError):
    """The input does not conform to the summary CSV schema."""


@dataclass(frozen=True)
class SummaryRow:
    delay_ms: str
    block_index: int
    mean_offset_ms: str
    runs: int

    @property
    def delay_value(self) -> float:
        return float(self.delay_ms)

    @property
    def offset_value(self) -> float:
        return float(self.mean_offset_ms)


@dataclass(frozen=True)
class Summary:
    rows: tuple[SummaryRow, ...]

    @property
    def delays(self) -> list[str]:
        """Delay labels in file order, deduplicated."""
        seen: list[str] = []
        for row in self.rows:
            if row.delay_ms not in seen:
                seen.append(row.delay_ms)
        return seen

    @property
    def block_indices(self) -> list[int]:
        return sorted({r.block_index for r in self.rows})

    def series(self, delay_ms: str) -> list[SummaryRow]:
        return sorted((r for r in self.rows if r.delay_ms == delay_ms), key=lambda r: r.block_index)

    def cell(self, delay_ms: str, block_index: int) -> str | None:
        for row in self.rows:
            if row.delay_ms == delay_ms and row.block_index == block_index:
                return row.mean_offset_ms
        return None


def load_summary(path: str | Path) -> Summary:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != HEADER:
                raise SummaryFormatError(
                    f"{path}: expected header {','.join(HEADER)!r}, found {header!r}"
                )
            rows = []
            for lineno, raw in enumerate(reader, start=2):
                if len(raw) != len(HEADER):
                    raise SummaryFormatError(f"{path}:{lineno}: expected {len(HEADER)} fields")
                try:
                    rows.append(
                        SummaryRow(
                            delay_ms=raw[0],
                            block_index=int(raw[1]),
                            mean_offset_ms=raw[2],
                            runs=int(raw[3]),
                        )
                    )
                except ValueError as exc:
                    raise SummaryFormatError(f"{path}:{lineno}: {exc}") from None
    except OSError as exc:
        raise SummaryFormatError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise SummaryFormatError(f"{path}: no data rows")
    return Summary(tuple(rows))
