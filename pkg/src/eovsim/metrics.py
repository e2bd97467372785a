"""Commit logs, inter-site offsets, aggregation, and CSV export.

An offset is the commit time of block n at a target peer minus the commit
time of the same block at a reference peer; it is computed from commit
events only, never from receipt. Blocks the target never committed (after
a halt) are absent from the series, not zero.

CSV formats are bit-exact. Per-run schema::

    run_id,delay_ms,seed,peer_id,block_index,commit_time_ms,offset_ms,halted

Summary schema::

    delay_ms,block_index,mean_offset_ms,runs

Missing offsets serialize as an empty field; ``halted`` is 0 or 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

# Sampled block heights for summary tables (first block, then roughly
# every ninth through the hundredth).
DEFAULT_ROW_INDICES = (1, 10, 19, 30, 40, 49, 60, 70, 79, 88, 97)

RUN_CSV_HEADER = "run_id,delay_ms,seed,peer_id,block_index,commit_time_ms,offset_ms,halted"
SUMMARY_CSV_HEADER = "delay_ms,block_index,mean_offset_ms,runs"


def fmt_ms(us: int | float) -> str:
    """Milliseconds as a minimal exact decimal string ("850", "10.85")."""
    if isinstance(us, float):
        text = f"{us / 1000.0:.3f}"
        return text.rstrip("0").rstrip(".") if "." in text else text
    sign = "-" if us < 0 else ""
    q, r = divmod(abs(us), 1000)
    if r == 0:
        return f"{sign}{q}"
    frac = f"{r:03d}".rstrip("0")
    return f"{sign}{q}.{frac}"


@dataclass(frozen=True)
class CommitEntry:
    peer_id: str
    block_index: int
    commit_time_us: int
    valid_count: int
    invalid_count: int


class CommitLog:
    """Append-only record of block commits across all peers of one run."""

    def __init__(self) -> None:
        self.entries: list[CommitEntry] = []
        self._last: dict[str, CommitEntry] = {}

    def append(self, entry: CommitEntry) -> None:
        prev = self._last.get(entry.peer_id)
        if prev is not None:
            if entry.block_index <= prev.block_index:
                raise ValueError(f"non-increasing block index for {entry.peer_id}")
            if entry.commit_time_us < prev.commit_time_us:
                raise ValueError(f"commit time went backwards for {entry.peer_id}")
        self._last[entry.peer_id] = entry
        self.entries.append(entry)

    def peers(self) -> list[str]:
        return sorted(self._last)

    def by_peer(self, peer_id: str) -> dict[int, CommitEntry]:
        if peer_id not in self._last:
            raise ValueError(f"unknown peer {peer_id!r}")
        return {e.block_index: e for e in self.entries if e.peer_id == peer_id}


@dataclass(frozen=True)
class OffsetSeries:
    """Per-block commit offsets of ``target_peer`` against ``reference_peer``.

    ``target_halted`` marks a series truncated by a disconnect; blocks past
    the halt simply have no entry.
    """

    reference_peer: str
    target_peer: str
    offsets: tuple[tuple[int, int], ...]  # (block_index, offset_us)
    target_halted: bool = False

    def offset_us(self, block_index: int) -> Optional[int]:
        for idx, off in self.offsets:
            if idx == block_index:
                return off
        return None


def compute_offsets(
    log: CommitLog,
    reference_peer: str,
    target_peer: str,
    halted_peers: Iterable[str] = (),
) -> OffsetSeries:
    """Pairwise commit-time differences for blocks both peers committed."""
    ref = log.by_peer(reference_peer)
    tgt = log.by_peer(target_peer)
    offsets = tuple(
        (idx, tgt[idx].commit_time_us - ref[idx].commit_time_us)
        for idx in sorted(ref.keys() & tgt.keys())
    )
    return OffsetSeries(
        reference_peer=reference_peer,
        target_peer=target_peer,
        offsets=offsets,
        target_halted=target_peer in set(halted_peers),
    )


def slope(series: OffsetSeries, from_index: int = 1, to_index: int = 97) -> float:
    """Offset growth in ms per block between two block heights."""
    a = series.offset_us(from_index)
    b = series.offset_us(to_index)
    if a is None or b is None:
        raise ValueError(f"blocks {from_index}..{to_index} not fully present (halted series?)")
    return (b - a) / 1000.0 / (to_index - from_index)


def summarize(
    runs: Sequence[OffsetSeries],
    row_indices: Sequence[int] = DEFAULT_ROW_INDICES,
) -> list[tuple[int, float, int]]:
    """Mean offset (us) per sampled block over the runs that reached it.

    Returns (block_index, mean_offset_us, contributing_runs); rows no run
    reached are omitted.
    """
    if not runs:
        raise ValueError("need at least one run")
    out = []
    for idx in row_indices:
        values = [v for s in runs if (v := s.offset_us(idx)) is not None]
        if values:
            out.append((idx, sum(values) / len(values), len(values)))
    return out


def run_csv_rows(
    log: CommitLog,
    reference_peer: str,
    halted_peers: Iterable[str],
    run_id: int,
    delay_ms: str,
    seed: int,
) -> list[str]:
    """Per-run CSV body: every peer's commits with offsets vs the reference."""
    halted = set(halted_peers)
    ref = log.by_peer(reference_peer)
    rows = []
    for peer in log.peers():
        flag = "1" if peer in halted else "0"
        for idx, entry in sorted(log.by_peer(peer).items()):
            ref_entry = ref.get(idx)
            offset = "" if ref_entry is None else fmt_ms(entry.commit_time_us - ref_entry.commit_time_us)
            rows.append(
                f"{run_id},{delay_ms},{seed},{peer},{idx},{fmt_ms(entry.commit_time_us)},{offset},{flag}"
            )
    return rows


def write_run_csv(path: str, rows: Iterable[str]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(RUN_CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")


def summary_csv_text(per_delay: Sequence[tuple[str, list[tuple[int, float, int]]]]) -> str:
    """Summary CSV as a string; ``per_delay`` pairs a delay label with the
    output of :func:`summarize`."""
    buf = io.StringIO()
    buf.write(SUMMARY_CSV_HEADER + "\n")
    for delay_label, rows in per_delay:
        for idx, mean_us, nruns in rows:
            buf.write(f"{delay_label},{idx},{fmt_ms(mean_us)},{nruns}\n")
    return buf.getvalue()


def read_summary_csv(path: str) -> list[dict]:
    """Rows of a summary CSV with cells kept verbatim as strings."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SUMMARY_CSV_HEADER.split(","):
            raise ValueError(f"not a summary CSV (header {header!r})")
        out = []
        for row in reader:
            if len(row) != 4:
                raise ValueError(f"malformed summary row {row!r}")
            out.append(
                {
                    "delay_ms": row[0],
                    "block_index": int(row[1]),
                    "mean_offset_ms": row[2],
                    "runs": int(row[3]),
                }
            )
        return out
