"""Simulated delivery network: credit-windowed block streaming, backlog
bounds, handshake and heartbeat-driven disconnects.

The orderer streams blocks to each committing peer over a session with a
byte credit window. A block's bytes depart as credit allows: when free
credit covers the whole block it departs at once, otherwise the head block
leaves in fragments and completes the moment the last needed byte of
credit returns. The peer acknowledges delivered bytes after receiving them
(for the fragment that completes a block, after the block commits), and
the acknowledgement returns the credit one reverse trip later.

This byte-granular release is what produces the observed throughput of
``window_bytes / rtt``. When the window is an exact multiple of the block
size the session degenerates to the classic credited block protocol
(window 1 is stop-and-wait: block n+1 departs exactly when the ack of
block n arrives), and simulated commit times match the closed-form replay
in :func:`replay_offsets_us` to the microsecond. With a fractional window
(say 150000-byte credit over 46000-byte blocks: at most 3 whole blocks in
flight) delivery sustains the fractional rate a quantized window cannot.

Saturation sets in when the per-block delivery period ``rtt · B / W``
exceeds the block production interval P; past that point, per-block commit
offsets between a delayed peer and an undelayed one grow linearly at
``rtt·B/W − P`` per block instead of staying flat. Sessions die two ways:
a heartbeat round trip above the timeout, or the per-session backlog of
undelivered blocks exceeding its limit. A dead session stops receiving;
dispatches to it are recorded and dropped.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .engine import SimulationError
from .model import Block

HANDSHAKING = "handshaking"
STREAMING = "streaming"
DISCONNECTED = "disconnected"

HALT_BACKLOG = "backlog_overflow"
HALT_HEARTBEAT = "heartbeat_timeout"


@dataclass(frozen=True)
class LinkSpec:
    """One-way delay of a directed link; each direction is configured
    independently and stays constant for the whole run."""

    from_node: str
    to_node: str
    delay_us: int

    def __post_init__(self) -> None:
        if self.delay_us < 0:
            raise ValueError("link delay cannot be negative")


@dataclass(frozen=True)
class HeartbeatConfig:
    """Disconnect detection: a session whose round trip exceeds
    ``timeout_us`` is declared dead shortly after streaming starts."""

    interval_us: int = 5_000_000
    timeout_us: int = 7_100_000

    def __post_init__(self) -> None:
        if self.interval_us <= 0 or self.timeout_us <= 0:
            raise ValueError("heartbeat periods must be positive")
        if self.timeout_us <= self.interval_us:
            raise ValueError("heartbeat timeout must exceed the interval")


# deliver_cb(block, nbytes, final, depart_time_us)
DeliverFn = Callable[[Block, int, bool, int], None]
# halt_cb(reason, time_us)
HaltFn = Callable[[str, int], None]


def session_ready_time(now_us: int, fwd_us: int, rev_us: int, handshake_rtts: int) -> int:
    """When a session opened at ``now_us`` starts streaming: one full round
    trip per configured handshake exchange (zero disables the handshake)."""
    return now_us + handshake_rtts * (fwd_us + rev_us)


def heartbeat_deadline(config: HeartbeatConfig, fwd_us: int, rev_us: int, stream_start_us: int) -> Optional[int]:
    """When the session will be declared dead, or None if it never is.

    Link delays are constant for a run, so the outcome is decided up
    front: a round trip beyond the tolerated maximum means the first
    unanswered exchange expires one timeout after streaming starts.
    """
    if fwd_us + rev_us > config.timeout_us:
        return stream_start_us + config.timeout_us
    return None


class DeliverySession:
    """Credit-windowed block stream from the orderer to one peer."""

    def __init__(
        self,
        peer_id: str,
        window_bytes: int,
        backlog_limit_blocks: int,
        deliver_cb: DeliverFn,
        halt_cb: HaltFn,
    ):
        if window_bytes <= 0:
            raise ValueError("window must be positive")
        if backlog_limit_blocks <= 0:
            raise ValueError("backlog limit must be positive")
        self.peer_id = peer_id
        self.window_bytes = window_bytes
        self.backlog_limit_blocks = backlog_limit_blocks
        self.state = HANDSHAKING
        self.outstanding_bytes = 0
        self.stream_start_us: Optional[int] = None
        self.delivered_blocks = 0
        self.dropped_blocks: list[int] = []
        self.halt_reason: Optional[str] = None
        self._sendq: deque[list] = deque()  # [block, remaining_bytes]
        self._deliver = deliver_cb
        self._halt = halt_cb

    @property
    def backlog_len(self) -> int:
        return len(self._sendq)

    def begin_streaming(self, now_us: int) -> None:
        if self.state == DISCONNECTED:
            return
        self.state = STREAMING
        self.stream_start_us = now_us
        self._pump(now_us)

    def enqueue(self, block: Block, now_us: int) -> None:
        """Queue a freshly cut block; overflowing the backlog kills the
        session (the block that would overflow is dropped with it)."""
        if self.state == DISCONNECTED:
            self.dropped_blocks.append(block.index)
            return
        self._sendq.append([block, block.size_bytes])
        if len(self._sendq) > self.backlog_limit_blocks:
            self.disconnect(HALT_BACKLOG, now_us)
            return
        if self.state == STREAMING:
            self._pump(now_us)

    def release(self, nbytes: int, now_us: int) -> None:
        """Acknowledged bytes return their credit."""
        if self.state == DISCONNECTED:
            return
        if nbytes > self.outstanding_bytes:
            raise SimulationError(
                f"duplicate or oversized ack on session to {self.peer_id}: "
                f"{nbytes} bytes acked, {self.outstanding_bytes} outstanding"
            )
        self.outstanding_bytes -= nbytes
        self._pump(now_us)

    def disconnect(self, reason: str, now_us: int) -> None:
        if self.state == DISCONNECTED:
            return
        self.state = DISCONNECTED
        self.halt_reason = reason
        self._sendq.clear()
        self._halt(reason, now_us)

    def _pump(self, now_us: int) -> None:
        if self.state != STREAMING:
            return
        while self._sendq:
            free = self.window_bytes - self.outstanding_bytes
            if free <= 0:
                return
            head = self._sendq[0]
            take = min(free, head[1])
            head[1] -= take
            self.outstanding_bytes += take
            final = head[1] == 0
            if final:
                self._sendq.popleft()
                self.delivered_blocks += 1
            self._deliver(head[0], take, final, now_us)


def replay_offsets_us(
    n_blocks: int,
    production_us: int,
    fwd_us: int,
    rev_us: int,
    window_bytes: int,
    block_bytes: int,
    handshake_rtts: int = 0,
    validation_us: int = 0,
) -> list[int]:
    """Scalar replay of one saturating session; the analytic oracle.

    Block n becomes available at ``n * production_us`` and the reference
    commit time is that instant plus the validation cost (an undelayed
    committer with a free window commits the moment the block is cut).
    Returns, per block, the target peer's commit time minus the reference
    commit time, in microseconds. Implemented as a direct loop over credit
    releases, with no event engine involved, so it can confirm or refute
    the simulator's full event path independently.
    """
    if n_blocks < 1:
        raise ValueError("need at least one block")
    if min(production_us, fwd_us, rev_us, validation_us) < 0:
        raise ValueError("times cannot be negative")
    if window_bytes <= 0 or block_bytes <= 0:
        raise ValueError("window and block sizes must be positive")

    stream_start = handshake_rtts * (fwd_us + rev_us)
    free = window_bytes
    releases: list[tuple[int, int]] = []  # (time, bytes)
    queue: deque[list] = deque()  # [index, remaining]
    commits: dict[int, int] = {}
    next_avail = 1
    t = 0

    while len(commits) < n_blocks:
        candidates = []
        if next_avail <= n_blocks:
            candidates.append(next_avail * production_us)
        if releases:
            candidates.append(releases[0][0])
        if queue and t < stream_start:
            candidates.append(stream_start)
        t = max(t, min(candidates))

        while next_avail <= n_blocks and next_avail * production_us <= t:
            queue.append([next_avail, block_bytes])
            next_avail += 1
        while releases and releases[0][0] <= t:
            free += heapq.heappop(releases)[1]

        if t < stream_start:
            continue
        while queue and free > 0:
            head = queue[0]
            take = min(free, head[1])
            free -= take
            head[1] -= take
            if head[1] == 0:
                queue.popleft()
                commit = t + fwd_us + validation_us
                commits[head[0]] = commit
                heapq.heappush(releases, (commit + rev_us, take))
            else:
                heapq.heappush(releases, (t + fwd_us + rev_us, take))

    return [commits[n] - (n * production_us + validation_us) for n in range(1, n_blocks + 1)]


def offset_oracle(
    production_ms: float,
    delay_ms: float,
    window_blocks: float,
    handshake_rtts: int,
    n: int,
    block_bytes: int = 46_000,
) -> float:
    """Offset of block ``n`` in milliseconds for a symmetric link.

    ``window_blocks`` may be fractional; it is realized as a byte window of
    ``round(window_blocks * block_bytes)``. For an integer window of 1 and
    no handshake this reduces to the closed form
    ``d + max(0, (n-1) * (2d - P))`` once ``2d > P``.
    """
    offsets = replay_offsets_us(
        n_blocks=n,
        production_us=round(production_ms * 1000),
        fwd_us=round(delay_ms * 1000),
        rev_us=round(delay_ms * 1000),
        window_bytes=round(window_blocks * block_bytes),
        block_bytes=block_bytes,
        handshake_rtts=handshake_rtts,
    )
    return offsets[n - 1] / 1000.0
