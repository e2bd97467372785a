"""Deterministic discrete-event core: one virtual clock, one ordered queue.

Times are integers (microseconds). Events at equal times run in insertion
order, so a run is a pure function of (configuration, seed): identical
inputs give bit-identical traces on any platform. The engine owns the only
random generator; nothing else in the package may source randomness.
"""

from __future__ import annotations

import heapq
import random
from typing import Any, Callable, Optional


class SimulationError(RuntimeError):
    """Fatal internal inconsistency (scheduling into the past, protocol
    violations such as duplicate acknowledgements or block gaps)."""


TraceFn = Callable[[int, int, Any], None]


class Engine:
    def __init__(self, seed: int = 0, trace: Optional[TraceFn] = None):
        self.now_us: int = 0
        self.rng = random.Random(seed)
        self.trace = trace
        self._heap: list[tuple[int, int, Any]] = []
        self._seq = 0

    def schedule(self, time_us: int, payload: Any) -> int:
        """Enqueue ``payload`` at ``time_us``; returns the tie-break sequence."""
        if time_us < self.now_us:
            raise SimulationError(f"scheduling into the past: {time_us} < {self.now_us}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (time_us, seq, payload))
        return seq

    def schedule_after(self, delay_us: int, payload: Any) -> int:
        return self.schedule(self.now_us + delay_us, payload)

    def run(self, handler: Callable[[Any], None], until_us: Optional[int] = None) -> int:
        """Process events in (time, seq) order.

        Stops when the queue is empty or the next event lies past
        ``until_us``; returns the clock. A later ``run`` resumes exactly
        where the previous one stopped.
        """
        while self._heap:
            if until_us is not None and self._heap[0][0] > until_us:
                break
            time_us, seq, payload = heapq.heappop(self._heap)
            self.now_us = time_us
            if self.trace is not None:
                self.trace(time_us, seq, payload)
            handler(payload)
        return self.now_us

    @property
    def pending(self) -> int:
        return len(self._heap)
