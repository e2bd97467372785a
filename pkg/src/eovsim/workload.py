"""Client workload generation: an open-loop flood of proposals.

The default scenario floods 1000 asset creations on distinct keys at a
fixed 85 ms gap; the client does not wait for commits, so under a delayed
link the orderer keeps producing while the slow peer falls behind. An
optional seeded jitter perturbs each gap symmetrically, preserving the
mean.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .model import OP_CREATE, OP_UPDATE, Proposal

KEY_DISTINCT = "distinct"
KEY_FIXED = "fixed"


@dataclass(frozen=True)
class WorkloadConfig:
    tx_count: int = 1000
    gap_us: int = 85_000
    key_scheme: str = KEY_DISTINCT
    fixed_key: str = "asset"
    op_kind: str = OP_CREATE
    jitter_us: int = 0

    def __post_init__(self) -> None:
        if self.tx_count < 1:
            raise ValueError("tx_count must be at least 1")
        if self.gap_us <= 0:
            raise ValueError("gap must be positive")
        if self.key_scheme not in (KEY_DISTINCT, KEY_FIXED):
            raise ValueError(f"unknown key scheme {self.key_scheme!r}")
        if self.op_kind not in (OP_CREATE, OP_UPDATE):
            raise ValueError("flood operations are create or update")
        if self.jitter_us < 0:
            raise ValueError("jitter cannot be negative")
        if self.jitter_us >= self.gap_us:
            raise ValueError("jitter must stay below the gap")


def generate_flood(
    config: WorkloadConfig,
    rng: Optional[random.Random] = None,
    client_id: str = "client",
) -> list[tuple[int, Proposal]]:
    """Submission schedule: proposal i goes out at i * gap (plus jitter)."""
    if config.jitter_us and rng is None:
        raise ValueError("jitter requires the engine's random generator")
    out: list[tuple[int, Proposal]] = []
    t = 0
    for i in range(1, config.tx_count + 1):
        step = config.gap_us
        if config.jitter_us:
            assert rng is not None
            step += rng.randint(-config.jitter_us, config.jitter_us)
        t += step
        if config.key_scheme == KEY_DISTINCT:
            key = f"asset-{i:06d}"
        else:
            key = config.fixed_key
        proposal = Proposal(
            proposal_id=f"tx-{i:06d}",
            client_id=client_id,
            op_kind=config.op_kind,
            key=key,
            value=f"v-{i:06d}".encode(),
            submit_time_us=t,
        )
        out.append((t, proposal))
    return out
