"""The three pipeline phases: execute, order, validate.

Execution is speculative: an endorser runs the operation against its own
world state and records what it read (keys with versions) and what it
would write (keys with values) without touching the state. The ordering
service batches endorsed transactions into blocks, cutting on a count
threshold or a timeout, whichever comes first. Validation replays each
delivered block sequentially on the committing peer: a transaction is kept
only if its endorsements still satisfy the policy and every read-set
version matches the current world state; the write sets of surviving
transactions are applied in block order, so two transactions endorsed
against the same version conflict and the second is flagged invalid.

Validation is a pure function of (chain prefix, block): network delay can
move commit times but never changes validity flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .engine import SimulationError
from .model import (
    Block,
    Endorsement,
    Ledger,
    OP_CREATE,
    OP_QUERY,
    OP_UPDATE,
    Proposal,
    ReadSet,
    Transaction,
    Version,
    WriteSet,
    block_digest,
    committed_copy,
)
from .policy import PolicyNode, evaluate

VALID = "valid"
INVALID_POLICY = "invalid_policy"
INVALID_MVCC = "invalid_mvcc"


@dataclass(frozen=True)
class BatchConfig:
    """Block-cutting parameters of the ordering service."""

    max_message_count: int = 10
    timeout_us: int = 1_000_000
    block_size_bytes: int = 46_000

    def __post_init__(self) -> None:
        if self.max_message_count <= 0:
            raise ValueError("max_message_count must be positive")
        if self.timeout_us <= 0:
            raise ValueError("batch timeout must be positive")
        if self.block_size_bytes <= 0:
            raise ValueError("block size must be positive")


@dataclass(frozen=True)
class ValidationReport:
    """Per-transaction outcomes of committing one block on one peer."""

    block_index: int
    outcomes: tuple[str, ...]
    commit_time_us: int

    @property
    def valid_count(self) -> int:
        return sum(1 for o in self.outcomes if o == VALID)

    @property
    def invalid_count(self) -> int:
        return len(self.outcomes) - self.valid_count


def execute_proposal(endorser_id: str, ledger: Ledger, proposal: Proposal) -> Endorsement:
    """Speculatively run one operation on an endorser's world state.

    create(k, v) writes blindly; update(k, v) reads the current version of
    k then writes; query(k) only reads. Reading an absent key records the
    reserved version ``(0, 0)`` — whether that is acceptable is decided at
    validation, not here. The world state is never modified.
    """
    key = proposal.key
    if proposal.op_kind == OP_CREATE:
        read = ReadSet()
        write = WriteSet(((key, proposal.value),))
    elif proposal.op_kind == OP_UPDATE:
        read = ReadSet(((key, ledger.version_of(key)),))
        write = WriteSet(((key, proposal.value),))
    elif proposal.op_kind == OP_QUERY:
        read = ReadSet(((key, ledger.version_of(key)),))
        write = WriteSet()
    else:  # pragma: no cover - Proposal validates op_kind
        raise ValueError(proposal.op_kind)
    return Endorsement(
        proposal_id=proposal.proposal_id,
        endorser_id=endorser_id,
        read_set=read,
        write_set=write,
    )


def assemble_transaction(
    proposal: Proposal,
    endorsements: Sequence[Endorsement],
    policy: PolicyNode,
    peer_sites: Mapping[str, str],
    now_us: int,
) -> Transaction | None:
    """Client-side assembly: returns a transaction, or None when the
    collected endorsements do not satisfy the policy (the client then
    never submits to the orderer).
    """
    for e in endorsements:
        if e.proposal_id != proposal.proposal_id:
            raise SimulationError(
                f"endorsement for {e.proposal_id} attached to proposal {proposal.proposal_id}"
            )
    if not evaluate(policy, endorsements, peer_sites):
        return None
    first = endorsements[0]
    for e in endorsements[1:]:
        if e.read_set != first.read_set or e.write_set != first.write_set:
            # Diverging endorsements are out of scope for this model; in the
            # supported topologies endorsers always agree.
            raise SimulationError(f"diverging endorsements for proposal {proposal.proposal_id}")
    return Transaction(
        tx_id=proposal.proposal_id,
        read_set=first.read_set,
        write_set=first.write_set,
        endorsements=tuple(endorsements),
        created_time_us=now_us,
    )


@dataclass
class OrdererState:
    """Pending queue and block builder of the single logical orderer.

    ``epoch`` increments at every cut; a timeout timer armed in an older
    epoch is stale and must be ignored by the caller.
    """

    batch: BatchConfig
    pending: list[Transaction] = field(default_factory=list)
    epoch: int = 0
    next_index: int = 1
    prev_hash: str = ""
    blocks_cut: int = 0

    def __post_init__(self) -> None:
        if not self.prev_hash:
            from .model import GENESIS_DIGEST

            self.prev_hash = GENESIS_DIGEST

    @property
    def pending_count(self) -> int:
        return len(self.pending)

    def receive(self, tx: Transaction, now_us: int) -> Block | None:
        """Append in arrival order; cut immediately on reaching the count."""
        self.pending.append(tx)
        if len(self.pending) >= self.batch.max_message_count:
            return self._cut(now_us)
        return None

    def flush(self, now_us: int) -> Block | None:
        """Timeout path: cut whatever is pending; never an empty block."""
        if not self.pending:
            return None
        return self._cut(now_us)

    def _cut(self, now_us: int) -> Block:
        txs = tuple(self.pending)
        self.pending.clear()
        self.epoch += 1
        index = self.next_index
        digest = block_digest(index, self.prev_hash, [t.tx_id for t in txs])
        block = Block(
            index=index,
            prev_hash=self.prev_hash,
            hash=digest,
            transactions=txs,
            validity=None,
            cut_time_us=now_us,
            size_bytes=self.batch.block_size_bytes,
        )
        self.next_index += 1
        self.prev_hash = digest
        self.blocks_cut += 1
        return block


def validate_and_commit(
    ledger: Ledger,
    block: Block,
    policy: PolicyNode,
    peer_sites: Mapping[str, str],
    now_us: int,
) -> ValidationReport:
    """Validate a delivered block on one peer and append it to the chain.

    Transactions are checked in block order: policy first, then the MVCC
    read-set comparison against the evolving world state; valid writes
    apply immediately with version (block index, position). The block is
    appended with its flags even if every transaction failed.
    """
    if block.index != ledger.height + 1:
        raise SimulationError(
            f"out-of-order delivery: block {block.index} on chain of height {ledger.height}"
        )
    outcomes: list[str] = []
    for pos, tx in enumerate(block.transactions):
        if not evaluate(policy, tx.endorsements, peer_sites):
            outcomes.append(INVALID_POLICY)
            continue
        if any(ledger.version_of(key) != version for key, version in tx.read_set.entries):
            outcomes.append(INVALID_MVCC)
            continue
        outcomes.append(VALID)
        for key, value in tx.write_set.entries:
            ledger.put(key, value, Version(block.index, pos))
    flags = tuple(o == VALID for o in outcomes)
    ledger.append(committed_copy(block, flags))
    return ValidationReport(block_index=block.index, outcomes=tuple(outcomes), commit_time_us=now_us)
