"""Domain objects shared by every stage of the pipeline.

All value types here are immutable. Virtual-clock timestamps are integers
in microseconds (suffix ``_us``); configuration surfaces speak milliseconds
and are converted once at the boundary. Signatures and transport security
are modeled as plain validity flags: the phenomena this simulator studies
are timing phenomena, and real cryptography would only add noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple


class Version(NamedTuple):
    """Position of a committed write: (block height, index within block).

    Versions order lexicographically. ``(0, 0)`` is reserved as the
    version of a key that has never been written (blocks start at 1).
    """

    block_index: int
    tx_index: int


ABSENT_VERSION = Version(0, 0)

OP_CREATE = "create"
OP_UPDATE = "update"
OP_QUERY = "query"
OP_KINDS = (OP_CREATE, OP_UPDATE, OP_QUERY)

ROLE_ENDORSER = "endorser"
ROLE_COMMITTER = "committer"


def _check_unique_keys(entries: Iterable[tuple], what: str) -> None:
    keys = [e[0] for e in entries]
    if len(keys) != len(set(keys)):
        raise ValueError(f"duplicate key in {what}")


@dataclass(frozen=True)
class ReadSet:
    """Keys and the versions they were read at during speculative execution."""

    entries: tuple[tuple[str, Version], ...] = ()

    def __post_init__(self) -> None:
        _check_unique_keys(self.entries, "read set")

    def to_dict(self) -> dict:
        return {"entries": [[k, [v.block_index, v.tx_index]] for k, v in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "ReadSet":
        return cls(tuple((k, Version(v[0], v[1])) for k, v in d["entries"]))


@dataclass(frozen=True)
class WriteSet:
    """Key/value pairs produced by speculative execution."""

    entries: tuple[tuple[str, bytes], ...] = ()

    def __post_init__(self) -> None:
        _check_unique_keys(self.entries, "write set")

    def to_dict(self) -> dict:
        return {"entries": [[k, v.hex()] for k, v in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "WriteSet":
        return cls(tuple((k, bytes.fromhex(v)) for k, v in d["entries"]))


@dataclass(frozen=True)
class Proposal:
    """A client request for endorsement of one chaincode operation."""

    proposal_id: str
    client_id: str
    op_kind: str
    key: str
    value: bytes | None
    submit_time_us: int

    def __post_init__(self) -> None:
        if self.op_kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {self.op_kind!r}")
        if self.op_kind == OP_QUERY and self.value is not None:
            raise ValueError("query proposals carry no value")
        if self.op_kind != OP_QUERY and self.value is None:
            raise ValueError(f"{self.op_kind} proposals require a value")

    def to_dict(self) -> dict:
        return {
            "proposal_id": self.proposal_id,
            "client_id": self.client_id,
            "op_kind": self.op_kind,
            "key": self.key,
            "value": None if self.value is None else self.value.hex(),
            "submit_time_us": self.submit_time_us,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Proposal":
        return cls(
            proposal_id=d["proposal_id"],
            client_id=d["client_id"],
            op_kind=d["op_kind"],
            key=d["key"],
            value=None if d["value"] is None else bytes.fromhex(d["value"]),
            submit_time_us=d["submit_time_us"],
        )


@dataclass(frozen=True)
class Endorsement:
    """One endorser's signed execution result for a proposal.

    ``signature_valid`` stands in for signature verification; an endorsement
    with a bad signature satisfies no policy principal.
    """

    proposal_id: str
    endorser_id: str
    read_set: ReadSet
    write_set: WriteSet
    signature_valid: bool = True

    def to_dict(self) -> dict:
        return {
            "proposal_id": self.proposal_id,
            "endorser_id": self.endorser_id,
            "read_set": self.read_set.to_dict(),
            "write_set": self.write_set.to_dict(),
            "signature_valid": self.signature_valid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Endorsement":
        return cls(
            proposal_id=d["proposal_id"],
            endorser_id=d["endorser_id"],
            read_set=ReadSet.from_dict(d["read_set"]),
            write_set=WriteSet.from_dict(d["write_set"]),
            signature_valid=d["signature_valid"],
        )


@dataclass(frozen=True)
class Transaction:
    """An endorsed operation as submitted to the ordering service."""

    tx_id: str
    read_set: ReadSet
    write_set: WriteSet
    endorsements: tuple[Endorsement, ...]
    created_time_us: int

    def __post_init__(self) -> None:
        ids = {e.proposal_id for e in self.endorsements}
        if len(ids) > 1:
            raise ValueError("endorsements reference different proposals")

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "read_set": self.read_set.to_dict(),
            "write_set": self.write_set.to_dict(),
            "endorsements": [e.to_dict() for e in self.endorsements],
            "created_time_us": self.created_time_us,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Transaction":
        return cls(
            tx_id=d["tx_id"],
            read_set=ReadSet.from_dict(d["read_set"]),
            write_set=WriteSet.from_dict(d["write_set"]),
            endorsements=tuple(Endorsement.from_dict(e) for e in d["endorsements"]),
            created_time_us=d["created_time_us"],
        )


@dataclass(frozen=True)
class Block:
    """A batch of transactions cut by the ordering service.

    ``validity`` is ``None`` on the wire and filled in per committing peer
    at commit time (invalid transactions stay in the block, flagged).
    ``size_bytes`` is the modeled wire size, fixed per run by the batch
    configuration regardless of how many transactions the block holds.
    """

    index: int
    prev_hash: str
    hash: str
    transactions: tuple[Transaction, ...]
    validity: tuple[bool, ...] | None
    cut_time_us: int
    size_bytes: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("block indices start at 1")
        if self.size_bytes <= 0:
            raise ValueError("block size must be positive")
        if self.validity is not None and len(self.validity) != len(self.transactions):
            raise ValueError("one validity flag per transaction")

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "prev_hash": self.prev_hash,
            "hash": self.hash,
            "transactions": [t.to_dict() for t in self.transactions],
            "validity": None if self.validity is None else list(self.validity),
            "cut_time_us": self.cut_time_us,
            "size_bytes": self.size_bytes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        return cls(
            index=d["index"],
            prev_hash=d["prev_hash"],
            hash=d["hash"],
            transactions=tuple(Transaction.from_dict(t) for t in d["transactions"]),
            validity=None if d["validity"] is None else tuple(d["validity"]),
            cut_time_us=d["cut_time_us"],
            size_bytes=d["size_bytes"],
        )


@dataclass(frozen=True)
class PeerSpec:
    """A peer's identity, site, and roles. Every peer commits."""

    peer_id: str
    site_label: str
    roles: frozenset[str] = frozenset({ROLE_COMMITTER})

    def __post_init__(self) -> None:
        unknown = self.roles - {ROLE_ENDORSER, ROLE_COMMITTER}
        if unknown:
            raise ValueError(f"unknown roles {sorted(unknown)}")
        if ROLE_COMMITTER not in self.roles:
            raise ValueError("every peer is a committer")

    @property
    def is_endorser(self) -> bool:
        return ROLE_ENDORSER in self.roles


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def canonical_block_bytes(index: int, prev_hash: str, tx_ids: Iterable[str]) -> bytes:
    """Canonical serialization hashed by :func:`block_digest`.

    Byte layout, fixed so independent implementations agree:

    * block index: 8 bytes, unsigned little-endian
    * previous digest: 4-byte little-endian byte length, then UTF-8 bytes
    * transaction count: 4 bytes, unsigned little-endian
    * each transaction id: 4-byte little-endian byte length, then UTF-8 bytes
    """
    ids = list(tx_ids)
    out = bytearray()
    out += index.to_bytes(8, "little")
    prev = prev_hash.encode("utf-8")
    out += len(prev).to_bytes(4, "little")
    out += prev
    out += len(ids).to_bytes(4, "little")
    for tx_id in ids:
        raw = tx_id.encode("utf-8")
        out += len(raw).to_bytes(4, "little")
        out += raw
    return bytes(out)


def block_digest(index: int, prev_hash: str, tx_ids: Iterable[str]) -> str:
    """64-bit FNV-1a over the canonical block serialization, as 16 hex chars.

    Deliberately non-cryptographic: the chain only needs integrity checks
    inside the simulation, not adversarial collision resistance.
    """
    return format(_fnv1a64(canonical_block_bytes(index, prev_hash, tx_ids)), "016x")


GENESIS_DIGEST = block_digest(0, "", ())


class Ledger:
    """One peer's replica: the block chain plus the world state.

    The world state maps key -> (value, version) where the version is the
    coordinate of the write that produced the value. Appends verify chain
    integrity; all validation logic lives in :mod:`eovsim.phases`.
    """

    def __init__(self) -> None:
        self.blocks: list[Block] = []
        self.world_state: dict[str, tuple[bytes, Version]] = {}

    @property
    def height(self) -> int:
        return len(self.blocks)

    @property
    def tip_hash(self) -> str:
        return self.blocks[-1].hash if self.blocks else GENESIS_DIGEST

    def version_of(self, key: str) -> Version:
        entry = self.world_state.get(key)
        return entry[1] if entry is not None else ABSENT_VERSION

    def value_of(self, key: str) -> bytes | None:
        entry = self.world_state.get(key)
        return entry[0] if entry is not None else None

    def put(self, key: str, value: bytes, version: Version) -> None:
        self.world_state[key] = (value, version)

    def append(self, block: Block) -> None:
        if block.validity is None:
            raise ValueError("only committed blocks (with validity flags) are appended")
        if block.index != self.height + 1:
            raise ValueError(f"expected block {self.height + 1}, got {block.index}")
        if block.prev_hash != self.tip_hash:
            raise ValueError(f"chain break at block {block.index}")
        expected = block_digest(block.index, block.prev_hash, [t.tx_id for t in block.transactions])
        if block.hash != expected:
            raise ValueError(f"bad digest on block {block.index}")
        self.blocks.append(block)


def committed_copy(block: Block, validity: tuple[bool, ...]) -> Block:
    """Per-peer committed instance of a wire block."""
    return replace(block, validity=validity)
