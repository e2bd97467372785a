"""End-to-end simulation of one run: client flood through endorsement,
ordering, delivery, and commit, on one deterministic event engine.

The client co-locates with the endorsing sites and targets only the
endorsers named by the policy, so endorsement round trips never touch the
delayed link and the ordering schedule is independent of the swept delay.
Each committing peer owns a ledger replica and a delivery session; commit
times land in a shared log from which offsets are derived.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .config import CLIENT_NODE, ORDERER_NODE, RunConfig
from .engine import Engine
from .metrics import CommitEntry, CommitLog, OffsetSeries, compute_offsets, fmt_ms, run_csv_rows
from .model import Block, Endorsement, Ledger, Proposal, Transaction
from .net import (
    DISCONNECTED,
    DeliverySession,
    HALT_HEARTBEAT,
    heartbeat_deadline,
    session_ready_time,
)
from .phases import OrdererState, assemble_transaction, execute_proposal, validate_and_commit
from .policy import principal_labels
from .workload import generate_flood


# Event payloads. Frozen dataclasses keep traces readable and make the
# dispatch table explicit.
@dataclass(frozen=True)
class SubmitProposal:
    proposal: Proposal


@dataclass(frozen=True)
class EndorseArrive:
    proposal: Proposal
    endorser_id: str


@dataclass(frozen=True)
class EndorseReturn:
    proposal: Proposal
    endorsement: Endorsement


@dataclass(frozen=True)
class TxArrive:
    tx: Transaction


@dataclass(frozen=True)
class BatchTimeout:
    epoch: int


@dataclass(frozen=True)
class StreamStart:
    peer_id: str


@dataclass(frozen=True)
class FragmentArrive:
    peer_id: str
    block: Block
    nbytes: int
    final: bool


@dataclass(frozen=True)
class CommitBlock:
    peer_id: str
    block: Block
    ack_bytes: int


@dataclass(frozen=True)
class AckArrive:
    peer_id: str
    nbytes: int


@dataclass(frozen=True)
class HeartbeatFail:
    peer_id: str


@dataclass(frozen=True)
class HaltRecord:
    peer_id: str
    time_us: int
    reason: str
    committed_height: int


@dataclass
class RunResult:
    config: RunConfig
    commit_log: CommitLog
    halts: list[HaltRecord]
    ledgers: dict[str, Ledger]
    blocks_produced: int
    submitted: int
    rejected: int
    final_time_us: int

    @property
    def halted_peers(self) -> list[str]:
        return sorted({h.peer_id for h in self.halts})

    @property
    def halted(self) -> bool:
        return bool(self.halts)

    def offsets(self, reference_peer: Optional[str] = None, target_peer: Optional[str] = None) -> OffsetSeries:
        return compute_offsets(
            self.commit_log,
            reference_peer or self.config.reference_peer,
            target_peer or self.config.target_peer,
            halted_peers=self.halted_peers,
        )

    def csv_rows(self, run_id: int, delay_label: Optional[str] = None) -> list[str]:
        return run_csv_rows(
            self.commit_log,
            reference_peer=self.config.reference_peer,
            halted_peers=self.halted_peers,
            run_id=run_id,
            delay_ms=delay_label if delay_label is not None else fmt_ms(self.config.injected_delay_us),
            seed=self.config.seed,
        )


class Simulation:
    def __init__(self, config: RunConfig, trace=None):
        self.config = config
        self.engine = Engine(seed=config.seed, trace=trace)
        self.ledgers: dict[str, Ledger] = {p.peer_id: Ledger() for p in config.peers}
        self.peer_sites = {p.peer_id: p.site_label for p in config.peers}
        self.commit_log = CommitLog()
        self.halts: list[HaltRecord] = []
        self.rejected = 0
        self.submitted = 0
        self.orderer = OrdererState(batch=config.batch)

        labels = principal_labels(config.policy)
        self.endorser_targets = sorted(
            p.peer_id for p in config.peers if p.is_endorser and p.site_label in labels
        )
        self.committers = sorted(p.peer_id for p in config.peers)
        self._responses: dict[str, list[Endorsement]] = {}
        self._link_overrides = {
            (l.from_node, l.to_node): l.delay_us for l in config.link_overrides
        }
        self.sessions: dict[str, DeliverySession] = {}
        for peer_id in self.committers:
            self.sessions[peer_id] = DeliverySession(
                peer_id=peer_id,
                window_bytes=config.window_bytes,
                backlog_limit_blocks=config.backlog_limit_blocks,
                deliver_cb=self._make_deliver(peer_id),
                halt_cb=self._make_halt(peer_id),
            )

        self._dispatch = {
            SubmitProposal: self._on_submit,
            EndorseArrive: self._on_endorse_arrive,
            EndorseReturn: self._on_endorse_return,
            TxArrive: self._on_tx_arrive,
            BatchTimeout: self._on_batch_timeout,
            StreamStart: self._on_stream_start,
            FragmentArrive: self._on_fragment,
            CommitBlock: self._on_commit,
            AckArrive: self._on_ack,
            HeartbeatFail: self._on_heartbeat_fail,
        }

    # -- topology ---------------------------------------------------------

    def link_us(self, from_node: str, to_node: str) -> int:
        """One-way delay: explicit override, else the cloud-boundary rule."""
        override = self._link_overrides.get((from_node, to_node))
        if override is not None:
            return override
        a = self.config.node_site(from_node)
        b = self.config.node_site(to_node)
        delayed = self.config.delayed_site
        if delayed and (a == delayed) != (b == delayed):
            return self.config.base_delay_us + self.config.injected_delay_us
        return 0

    # -- lifecycle --------------------------------------------------------

    def start(self) -> None:
        for peer_id in self.committers:
            fwd = self.link_us(ORDERER_NODE, peer_id)
            rev = self.link_us(peer_id, ORDERER_NODE)
            start_us = session_ready_time(0, fwd, rev, self.config.handshake_rtts)
            self.engine.schedule(start_us, StreamStart(peer_id))
            deadline = heartbeat_deadline(self.config.heartbeat, fwd, rev, start_us)
            if deadline is not None:
                self.engine.schedule(deadline, HeartbeatFail(peer_id))
        for submit_us, proposal in generate_flood(self.config.workload, rng=self.engine.rng):
            self.engine.schedule(submit_us, SubmitProposal(proposal))

    def run(self, until_us: Optional[int] = None) -> RunResult:
        self.start()
        final = self.engine.run(self._handle, until_us)
        return RunResult(
            config=self.config,
            commit_log=self.commit_log,
            halts=self.halts,
            ledgers=self.ledgers,
            blocks_produced=self.orderer.blocks_cut,
            submitted=self.submitted,
            rejected=self.rejected,
            final_time_us=final,
        )

    def _handle(self, event) -> None:
        self._dispatch[type(event)](event)

    # -- execution phase --------------------------------------------------

    def _on_submit(self, ev: SubmitProposal) -> None:
        self._responses[ev.proposal.proposal_id] = []
        for endorser in self.endorser_targets:
            self.engine.schedule_after(
                self.link_us(CLIENT_NODE, endorser), EndorseArrive(ev.proposal, endorser)
            )

    def _on_endorse_arrive(self, ev: EndorseArrive) -> None:
        endorsement = execute_proposal(ev.endorser_id, self.ledgers[ev.endorser_id], ev.proposal)
        self.engine.schedule_after(
            self.link_us(ev.endorser_id, CLIENT_NODE), EndorseReturn(ev.proposal, endorsement)
        )

    def _on_endorse_return(self, ev: EndorseReturn) -> None:
        got = self._responses[ev.proposal.proposal_id]
        got.append(ev.endorsement)
        if len(got) < len(self.endorser_targets):
            return
        del self._responses[ev.proposal.proposal_id]
        tx = assemble_transaction(ev.proposal, got, self.config.policy, self.peer_sites, self.engine.now_us)
        if tx is None:
            self.rejected += 1
            return
        self.submitted += 1
        self.engine.schedule_after(self.link_us(CLIENT_NODE, ORDERER_NODE), TxArrive(tx))

    # -- ordering phase ---------------------------------------------------

    def _on_tx_arrive(self, ev: TxArrive) -> None:
        was_empty = self.orderer.pending_count == 0
        block = self.orderer.receive(ev.tx, self.engine.now_us)
        if block is not None:
            self._broadcast(block)
        elif was_empty:
            self.engine.schedule_after(self.config.batch.timeout_us, BatchTimeout(self.orderer.epoch))

    def _on_batch_timeout(self, ev: BatchTimeout) -> None:
        if ev.epoch != self.orderer.epoch:
            return  # a count-cut already consumed this batch
        block = self.orderer.flush(self.engine.now_us)
        if block is not None:
            self._broadcast(block)

    def _broadcast(self, block: Block) -> None:
        for peer_id in self.committers:
            self.sessions[peer_id].enqueue(block, self.engine.now_us)

    # -- delivery and validation ------------------------------------------

    def _make_deliver(self, peer_id: str):
        def deliver(block: Block, nbytes: int, final: bool, depart_us: int) -> None:
            arrive = depart_us + self.config.orderer_delay_us + self.link_us(ORDERER_NODE, peer_id)
            self.engine.schedule(arrive, FragmentArrive(peer_id, block, nbytes, final))

        return deliver

    def _make_halt(self, peer_id: str):
        def halt(reason: str, time_us: int) -> None:
            self.halts.append(
                HaltRecord(
                    peer_id=peer_id,
                    time_us=time_us,
                    reason=reason,
                    committed_height=self.ledgers[peer_id].height,
                )
            )

        return halt

    def _on_stream_start(self, ev: StreamStart) -> None:
        self.sessions[ev.peer_id].begin_streaming(self.engine.now_us)

    def _on_fragment(self, ev: FragmentArrive) -> None:
        if self.sessions[ev.peer_id].state == DISCONNECTED:
            return  # data in flight at disconnect time is lost
        if ev.final:
            self.engine.schedule_after(
                self.config.validation_delay_us, CommitBlock(ev.peer_id, ev.block, ev.nbytes)
            )
        else:
            self.engine.schedule_after(self.link_us(ev.peer_id, ORDERER_NODE), AckArrive(ev.peer_id, ev.nbytes))

    def _on_commit(self, ev: CommitBlock) -> None:
        if self.sessions[ev.peer_id].state == DISCONNECTED:
            return
        report = validate_and_commit(
            self.ledgers[ev.peer_id], ev.block, self.config.policy, self.peer_sites, self.engine.now_us
        )
        self.commit_log.append(
            CommitEntry(
                peer_id=ev.peer_id,
                block_index=ev.block.index,
                commit_time_us=report.commit_time_us,
                valid_count=report.valid_count,
                invalid_count=report.invalid_count,
            )
        )
        # The ack for the block-completing fragment goes out at commit time.
        self.engine.schedule_after(self.link_us(ev.peer_id, ORDERER_NODE), AckArrive(ev.peer_id, ev.ack_bytes))

    def _on_ack(self, ev: AckArrive) -> None:
        self.sessions[ev.peer_id].release(ev.nbytes, self.engine.now_us)

    def _on_heartbeat_fail(self, ev: HeartbeatFail) -> None:
        self.sessions[ev.peer_id].disconnect(HALT_HEARTBEAT, self.engine.now_us)


def run_simulation(config: RunConfig, trace=None) -> RunResult:
    return Simulation(config, trace=trace).run()
