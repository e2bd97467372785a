import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from eovsim.config import parse_config_text

TWO_SITE_TEMPLATE = """
seed = {seed}
endorsement_policy = "A" peer
topology.peer = A:a.peer0:endorser+committer
topology.peer = B:b.peer0:committer
topology.orderer_site = A
topology.client_site = A
net.delayed_site = B
net.base_delay_ms = 0
net.delay_ms = {delay_ms}
net.window_bytes = {window_bytes}
net.backlog_limit_blocks = {backlog}
net.handshake_rtts = {handshake_rtts}
net.heartbeat.interval_ms = 5000
net.heartbeat.timeout_ms = {heartbeat_timeout_ms}
batch.max_message_count = {max_count}
batch.timeout_ms = {batch_timeout_ms}
batch.block_size_bytes = {block_bytes}
workload.tx_count = {tx_count}
workload.gap_ms = {gap_ms}
workload.key_scheme = {key_scheme}
workload.op_kind = {op_kind}
report.reference_peer = a.peer0
report.target_peer = b.peer0
"""


def two_site_config(
    delay_ms=0,
    window_bytes=46000,
    tx_count=100,
    gap_ms=85,
    seed=1,
    handshake_rtts=0,
    backlog=100000,
    heartbeat_timeout_ms=1000000000,
    max_count=10,
    batch_timeout_ms=1000,
    block_bytes=46000,
    key_scheme="distinct",
    op_kind="create",
):
    """Minimal topology for delivery-session experiments: the reference
    site hosts client, orderer, and endorser; the target site only
    commits, behind the delayed link."""
    return parse_config_text(
        TWO_SITE_TEMPLATE.format(
            seed=seed,
            delay_ms=delay_ms,
            window_bytes=window_bytes,
            backlog=backlog,
            handshake_rtts=handshake_rtts,
            heartbeat_timeout_ms=heartbeat_timeout_ms,
            max_count=max_count,
            batch_timeout_ms=batch_timeout_ms,
            block_bytes=block_bytes,
            tx_count=tx_count,
            gap_ms=gap_ms,
            key_scheme=key_scheme,
            op_kind=op_kind,
        ),
        source="two_site_fixture",
    )
