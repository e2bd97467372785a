"""Run configuration: a flat key=value file with dotted sections.

Unknown keys are errors (typos in experiment definitions should fail
loudly, not silently fall back to defaults). Repeatable keys are
``topology.peer`` and ``net.link``. Full-line comments start with ``#``.

The delay model mirrors a two-cloud deployment: every node belongs to a
site, one site (``net.delayed_site``) sits in the far cloud, and any link
crossing the cloud boundary carries ``net.base_delay_ms`` plus the swept
``net.delay_ms``, each way. Links inside a cloud are instantaneous unless
an explicit ``net.link`` override says otherwise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path

from .model import PeerSpec
from .net import HeartbeatConfig, LinkSpec
from .phases import BatchConfig
from .policy import PolicyError, PolicyNode, parse_policy, principal_labels, print_policy
from .workload import KEY_DISTINCT, KEY_FIXED, WorkloadConfig

ORDERER_NODE = "orderer"
CLIENT_NODE = "client"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def ms_to_us(text: str) -> int:
    """Exact millisecond-to-microsecond conversion ("10.85" -> 10850)."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ConfigError(f"not a number: {text!r}") from None
    scaled = value * 1000
    if scaled != scaled.to_integral_value():
        raise ConfigError(f"{text} ms is finer than the 1 microsecond clock")
    return int(scaled)


@dataclass(frozen=True)
class RunConfig:
    peers: tuple[PeerSpec, ...]
    policy_text: str
    policy: PolicyNode
    orderer_site: str
    client_site: str
    delayed_site: str
    base_delay_us: int
    injected_delay_us: int
    link_overrides: tuple[LinkSpec, ...]
    window_bytes: int
    backlog_limit_blocks: int
    handshake_rtts: int
    heartbeat: HeartbeatConfig
    batch: BatchConfig
    workload: WorkloadConfig
    validation_delay_us: int
    orderer_delay_us: int
    seed: int
    reference_peer: str
    target_peer: str

    def peer(self, peer_id: str) -> PeerSpec:
        for p in self.peers:
            if p.peer_id == peer_id:
                return p
        raise KeyError(peer_id)

    def node_site(self, node_id: str) -> str:
        if node_id == ORDERER_NODE:
            return self.orderer_site
        if node_id == CLIENT_NODE:
            return self.client_site
        return self.peer(node_id).site_label

    def with_injected_delay_ms(self, delay_ms: str | int | float) -> "RunConfig":
        return dataclasses.replace(self, injected_delay_us=ms_to_us(str(delay_ms)))

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, seed=seed)


def _parse_peer(value: str) -> PeerSpec:
    parts = value.split(":")
    if len(parts) != 3:
        raise ConfigError(f"peer must be site:peer_id:roles, got {value!r}")
    site, peer_id, roles_text = (p.strip() for p in parts)
    roles = frozenset(r.strip() for r in roles_text.split("+") if r.strip())
    try:
        return PeerSpec(peer_id=peer_id, site_label=site, roles=roles)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_link(value: str) -> LinkSpec:
    parts = value.split(",")
    if len(parts) != 3:
        raise ConfigError(f"link must be from,to,delay_ms, got {value!r}")
    return LinkSpec(parts[0].strip(), parts[1].strip(), ms_to_us(parts[2].strip()))


def _positive_int(value: str, key: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None
    if n <= 0:
        raise ConfigError(f"{key} must be positive")
    return n


_KNOWN_KEYS = {
    "seed",
    "endorsement_policy",
    "topology.peer",
    "topology.orderer_site",
    "topology.client_site",
    "net.delayed_site",
    "net.base_delay_ms",
    "net.delay_ms",
    "net.link",
    "net.window_bytes",
    "net.backlog_limit_blocks",
    "net.handshake_rtts",
    "net.heartbeat.interval_ms",
    "net.heartbeat.timeout_ms",
    "batch.max_message_count",
    "batch.timeout_ms",
    "batch.block_size_bytes",
    "workload.tx_count",
    "workload.gap_ms",
    "workload.key_scheme",
    "workload.op_kind",
    "workload.jitter",
    "peer.validation_delay_ms",
    "orderer.processing_delay_ms",
    "report.reference_peer",
    "report.target_peer",
}

_REPEATABLE = {"topology.peer", "net.link"}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    single: dict[str, tuple[str, int]] = {}
    peers: list[PeerSpec] = []
    links: list[LinkSpec] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            if key == "topology.peer":
                peers.append(_parse_peer(value))
            elif key == "net.link":
                links.append(_parse_link(value))
            else:
                if key in single:
                    raise ConfigError(f"duplicate key {key!r} (first at line {single[key][1]})")
                single[key] = (value, lineno)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None

    def get(key: str, default: str | None = None) -> str | None:
        entry = single.get(key)
        return entry[0] if entry is not None else default

    def require(key: str) -> str:
        value = get(key)
        if value is None:
            raise ConfigError(f"{source}: missing required key {key!r}")
        return value

    if not peers:
        raise ConfigError(f"{source}: at least one topology.peer is required")
    ids = [p.peer_id for p in peers]
    if len(ids) != len(set(ids)):
        raise ConfigError(f"{source}: duplicate peer ids")

    policy_text = require("endorsement_policy")
    try:
        policy = parse_policy(policy_text)
    except PolicyError as exc:
        raise ConfigError(f"{source}: endorsement_policy: {exc}") from None
    policy_text = print_policy(policy)  # canonical form, so dumps round-trip

    sites = {p.site_label for p in peers}
    orderer_site = get("topology.orderer_site", sorted(sites)[0])
    client_site = get("topology.client_site", orderer_site)
    delayed_site = get("net.delayed_site", "")

    try:
        heartbeat = HeartbeatConfig(
            interval_us=ms_to_us(get("net.heartbeat.interval_ms", "5000")),
            timeout_us=ms_to_us(get("net.heartbeat.timeout_ms", "7100")),
        )
        batch = BatchConfig(
            max_message_count=_positive_int(get("batch.max_message_count", "10"), "batch.max_message_count"),
            timeout_us=ms_to_us(get("batch.timeout_ms", "1000")),
            block_size_bytes=_positive_int(get("batch.block_size_bytes", "46000"), "batch.block_size_bytes"),
        )
        scheme_text = get("workload.key_scheme", KEY_DISTINCT)
        if scheme_text.startswith("fixed:"):
            key_scheme, fixed_key = KEY_FIXED, scheme_text.split(":", 1)[1]
        elif scheme_text in (KEY_DISTINCT, KEY_FIXED):
            key_scheme, fixed_key = scheme_text, "asset"
        else:
            raise ConfigError(f"workload.key_scheme must be distinct or fixed:KEY, got {scheme_text!r}")
        workload = WorkloadConfig(
            tx_count=_positive_int(get("workload.tx_count", "1000"), "workload.tx_count"),
            gap_us=ms_to_us(get("workload.gap_ms", "85")),
            key_scheme=key_scheme,
            fixed_key=fixed_key,
            op_kind=get("workload.op_kind", "create"),
            jitter_us=ms_to_us(get("workload.jitter", "0")),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    committers = [p.peer_id for p in peers]
    delayed_peers = [p.peer_id for p in peers if p.site_label == delayed_site]
    undelayed_peers = [p.peer_id for p in peers if p.site_label != delayed_site]
    reference_peer = get("report.reference_peer", (undelayed_peers or committers)[0])
    target_peer = get("report.target_peer", (delayed_peers or committers)[0])

    try:
        seed = int(get("seed", "0"))
        handshake_rtts = int(get("net.handshake_rtts", "1"))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if handshake_rtts < 0:
        raise ConfigError(f"{source}: net.handshake_rtts cannot be negative")

    config = RunConfig(
        peers=tuple(peers),
        policy_text=policy_text,
        policy=policy,
        orderer_site=orderer_site,
        client_site=client_site,
        delayed_site=delayed_site,
        base_delay_us=ms_to_us(get("net.base_delay_ms", "0")),
        injected_delay_us=ms_to_us(get("net.delay_ms", "0")),
        link_overrides=tuple(links),
        window_bytes=_positive_int(get("net.window_bytes", "150000"), "net.window_bytes"),
        backlog_limit_blocks=_positive_int(get("net.backlog_limit_blocks", "500"), "net.backlog_limit_blocks"),
        handshake_rtts=handshake_rtts,
        heartbeat=heartbeat,
        batch=batch,
        workload=workload,
        validation_delay_us=ms_to_us(get("peer.validation_delay_ms", "0")),
        orderer_delay_us=ms_to_us(get("orderer.processing_delay_ms", "0")),
        seed=seed,
        reference_peer=reference_peer,
        target_peer=target_peer,
    )
    validate_config(config, source)
    return config


def validate_config(config: RunConfig, source: str = "<config>") -> None:
    peer_ids = {p.peer_id for p in config.peers}
    sites = {p.site_label for p in config.peers}
    for label in sorted(principal_labels(config.policy)):
        if not any(p.is_endorser and p.site_label == label for p in config.peers):
            raise ConfigError(f"{source}: policy names site {label!r} but no endorser belongs to it")
    for who, peer_id in (("report.reference_peer", config.reference_peer), ("report.target_peer", config.target_peer)):
        if peer_id not in peer_ids:
            raise ConfigError(f"{source}: {who} {peer_id!r} is not a configured peer")
    if config.delayed_site and config.delayed_site not in sites:
        raise ConfigError(f"{source}: net.delayed_site {config.delayed_site!r} has no peers")
    if config.orderer_site == config.delayed_site:
        raise ConfigError(f"{source}: the orderer cannot sit in the delayed site")
    known_nodes = peer_ids | {ORDERER_NODE, CLIENT_NODE}
    for link in config.link_overrides:
        for node in (link.from_node, link.to_node):
            if node not in known_nodes:
                raise ConfigError(f"{source}: net.link references unknown node {node!r}")


def parse_config_file(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, source=str(path))


def dump_config(config: RunConfig) -> str:
    """Canonical text form; reparsing yields an identical RunConfig."""
    lines = [
        f"seed = {config.seed}",
        f"endorsement_policy = {print_policy(config.policy)}",
    ]
    for p in config.peers:
        roles = "+".join(sorted(p.roles))
        lines.append(f"topology.peer = {p.site_label}:{p.peer_id}:{roles}")
    lines += [
        f"topology.orderer_site = {config.orderer_site}",
        f"topology.client_site = {config.client_site}",
        f"net.delayed_site = {config.delayed_site}",
        f"net.base_delay_ms = {_us_to_ms(config.base_delay_us)}",
        f"net.delay_ms = {_us_to_ms(config.injected_delay_us)}",
    ]
    for link in config.link_overrides:
        lines.append(f"net.link = {link.from_node},{link.to_node},{_us_to_ms(link.delay_us)}")
    scheme = config.workload.key_scheme
    if scheme == KEY_FIXED:
        scheme = f"fixed:{config.workload.fixed_key}"
    lines += [
        f"net.window_bytes = {config.window_bytes}",
        f"net.backlog_limit_blocks = {config.backlog_limit_blocks}",
        f"net.handshake_rtts = {config.handshake_rtts}",
        f"net.heartbeat.interval_ms = {_us_to_ms(config.heartbeat.interval_us)}",
        f"net.heartbeat.timeout_ms = {_us_to_ms(config.heartbeat.timeout_us)}",
        f"batch.max_message_count = {config.batch.max_message_count}",
        f"batch.timeout_ms = {_us_to_ms(config.batch.timeout_us)}",
        f"batch.block_size_bytes = {config.batch.block_size_bytes}",
        f"workload.tx_count = {config.workload.tx_count}",
        f"workload.gap_ms = {_us_to_ms(config.workload.gap_us)}",
        f"workload.key_scheme = {scheme}",
        f"workload.op_kind = {config.workload.op_kind}",
        f"workload.jitter = {_us_to_ms(config.workload.jitter_us)}",
        f"peer.validation_delay_ms = {_us_to_ms(config.validation_delay_us)}",
        f"orderer.processing_delay_ms = {_us_to_ms(config.orderer_delay_us)}",
        f"report.reference_peer = {config.reference_peer}",
        f"report.target_peer = {config.target_peer}",
    ]
    return "\n".join(lines) + "\n"


def _us_to_ms(us: int) -> str:
    from .metrics import fmt_ms

    return fmt_ms(us)


def bundled_config_names() -> list[str]:
    pkg = resources.files("eovsim.configs")
    return sorted(p.name[: -len(".cfg")] for p in pkg.iterdir() if p.name.endswith(".cfg"))


def load_bundled_config(name: str) -> RunConfig:
    pkg = resources.files("eovsim.configs")
    candidate = pkg / f"{name}.cfg"
    if not candidate.is_file():
        raise ConfigError(f"no bundled config {name!r} (have: {', '.join(bundled_config_names())})")
    return parse_config_text(candidate.read_text(), source=f"bundled:{name}")


def resolve_config(name_or_path: str | Path) -> RunConfig:
    """Accept either a file path or a bundled config name."""
    path = Path(name_or_path)
    if path.exists():
        return parse_config_file(path)
    if isinstance(name_or_path, str) and "/" not in name_or_path and "\\" not in name_or_path:
        try:
            return load_bundled_config(name_or_path)
        except ConfigError:
            pass
    raise ConfigError(f"config not found: {name_or_path}")
