"""Endorsement-policy expressions: parsing, printing, evaluation.

Grammar (keywords case-insensitive, site labels case-sensitive, whitespace
ignored between tokens)::

    EXPR      := AND ( LIST ) | OR ( LIST ) | OUTOF ( INT , LIST ) | PRINCIPAL
    LIST      := EXPR { , EXPR }
    PRINCIPAL := '"' label '"' peer

An endorsement satisfies a principal when it carries a valid signature and
its endorser belongs to the principal's site. Duplicate endorsements from
one peer count once; endorsers from unknown sites match no principal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .model import Endorsement


class PolicyError(ValueError):
    """Raised on malformed policy text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Principal:
    site: str


@dataclass(frozen=True)
class And:
    children: tuple["PolicyNode", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["PolicyNode", ...]


@dataclass(frozen=True)
class OutOf:
    m: int
    children: tuple["PolicyNode", ...]


PolicyNode = Union[Principal, And, Or, OutOf]

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<lparen>\()
      | (?P<rparen>\))
      | (?P<comma>,)
      | (?P<int>\d+)
      | (?P<string>"[^"]*")
      | (?P<word>[A-Za-z_]+)
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise PolicyError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        assert kind is not None
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self, expect: str | None = None):
        tok = self._peek()
        if tok is None:
            raise PolicyError(f"unexpected end of policy (wanted {expect or 'more input'})", len(self.text))
        if expect is not None and tok[0] != expect:
            raise PolicyError(f"expected {expect}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> PolicyNode:
        node = self._expr()
        tok = self._peek()
        if tok is not None:
            raise PolicyError(f"trailing input {tok[1]!r}", tok[2])
        return node

    def _expr(self) -> PolicyNode:
        tok = self._peek()
        if tok is None:
            raise PolicyError("empty policy", len(self.text))
        kind, value, pos = tok
        if kind == "word":
            keyword = value.upper()
            if keyword not in ("AND", "OR", "OUTOF"):
                raise PolicyError(f"unknown keyword {value!r}", pos)
            self._next()
            self._next("lparen")
            m = None
            if keyword == "OUTOF":
                m_tok = self._next("int")
                m = int(m_tok[1])
                self._next("comma")
            children = [self._expr()]
            while True:
                nxt = self._peek()
                if nxt is not None and nxt[0] == "comma":
                    self._next()
                    children.append(self._expr())
                else:
                    break
            self._next("rparen")
            if keyword == "AND":
                return And(tuple(children))
            if keyword == "OR":
                return Or(tuple(children))
            assert m is not None
            if not 1 <= m <= len(children):
                raise PolicyError(f"OUTOF threshold {m} out of range for {len(children)} children", pos)
            return OutOf(m, tuple(children))
        if kind == "string":
            self._next()
            peer_tok = self._next("word")
            if peer_tok[1].upper() != "PEER":
                raise PolicyError(f"expected 'peer' after site label, found {peer_tok[1]!r}", peer_tok[2])
            return Principal(value[1:-1])
        raise PolicyError(f"expected policy expression, found {value!r}", pos)


def parse_policy(text: str) -> PolicyNode:
    if not text or not text.strip():
        raise PolicyError("empty policy", 0)
    return _Parser(text).parse()


def print_policy(node: PolicyNode) -> str:
    """Canonical text form; ``parse_policy(print_policy(p)) == p``."""
    if isinstance(node, Principal):
        return f'"{node.site}" peer'
    if isinstance(node, And):
        return "AND(" + ", ".join(print_policy(c) for c in node.children) + ")"
    if isinstance(node, Or):
        return "OR(" + ", ".join(print_policy(c) for c in node.children) + ")"
    if isinstance(node, OutOf):
        return f"OUTOF({node.m}, " + ", ".join(print_policy(c) for c in node.children) + ")"
    raise TypeError(f"not a policy node: {node!r}")


def principal_labels(node: PolicyNode) -> set[str]:
    """All site labels the policy can require."""
    if isinstance(node, Principal):
        return {node.site}
    labels: set[str] = set()
    for child in node.children:
        labels |= principal_labels(child)
    return labels


def evaluate(
    node: PolicyNode,
    endorsements: Sequence[Endorsement],
    peer_sites: Mapping[str, str],
) -> bool:
    """Whether the collected endorsements satisfy the policy.

    Invalid signatures count as absent; so do endorsers missing from
    ``peer_sites``. Adding a valid endorsement can only flip the result
    from false to true, never the other way (monotonicity).
    """
    satisfied_sites = {
        peer_sites[e.endorser_id]
        for e in endorsements
        if e.signature_valid and e.endorser_id in peer_sites
    }

    def rec(n: PolicyNode) -> bool:
        if isinstance(n, Principal):
            return n.site in satisfied_sites
        if isinstance(n, And):
            return all(rec(c) for c in n.children)
        if isinstance(n, Or):
            return any(rec(c) for c in n.children)
        if isinstance(n, OutOf):
            return sum(1 for c in n.children if rec(c)) >= n.m
        raise TypeError(f"not a policy node: {n!r}")

    return rec(node)
