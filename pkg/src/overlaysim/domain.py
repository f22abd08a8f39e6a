"""Core vocabulary: component tokens, identifiers, queries and the relevance predicate."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidConfig, MalformedToken

# A component token is "left.right" with lowercase-letter sides, e.g. "p.r".
_TOKEN_RE = re.compile(r"[a-z]+\.[a-z]+\Z")
_ID_RE = re.compile(r"(P|SP|Q)(\d+)\Z")


def parse_component_token(text: str) -> str:
    """Return `text` unchanged if it is a well-formed component token.

    Raises MalformedToken for anything else (empty side, missing dot,
    uppercase, whitespace, extra dots).
    """
    if not _TOKEN_RE.fullmatch(text):
        raise MalformedToken(f"not a component token: {text!r}")
    return text


def peer_id(index: int) -> str:
    return f"P{index}"


def super_peer_id(index: int) -> str:
    return f"SP{index}"


def query_id(index: int) -> str:
    return f"Q{index}"


def id_index(identifier: str) -> int:
    """Numeric part of an identifier like "P114", "SP5" or "Q10"."""
    m = _ID_RE.fullmatch(identifier)
    if m is None:
        raise ValueError(f"not a recognised identifier: {identifier!r}")
    return int(m.group(2))


def validate_theta(theta: float) -> float:
    """Relevance thresholds live in (0, 1]."""
    if not 0.0 < theta <= 1.0:
        raise InvalidConfig(f"theta must be in (0, 1], got {theta}")
    return theta


@dataclass(frozen=True)
class Query:
    """A fixed-arity list of distinct component tokens with its origin peer."""

    id: str
    components: tuple[str, ...]
    origin: str


def is_relevant(expertise: Iterable[str], query: Query, theta: float) -> bool:
    """True when the expertise covers at least a fraction `theta` of the query.

    The boundary counts: an overlap of exactly theta * arity is relevant.
    """
    overlap = len(frozenset(expertise).intersection(query.components))
    return overlap / len(query.components) >= theta
