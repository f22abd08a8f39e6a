"""Overlay generation and mutation: themes, super-peers, peers, and the SSP flag.

Topology values are immutable snapshots; join/leave return new topologies.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import string
from dataclasses import dataclass, replace

from .domain import id_index, peer_id, super_peer_id
from .errors import InvalidConfig, InvalidTheme, ParseError, UnknownPeer
from .rng import derive_seed


@dataclass(frozen=True)
class TopologyConfig:
    num_themes: int = 10
    num_peers: int = 500
    vocab_size: int = 20
    expertise_size: int = 8
    vocab_overlap: float = 0.0
    seed: int = 7

    def validate(self) -> "TopologyConfig":
        if self.num_themes < 1:
            raise InvalidConfig("num_themes must be >= 1")
        if self.num_peers < self.num_themes:
            raise InvalidConfig("num_peers must be >= num_themes")
        if self.expertise_size < 1:
            raise InvalidConfig("expertise_size must be >= 1")
        if self.expertise_size > self.vocab_size:
            raise InvalidConfig("expertise_size cannot exceed vocab_size")
        if not 0.0 <= self.vocab_overlap < 1.0:
            raise InvalidConfig("vocab_overlap must be in [0, 1)")
        return self


@dataclass(frozen=True)
class Theme:
    name: str
    vocabulary: tuple[str, ...]


@dataclass(frozen=True)
class PeerNode:
    id: str
    expertise: tuple[str, ...]
    home: str


@dataclass(frozen=True)
class SuperPeerNode:
    id: str
    theme: Theme
    members: tuple[str, ...]


@dataclass(frozen=True)
class Topology:
    super_peers: tuple[SuperPeerNode, ...]
    peers: dict[str, PeerNode]
    ssp_present: bool
    config: TopologyConfig
    next_peer_index: int

    @property
    def num_super_peers(self) -> int:
        return len(self.super_peers)


def _letter_sequence(count: int) -> list[str]:
    """First `count` token sides: 'a'..'z', then 'aa', 'ab', ..."""
    out: list[str] = []
    width = 1
    while len(out) < count:
        for combo in itertools.product(string.ascii_lowercase, repeat=width):
            out.append("".join(combo))
            if len(out) == count:
                return out
        width += 1
    return out


def _token_pool(count: int) -> list[str]:
    if count == 0:
        return []
    sides = _letter_sequence(math.isqrt(count - 1) + 1)
    pool = [f"{a}.{b}" for a in sides for b in sides]
    return pool[:count]


def generate_topology(cfg: TopologyConfig) -> Topology:
    """Build the full overlay from a config; pure function of `cfg`.

    Themes share `vocab_overlap * vocab_size` tokens (floored); the rest of
    each vocabulary is private to the theme. Peers go round-robin across
    super-peers and draw their expertise from the home theme's vocabulary.
    """
    cfg.validate()
    s, p, v, e = cfg.num_themes, cfg.num_peers, cfg.vocab_size, cfg.expertise_size

    shared_count = int(cfg.vocab_overlap * v)
    pool = _token_pool(shared_count + s * (v - shared_count))
    random.Random(derive_seed(cfg.seed, "vocab")).shuffle(pool)
    shared = tuple(pool[:shared_count])

    themes = []
    pos = shared_count
    for i in range(s):
        own = tuple(pool[pos:pos + v - shared_count])
        pos += v - shared_count
        themes.append(Theme(name=f"T{i}", vocabulary=shared + own))

    rng = random.Random(derive_seed(cfg.seed, "expertise"))
    peers: dict[str, PeerNode] = {}
    members: list[list[str]] = [[] for _ in range(s)]
    for idx in range(p):
        home = idx % s
        pid = peer_id(idx)
        expertise = tuple(rng.sample(themes[home].vocabulary, e))
        peers[pid] = PeerNode(id=pid, expertise=expertise, home=super_peer_id(home))
        members[home].append(pid)

    super_peers = tuple(
        SuperPeerNode(id=super_peer_id(i), theme=themes[i], members=tuple(members[i]))
        for i in range(s)
    )
    return Topology(
        super_peers=super_peers,
        peers=peers,
        ssp_present=True,
        config=cfg,
        next_peer_index=p,
    )


def peer_join(topology: Topology, theme_index: int, seed: int) -> tuple[Topology, str]:
    """Add a fresh peer to the given theme; returns the new topology and id.

    Ids never collide with present or previously removed peers: the index is
    the larger of the high-water mark and max(existing) + 1.
    """
    if not 0 <= theme_index < len(topology.super_peers):
        raise InvalidTheme(f"theme index {theme_index} out of range")
    sp = topology.super_peers[theme_index]

    max_existing = max((id_index(pid) for pid in topology.peers), default=-1)
    index = max(topology.next_peer_index, max_existing + 1)
    pid = peer_id(index)

    rng = random.Random(derive_seed(seed, f"join:{pid}"))
    expertise = tuple(rng.sample(sp.theme.vocabulary, topology.config.expertise_size))

    peers = dict(topology.peers)
    peers[pid] = PeerNode(id=pid, expertise=expertise, home=sp.id)
    super_peers = list(topology.super_peers)
    super_peers[theme_index] = replace(sp, members=sp.members + (pid,))
    new_topology = replace(
        topology,
        super_peers=tuple(super_peers),
        peers=peers,
        next_peer_index=index + 1,
    )
    return new_topology, pid


def peer_leave(topology: Topology, pid: str) -> Topology:
    """Remove a peer; its super-peer stays even when emptied."""
    if pid not in topology.peers:
        raise UnknownPeer(pid)
    home = topology.peers[pid].home
    peers = dict(topology.peers)
    del peers[pid]
    super_peers = list(topology.super_peers)
    for i, sp in enumerate(super_peers):
        if sp.id == home:
            super_peers[i] = replace(sp, members=tuple(m for m in sp.members if m != pid))
            break
    return replace(topology, super_peers=tuple(super_peers), peers=peers)


def topology_to_json(topology: Topology) -> str:
    doc = {
        "config": {
            "num_themes": topology.config.num_themes,
            "num_peers": topology.config.num_peers,
            "vocab_size": topology.config.vocab_size,
            "expertise_size": topology.config.expertise_size,
            "vocab_overlap": topology.config.vocab_overlap,
            "seed": topology.config.seed,
        },
        "ssp_present": topology.ssp_present,
        "next_peer_index": topology.next_peer_index,
        "super_peers": [
            {
                "id": sp.id,
                "theme": {"name": sp.theme.name, "vocabulary": list(sp.theme.vocabulary)},
                "members": list(sp.members),
            }
            for sp in topology.super_peers
        ],
        "peers": {
            pid: {"expertise": list(node.expertise), "home": node.home}
            for pid, node in topology.peers.items()
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def topology_from_json(text: str) -> Topology:
    try:
        doc = json.loads(text)
        cfg = TopologyConfig(**doc["config"])
        super_peers = tuple(
            SuperPeerNode(
                id=sp["id"],
                theme=Theme(name=sp["theme"]["name"], vocabulary=tuple(sp["theme"]["vocabulary"])),
                members=tuple(sp["members"]),
            )
            for sp in doc["super_peers"]
        )
        peers = {
            pid: PeerNode(id=pid, expertise=tuple(node["expertise"]), home=node["home"])
            for pid, node in doc["peers"].items()
        }
        return Topology(
            super_peers=super_peers,
            peers=peers,
            ssp_present=bool(doc["ssp_present"]),
            config=cfg,
            next_peer_index=int(doc["next_peer_index"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid topology document: {exc}") from exc
