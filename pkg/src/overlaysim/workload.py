"""Query-stream generation: each peer derives its queries from its own expertise."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .domain import Query, id_index, query_id
from .errors import ArityExceedsExpertise, InvalidConfig, ParseError
from .rng import derive_seed
from .topology import Topology


@dataclass(frozen=True)
class WorkloadConfig:
    queries_per_peer: int = 10
    arity: int = 4
    seed: int = 7
    query_id_base: int = 10

    def validate(self) -> "WorkloadConfig":
        if self.queries_per_peer < 1:
            raise InvalidConfig("queries_per_peer must be >= 1")
        if self.arity < 1:
            raise InvalidConfig("arity must be >= 1")
        if self.query_id_base < 0:
            raise InvalidConfig("query_id_base must be >= 0")
        return self


def generate_queries(topology: Topology, cfg: WorkloadConfig) -> list[Query]:
    """Exactly `queries_per_peer` queries per peer, components sampled without
    replacement from the origin's expertise; ids sequential in peer-id order.
    """
    cfg.validate()
    rng = random.Random(derive_seed(cfg.seed, "workload"))
    queries: list[Query] = []
    next_id = cfg.query_id_base
    for pid in sorted(topology.peers, key=id_index):
        node = topology.peers[pid]
        if cfg.arity > len(node.expertise):
            raise ArityExceedsExpertise(
                f"arity {cfg.arity} exceeds expertise size {len(node.expertise)} of {pid}"
            )
        for _ in range(cfg.queries_per_peer):
            components = tuple(rng.sample(node.expertise, cfg.arity))
            queries.append(Query(id=query_id(next_id), components=components, origin=pid))
            next_id += 1
    return queries


def workload_to_json(cfg: WorkloadConfig, queries: list[Query]) -> str:
    doc = {
        "config": {
            "queries_per_peer": cfg.queries_per_peer,
            "arity": cfg.arity,
            "seed": cfg.seed,
            "query_id_base": cfg.query_id_base,
        },
        "queries": [
            {"id": q.id, "components": list(q.components), "origin": q.origin}
            for q in queries
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def workload_from_json(text: str) -> tuple[WorkloadConfig, list[Query]]:
    try:
        doc = json.loads(text)
        cfg = WorkloadConfig(**doc["config"])
        queries = [
            Query(id=q["id"], components=tuple(q["components"]), origin=q["origin"])
            for q in doc["queries"]
        ]
        return cfg, queries
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid workload document: {exc}") from exc
