"""Flat run configuration: documented defaults, JSON loading, flag overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Optional

from .domain import validate_theta
from .dtree import TreeParams
from .errors import InvalidConfig, ParseError
from .simkern import LatencyConfig
from .topology import TopologyConfig
from .workload import WorkloadConfig


@dataclass(frozen=True)
class RunConfig:
    # topology
    num_themes: int = 10
    num_peers: int = 500
    vocab_size: int = 20
    expertise_size: int = 8
    vocab_overlap: float = 0.0
    # workload
    queries_per_peer: int = 10
    arity: int = 4
    query_id_base: int = 10
    # tree induction
    min_instances: int = 2
    prune: bool = True
    confidence: float = 0.25
    # simulated costs
    hop_latency: float = 1.0
    match_cost: float = 0.01
    # routing
    theta: float = 0.5
    tau: float = 0.0
    # run control
    seed: int = 7
    jobs: int = 0  # 0 = choose automatically
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        self.topology_config().validate()
        self.workload_config().validate()
        self.tree_params().validate()
        self.latency_config().validate()
        validate_theta(self.theta)
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidConfig(f"tau must be in [0, 1], got {self.tau}")
        if self.arity > self.expertise_size:
            raise InvalidConfig("arity cannot exceed expertise_size")
        return self

    def topology_config(self) -> TopologyConfig:
        return TopologyConfig(
            num_themes=self.num_themes,
            num_peers=self.num_peers,
            vocab_size=self.vocab_size,
            expertise_size=self.expertise_size,
            vocab_overlap=self.vocab_overlap,
            seed=self.seed,
        )

    def workload_config(self) -> WorkloadConfig:
        return WorkloadConfig(
            queries_per_peer=self.queries_per_peer,
            arity=self.arity,
            seed=self.seed,
            query_id_base=self.query_id_base,
        )

    def tree_params(self) -> TreeParams:
        return TreeParams(
            min_instances=self.min_instances,
            prune=self.prune,
            confidence=self.confidence,
        )

    def latency_config(self) -> LatencyConfig:
        return LatencyConfig(hop_latency=self.hop_latency, match_cost=self.match_cost)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


CONFIG_FIELDS = frozenset(f.name for f in dataclasses.fields(RunConfig))


def load_config(path: Optional[str] = None,
                overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then the JSON file (flat keys), then explicit overrides.

    Unknown keys in either source are rejected.
    """
    values: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                loaded = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ParseError(f"config file {path} must hold a JSON object")
        values.update(loaded)
    if overrides:
        values.update(overrides)
    unknown = set(values) - CONFIG_FIELDS
    if unknown:
        raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise InvalidConfig(str(exc)) from exc
    return cfg.validate()
