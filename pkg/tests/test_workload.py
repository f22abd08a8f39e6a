import pytest

from overlaysim.domain import is_relevant
from overlaysim.errors import ArityExceedsExpertise
from overlaysim.topology import TopologyConfig, generate_topology
from overlaysim.workload import (
    WorkloadConfig,
    generate_queries,
    workload_from_json,
    workload_to_json,
)


def test_counts_and_component_source(small_topology):
    cfg = WorkloadConfig(queries_per_peer=5, arity=4, seed=3)
    queries = generate_queries(small_topology, cfg)
    assert len(queries) == 5 * len(small_topology.peers)
    for q in queries:
        expertise = small_topology.peers[q.origin].expertise
        assert set(q.components) <= set(expertise)
        assert len(q.components) == 4
        assert len(set(q.components)) == 4


def test_ids_sequential_in_peer_order(small_topology):
    cfg = WorkloadConfig(queries_per_peer=2, arity=3, seed=3, query_id_base=10)
    queries = generate_queries(small_topology, cfg)
    assert queries[0].id == "Q10"
    assert queries[1].id == "Q11"
    assert [q.id for q in queries] == [f"Q{10 + i}" for i in range(len(queries))]
    assert queries[0].origin == "P0"
    assert queries[2].origin == "P1"


def test_origin_always_relevant(small_topology):
    queries = generate_queries(small_topology, WorkloadConfig(queries_per_peer=3, seed=8, arity=4))
    for q in queries:
        assert is_relevant(small_topology.peers[q.origin].expertise, q, 1.0)


def test_determinism(small_topology):
    cfg = WorkloadConfig(queries_per_peer=4, arity=4, seed=77)
    assert generate_queries(small_topology, cfg) == generate_queries(small_topology, cfg)
    other = WorkloadConfig(queries_per_peer=4, arity=4, seed=78)
    assert generate_queries(small_topology, cfg) != generate_queries(small_topology, other)


def test_arity_exceeds_expertise():
    topo = generate_topology(TopologyConfig(num_themes=2, num_peers=4, vocab_size=6,
                                            expertise_size=3, seed=1))
    with pytest.raises(ArityExceedsExpertise):
        generate_queries(topo, WorkloadConfig(queries_per_peer=1, arity=4, seed=1))


def test_json_round_trip(small_topology):
    cfg = WorkloadConfig(queries_per_peer=2, arity=4, seed=5)
    queries = generate_queries(small_topology, cfg)
    loaded_cfg, loaded = workload_from_json(workload_to_json(cfg, queries))
    assert loaded_cfg == cfg
    assert loaded == queries
