"""Query routing over the event kernel: flooding baseline and knowledge routing.

Message flow per query, all queries submitted at t=0 in workload order:

  flooding   origin -> home SP (1 msg); home SP -> every other SP (S-1 msgs);
             each SP matches its members (match_cost per member); SPs with at
             least one relevant member send one aggregate answer (<= S msgs).

  knowledge  origin -> home SP (1); home SP -> SSP (1); the SSP predicts
             candidate SPs from the tree and forwards the query to every
             candidate with probability >= tau, the most probable candidate
             always included (k msgs); answering candidates reply (<= k msgs).

Local matching uses a per-super-peer token index; the computed answer sets are
exactly those of the double loop over members applying the relevance ratio.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Optional, TextIO

from .arff import LogRecord
from .domain import Query, id_index, validate_theta
from .dtree import (
    TreeNode,
    TreeParams,
    build_tree_from_pairs,
    evaluate_pairs,
    predict_distribution,
)
from .errors import MissingSSP, UntrainedTree
from .metrics import MetricsReport, build_report
from .simkern import LatencyConfig, SimKernel
from .topology import Topology

SSP_ENTITY = "SSP"


@dataclass(frozen=True)
class Flooding:
    pass


@dataclass(frozen=True)
class Knowledge:
    tree: TreeNode
    tau: float = 0.0


RoutingStrategy = Flooding | Knowledge


class Msg(NamedTuple):
    kind: str
    query: Query
    data: tuple = ()


@dataclass(slots=True)
class QueryOutcome:
    query: str
    contacted_sps: frozenset[str]
    answers: set[tuple[str, str]]
    messages: int
    completion: float


def _member_token_index(topology: Topology, members: tuple[str, ...]) -> dict[str, list[str]]:
    index: dict[str, list[str]] = {}
    for pid in members:
        for token in topology.peers[pid].expertise:
            index.setdefault(token, []).append(pid)
    return index


def run_scenario(
    topology: Topology,
    queries: list[Query],
    strategy: RoutingStrategy,
    theta: float,
    lat: LatencyConfig,
    trace: Optional[TextIO] = None,
    collect_log: bool = True,
) -> tuple[list[QueryOutcome], list[LogRecord]]:
    """Simulate one routing strategy over the whole workload.

    Returns per-query outcomes plus one log record per (query, answering peer),
    appended in event-delivery order. Identical inputs give identical output.
    """
    validate_theta(theta)
    lat.validate()
    knowledge = isinstance(strategy, Knowledge)
    if knowledge:
        if not topology.ssp_present:
            raise MissingSSP("knowledge routing needs a topology with an SSP")
        if strategy.tree is None:
            raise UntrainedTree("knowledge routing needs a trained tree")

    sp_ids = [sp.id for sp in topology.super_peers]
    all_sps = frozenset(sp_ids)
    members = {sp.id: sp.members for sp in topology.super_peers}
    token_index = {
        sp.id: _member_token_index(topology, sp.members) for sp in topology.super_peers
    }
    # numeric rank per peer id so answer lists sort without re-parsing ids
    peer_rank = {pid: id_index(pid) for pid in topology.peers}
    hop = lat.hop_latency
    match_cost = lat.match_cost

    # smallest overlap count that satisfies overlap/arity >= theta, per arity;
    # integer compare below is then exactly the is_relevant ratio test
    min_overlap: dict[int, int] = {}

    def overlap_needed(arity: int) -> int:
        need = min_overlap.get(arity)
        if need is None:
            need = arity + 1
            for k in range(1, arity + 1):
                if k / arity >= theta:
                    need = k
                    break
            min_overlap[arity] = need
        return need

    messages: dict[str, int] = {}
    contacted: dict[str, frozenset[str] | set[str]] = {}
    answers: dict[str, set[tuple[str, str]]] = {}
    completion: dict[str, float] = {}
    log: list[LogRecord] = []

    kernel = SimKernel(trace=trace)

    def send(dst: str, msg: Msg, delay: float) -> None:
        messages[msg.query.id] += 1
        kernel.send(dst, msg, delay)

    def match(sp_id: str, query: Query) -> tuple[str, ...]:
        # hit counting over the token index; equivalent to the double loop
        # over members applying domain.is_relevant
        postings = token_index[sp_id]
        hits: Counter = Counter()
        for component in query.components:
            lst = postings.get(component)
            if lst is not None:
                hits.update(lst)
        if not hits:
            return ()
        need = overlap_needed(len(query.components))
        relevant = [pid for pid, overlap in hits.items() if overlap >= need]
        relevant.sort(key=peer_rank.__getitem__)
        return tuple(relevant)

    def on_peer(k: SimKernel, event) -> None:
        msg: Msg = event.payload
        qid = msg.query.id
        if k.now > completion[qid]:
            completion[qid] = k.now
        if msg.kind == "answer":
            sp_id, relevant = msg.data
            record = answers[qid].add
            if collect_log:
                components = msg.query.components
                append = log.append
                for pid in relevant:
                    record((sp_id, pid))
                    append(LogRecord(sp_id, qid, components, pid))
            else:
                for pid in relevant:
                    record((sp_id, pid))

    def on_super_peer(k: SimKernel, event) -> None:
        msg: Msg = event.payload
        query = msg.query
        qid = query.id
        if k.now > completion[qid]:
            completion[qid] = k.now
        sp_id = event.dst
        if msg.kind == "query":  # arrival from the origin peer
            if knowledge:
                send(SSP_ENTITY, Msg("to_ssp", query), hop)
            else:
                contacted[qid] = all_sps
                for other in sp_ids:
                    if other != sp_id:
                        send(other, Msg("flood", query), hop)
                k.send(sp_id, Msg("match", query), match_cost * len(members[sp_id]))
        elif msg.kind in ("flood", "dispatch"):
            k.send(sp_id, Msg("match", query), match_cost * len(members[sp_id]))
        else:  # local matching complete; reply only when something matched
            relevant = match(sp_id, query)
            if relevant:
                send(query.origin, Msg("answer", query, (sp_id, relevant)), hop)

    def on_ssp(k: SimKernel, event) -> None:
        msg: Msg = event.payload
        query = msg.query
        qid = query.id
        if k.now > completion[qid]:
            completion[qid] = k.now
        prediction = predict_distribution(strategy.tree, query.components)
        selected = [sp for sp, p in prediction.candidates if p >= strategy.tau and sp in all_sps]
        if not selected:
            top = prediction.candidates[0][0]
            selected = [top] if top in all_sps else []
        contacted[qid] = frozenset(selected)
        for sp_id in selected:
            send(sp_id, Msg("dispatch", query), hop)

    for sp_id in sp_ids:
        kernel.register(sp_id, on_super_peer)
    for pid in topology.peers:
        kernel.register(pid, on_peer)
    if knowledge:
        kernel.register(SSP_ENTITY, on_ssp)

    for query in queries:
        qid = query.id
        messages[qid] = 0
        contacted[qid] = frozenset()
        answers[qid] = set()
        completion[qid] = 0.0
        send(topology.peers[query.origin].home, Msg("query", query), hop)

    kernel.run_until_idle()

    outcomes = [
        QueryOutcome(
            query=q.id,
            contacted_sps=frozenset(contacted[q.id]),
            answers=answers[q.id],
            messages=messages[q.id],
            completion=completion[q.id],
        )
        for q in queries
    ]
    return outcomes, log


@dataclass
class BootstrapResult:
    flooding_eval: MetricsReport
    bk_eval: MetricsReport
    tree: TreeNode
    tree_accuracy: Optional[float]


def run_bootstrap(
    topology: Topology,
    queries_train: list[Query],
    queries_eval: list[Query],
    theta: float,
    params: TreeParams,
    tau: float,
    lat: LatencyConfig,
    compute_accuracy: bool = True,
) -> BootstrapResult:
    """Flood the training workload to build the global log, train the tree,
    then run both strategies on the evaluation workload.

    The flooding evaluation run doubles as the precision baseline for the
    knowledge run. tree_accuracy is the training-log accuracy of the tree.
    """
    _, train_log = run_scenario(topology, queries_train, Flooding(), theta, lat)
    tree = build_tree_from_pairs(
        ((r.components, r.answering_sp) for r in train_log), params
    )
    accuracy = None
    if compute_accuracy:
        report = evaluate_pairs(tree, ((r.components, r.answering_sp) for r in train_log))
        accuracy = report.accuracy
    del train_log

    flood_outcomes, _ = run_scenario(
        topology, queries_eval, Flooding(), theta, lat, collect_log=False
    )
    baseline = {o.query: frozenset(p for _, p in o.answers) for o in flood_outcomes}
    flooding_eval = build_report(flood_outcomes, baseline)
    del flood_outcomes

    bk_outcomes, _ = run_scenario(
        topology, queries_eval, Knowledge(tree, tau), theta, lat, collect_log=False
    )
    bk_eval = build_report(bk_outcomes, baseline)
    return BootstrapResult(
        flooding_eval=flooding_eval, bk_eval=bk_eval, tree=tree, tree_accuracy=accuracy
    )


def bootstrap_and_run(
    topology: Topology,
    queries_train: list[Query],
    queries_eval: list[Query],
    theta: float,
    params: TreeParams,
    tau: float,
    lat: LatencyConfig,
) -> tuple[MetricsReport, MetricsReport, TreeNode]:
    """Bootstrap pipeline returning (flooding report, knowledge report, tree)."""
    result = run_bootstrap(
        topology, queries_train, queries_eval, theta, params, tau, lat,
        compute_accuracy=False,
    )
    return result.flooding_eval, result.bk_eval, result.tree
