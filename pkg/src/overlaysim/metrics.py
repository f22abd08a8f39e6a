"""Measurement: per-query rows, aggregates, the precision formula and the
four experiment sweeps with CSV output.

Note on naming: "precision" is the fraction of baseline answering peers that
knowledge routing also retrieves, which is closer to recall in IR terms. The
name is kept for comparability.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional

from .errors import InvalidConfig
from .rng import derive_seed

if TYPE_CHECKING:
    from .config import RunConfig
    from .routing import QueryOutcome

PEER_SWEEP = (500, 1000, 1500, 2000, 2500, 3000)
SP_SWEEP = tuple(range(4, 25))
SP_SWEEP_COARSE = (4, 8, 12, 16, 20, 24)
MAX_SP_COUNT = 24

CSV_COLUMNS = (
    "num_peers",
    "num_super_peers",
    "flooding_total_messages",
    "flooding_mean_completion",
    "bk_total_messages",
    "bk_mean_completion",
    "bk_mean_precision_pct",
    "tree_accuracy",
)


@dataclass(frozen=True)
class QueryMetrics:
    query: str
    messages: int
    completion: float
    answer_count: int
    precision_pct: Optional[float]  # None when the baseline answered nothing


@dataclass(frozen=True)
class MetricsReport:
    per_query: tuple[QueryMetrics, ...]
    total_messages: int
    mean_completion: float
    mean_precision_pct: Optional[float]
    queries_excluded_from_precision: int


def precision(bk_answers: frozenset[str] | set[str],
              baseline_answers: frozenset[str] | set[str]) -> Optional[float]:
    """Share of baseline answering peers that knowledge routing retrieved, in
    percent; None (undefined) when the baseline found nothing."""
    if not baseline_answers:
        return None
    return len(bk_answers) / len(baseline_answers) * 100.0


def build_report(outcomes: list["QueryOutcome"],
                 baseline_answers: Optional[dict[str, frozenset[str]]] = None) -> MetricsReport:
    """Aggregate outcomes; precision is computed against `baseline_answers`
    (query id -> answering peer ids) and left undefined when absent."""
    rows = []
    for outcome in outcomes:
        if baseline_answers is None:
            pct = None
        else:
            peers = frozenset(p for _, p in outcome.answers)
            pct = precision(peers, baseline_answers[outcome.query])
        rows.append(
            QueryMetrics(
                query=outcome.query,
                messages=outcome.messages,
                completion=outcome.completion,
                answer_count=len(outcome.answers),
                precision_pct=pct,
            )
        )
    defined = [r.precision_pct for r in rows if r.precision_pct is not None]
    return MetricsReport(
        per_query=tuple(rows),
        total_messages=sum(r.messages for r in rows),
        mean_completion=(sum(r.completion for r in rows) / len(rows)) if rows else 0.0,
        mean_precision_pct=(sum(defined) / len(defined)) if defined else None,
        queries_excluded_from_precision=len(rows) - len(defined),
    )


@dataclass(frozen=True)
class ExperimentSpec:
    experiment_id: int
    peer_counts: tuple[int, ...]
    sp_counts: tuple[int, ...]
    base: "RunConfig"
    seed: int
    cross_product: bool = False

    def validate(self) -> "ExperimentSpec":
        if self.experiment_id not in (1, 2, 3, 4):
            raise InvalidConfig("experiment id must be 1..4")
        if not self.peer_counts or not self.sp_counts:
            raise InvalidConfig("sweep lists must be nonempty")
        return self


def default_spec(experiment_id: int, base: "RunConfig", seed: Optional[int] = None,
                 cross_product: bool = False) -> ExperimentSpec:
    """Default sweeps: 1 and 4 vary peers at 10 SPs, 2 varies SPs at 3000
    peers, 3 varies both jointly."""
    effective_seed = base.seed if seed is None else seed
    if experiment_id in (1, 4):
        peers, sps = PEER_SWEEP, (10,)
    elif experiment_id == 2:
        peers, sps = (3000,), SP_SWEEP
    elif experiment_id == 3:
        peers, sps = PEER_SWEEP, SP_SWEEP_COARSE
    else:
        raise InvalidConfig("experiment id must be 1..4")
    return ExperimentSpec(
        experiment_id=experiment_id,
        peer_counts=peers,
        sp_counts=sps,
        base=base,
        seed=effective_seed,
        cross_product=cross_product,
    )


def sweep_points(spec: ExperimentSpec) -> list[tuple[int, int]]:
    if spec.experiment_id == 3 and not spec.cross_product:
        return [(p, min(s, MAX_SP_COUNT)) for p, s in zip(spec.peer_counts, spec.sp_counts)]
    return [(p, s) for p in spec.peer_counts for s in spec.sp_counts]


def _run_point(args: tuple["RunConfig", int, int, int]) -> dict:
    # one sweep point; imported here because routing imports this module
    from .routing import run_bootstrap
    from .topology import generate_topology
    from .workload import generate_queries

    base, peers, sps, seed = args
    point = f"{peers}x{sps}"
    topo_cfg = replace(
        base.topology_config(),
        num_peers=peers,
        num_themes=sps,
        seed=derive_seed(seed, f"topology:{point}"),
    )
    topology = generate_topology(topo_cfg)
    train_cfg = replace(
        base.workload_config(), seed=derive_seed(seed, f"train:{point}")
    )
    queries_train = generate_queries(topology, train_cfg)
    eval_cfg = replace(
        base.workload_config(),
        seed=derive_seed(seed, f"eval:{point}"),
        query_id_base=train_cfg.query_id_base + len(queries_train),
    )
    queries_eval = generate_queries(topology, eval_cfg)

    result = run_bootstrap(
        topology,
        queries_train,
        queries_eval,
        theta=base.theta,
        params=base.tree_params(),
        tau=base.tau,
        lat=base.latency_config(),
        compute_accuracy=True,
    )
    return {
        "num_peers": peers,
        "num_super_peers": sps,
        "flooding_total_messages": result.flooding_eval.total_messages,
        "flooding_mean_completion": result.flooding_eval.mean_completion,
        "bk_total_messages": result.bk_eval.total_messages,
        "bk_mean_completion": result.bk_eval.mean_completion,
        "bk_mean_precision_pct": result.bk_eval.mean_precision_pct,
        "tree_accuracy": result.tree_accuracy,
    }


def run_experiment(spec: ExperimentSpec, jobs: int = 0) -> list[dict]:
    """Execute every sweep point; rows come back in sweep order regardless of
    how many worker processes run them."""
    spec.validate()
    points = sweep_points(spec)
    args = [(spec.base, p, s, spec.seed) for p, s in points]
    if jobs <= 0:
        jobs = min(4, os.cpu_count() or 1)
    jobs = min(jobs, len(args))
    if jobs <= 1:
        return [_run_point(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_point, args))


def _format_cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, int):
        return str(value)
    return f"{value:.6f}"


def rows_to_csv(rows: list[dict]) -> str:
    """Header plus one comma-separated row per sweep point; '.' decimals,
    no quoting, NA for undefined values."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def report_to_csv(report: MetricsReport) -> str:
    """Per-query table of one metrics report."""
    lines = ["query,messages,completion,answer_count,precision_pct"]
    for row in report.per_query:
        lines.append(
            ",".join(
                (
                    row.query,
                    str(row.messages),
                    _format_cell(row.completion),
                    str(row.answer_count),
                    _format_cell(row.precision_pct),
                )
            )
        )
    return "\n".join(lines) + "\n"
