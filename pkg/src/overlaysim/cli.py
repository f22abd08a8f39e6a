"""Command-line entry point.

Subcommands: gen, workload, simulate, train, predict, experiment.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import arff, dtree, metrics, plotting, routing, topology, workload
from .config import CONFIG_FIELDS, RunConfig, load_config
from .domain import parse_component_token
from .errors import OverlaySimError

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _write_text(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key in CONFIG_FIELDS and value is not None
    }
    return load_config(getattr(args, "config", None), overrides)


def _add_config_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file with flat keys")
    parser.add_argument("--seed", type=int, help="override the config seed")


def build_parser() -> _Parser:
    parser = _Parser(prog="overlaysim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a topology")
    _add_config_option(p)
    p.add_argument("--peers", dest="num_peers", type=int)
    p.add_argument("--themes", dest="num_themes", type=int)
    p.add_argument("--vocab-size", dest="vocab_size", type=int)
    p.add_argument("--expertise-size", dest="expertise_size", type=int)
    p.add_argument("--vocab-overlap", dest="vocab_overlap", type=float)
    p.add_argument("--out", required=True, help="topology JSON output path")

    p = sub.add_parser("workload", help="generate the query workload")
    _add_config_option(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--queries-per-peer", dest="queries_per_peer", type=int)
    p.add_argument("--arity", dest="arity", type=int)
    p.add_argument("--query-id-base", dest="query_id_base", type=int)
    p.add_argument("--out", required=True, help="workload JSON output path")

    p = sub.add_parser("simulate", help="run one routing strategy")
    _add_config_option(p)
    p.add_argument("--strategy", required=True, choices=("flooding", "bk"))
    p.add_argument("--topology", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--tree", help="trained tree JSON (required for bk)")
    p.add_argument("--theta", dest="theta", type=float)
    p.add_argument("--tau", dest="tau", type=float)
    p.add_argument("--hop-latency", dest="hop_latency", type=float)
    p.add_argument("--match-cost", dest="match_cost", type=float)
    p.add_argument("--log", required=True, help="ARFF log output path")
    p.add_argument("--metrics", required=True, help="per-query CSV output path")
    p.add_argument("--trace", help="write an event trace to this path")

    p = sub.add_parser("train", help="induce a decision tree from an ARFF log")
    _add_config_option(p)
    p.add_argument("--log", required=True, help="ARFF log input path")
    p.add_argument("--min-instances", dest="min_instances", type=int)
    p.add_argument("--confidence", dest="confidence", type=float)
    p.add_argument("--no-prune", dest="prune", action="store_false", default=None)
    p.add_argument("--out", required=True, help="tree JSON output path")
    p.add_argument("--print-tree", action="store_true")

    p = sub.add_parser("predict", help="print candidate super-peers for components")
    p.add_argument("--tree", required=True)
    p.add_argument("--components", required=True, help="comma-separated tokens")

    p = sub.add_parser("experiment", help="run an experiment sweep")
    _add_config_option(p)
    p.add_argument("--id", dest="experiment_id", type=int, required=True,
                   choices=(1, 2, 3, 4))
    p.add_argument("--jobs", dest="jobs", type=int)
    p.add_argument("--cross-product", action="store_true",
                   help="full peer x super-peer grid for experiment 3")
    p.add_argument("--out", help="output directory (default: config out_dir)")
    return parser


def _cmd_gen(args) -> int:
    cfg = _config_from_args(args)
    topo = topology.generate_topology(cfg.topology_config())
    _write_text(args.out, topology.topology_to_json(topo))
    print(f"wrote {args.out}: {cfg.num_peers} peers, {cfg.num_themes} super-peers, seed={cfg.seed}")
    return 0


def _cmd_workload(args) -> int:
    cfg = _config_from_args(args)
    topo = topology.topology_from_json(_read_text(args.topology))
    wl_cfg = cfg.workload_config()
    queries = workload.generate_queries(topo, wl_cfg)
    _write_text(args.out, workload.workload_to_json(wl_cfg, queries))
    print(f"wrote {args.out}: {len(queries)} queries, seed={cfg.seed}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    topo = topology.topology_from_json(_read_text(args.topology))
    _, queries = workload.workload_from_json(_read_text(args.queries))
    if args.strategy == "bk":
        if not args.tree:
            raise OverlaySimError("--tree is required for the bk strategy")
        tree = dtree.tree_from_json(_read_text(args.tree))
        strategy: routing.RoutingStrategy = routing.Knowledge(tree=tree, tau=cfg.tau)
    else:
        strategy = routing.Flooding()

    trace_handle = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        outcomes, log = routing.run_scenario(
            topo, queries, strategy, cfg.theta, cfg.latency_config(), trace=trace_handle
        )
    finally:
        if trace_handle:
            trace_handle.close()

    schema = arff.schema_from_records(log) if log else None
    if schema is not None:
        _write_text(args.log, arff.write_arff(schema, log))
    else:
        _write_text(args.log, f"@relation {arff.DEFAULT_RELATION}\n@data\n")
    report = metrics.build_report(outcomes)
    _write_text(args.metrics, metrics.report_to_csv(report))
    print(
        f"{args.strategy}: {len(queries)} queries, "
        f"total_messages={report.total_messages}, "
        f"mean_completion={report.mean_completion:.6f}, seed={cfg.seed}"
    )
    return 0


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    _, records = arff.read_arff(_read_text(args.log))
    tree = dtree.build_tree(arff.records_to_training(records), cfg.tree_params())
    _write_text(args.out, dtree.tree_to_json(tree))
    report = dtree.evaluate(tree, arff.records_to_training(records))
    print(f"wrote {args.out}: {len(records)} records, training accuracy {report.accuracy:.4f}")
    if args.print_tree:
        print(dtree.render_tree(tree))
    return 0


def _cmd_predict(args) -> int:
    tree = dtree.tree_from_json(_read_text(args.tree))
    components = tuple(
        parse_component_token(part.strip()) for part in args.components.split(",")
    )
    prediction = dtree.predict_distribution(tree, components)
    for sp, prob in prediction.candidates:
        print(f"{sp} {prob:.3f}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _config_from_args(args)
    out_dir = args.out or cfg.out_dir
    spec = metrics.default_spec(
        args.experiment_id, cfg, seed=cfg.seed, cross_product=args.cross_product
    )
    rows = metrics.run_experiment(spec, jobs=cfg.jobs)
    csv_text = metrics.rows_to_csv(rows)

    os.makedirs(out_dir, exist_ok=True)
    stem = f"experiment_{args.experiment_id}"
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    _write_text(csv_path, csv_text)

    x_column = "num_super_peers" if args.experiment_id == 2 else "num_peers"
    charts = []
    if args.experiment_id == 4:
        charts.append(("precision", ["bk_mean_precision_pct"], "mean precision (%)"))
    else:
        charts.append(
            ("time", ["flooding_mean_completion", "bk_mean_completion"], "mean completion (time units)")
        )
        charts.append(
            ("messages", ["flooding_total_messages", "bk_total_messages"], "total messages")
        )
    for suffix, columns, label in charts:
        plotting.emit_chart(
            csv_text,
            x_column,
            columns,
            os.path.join(out_dir, f"{stem}_{suffix}.svg"),
            title=f"experiment {args.experiment_id}",
            y_label=label,
        )

    meta = {"command": "experiment", "experiment_id": args.experiment_id,
            "seed": cfg.seed, "config": cfg.to_dict()}
    _write_text(os.path.join(out_dir, "run_metadata.json"),
                json.dumps(meta, indent=2) + "\n")
    print(f"wrote {csv_path}: {len(rows)} rows, seed={cfg.seed}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "workload": _cmd_workload,
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "experiment": _cmd_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except OverlaySimError as exc:
        print(f"overlaysim: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"overlaysim: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
