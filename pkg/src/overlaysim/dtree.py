"""C4.5-style decision trees over nominal features.

Induction selects the attribute with the best gain ratio among those with
positive information gain, splits multiway on every value present, and
optionally applies pessimistic subtree replacement (upper confidence bound
of the binomial error). Prediction returns a probability distribution over
class labels; unseen branch values fall back to the node's aggregate counts.

Duplicate training rows are aggregated into weighted instances before
induction; leaf counts are identical to per-record processing, only faster.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Iterator, NamedTuple, Union

from .domain import id_index
from .errors import (
    ArityMismatch,
    EmptyCounts,
    EmptyDataset,
    InconsistentArity,
    InvalidConfig,
    ParseError,
)

# Gains at or below this are treated as zero (float noise from entropy sums).
_GAIN_EPS = 1e-12


class TrainingRecord(NamedTuple):
    features: tuple[str, ...]
    class_label: str


@dataclass(frozen=True)
class TreeParams:
    min_instances: int = 2
    prune: bool = True
    confidence: float = 0.25

    def validate(self) -> "TreeParams":
        if self.min_instances < 1:
            raise InvalidConfig("min_instances must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise InvalidConfig("confidence must be in (0, 1)")
        return self


@dataclass
class Leaf:
    counts: dict[str, float]


@dataclass
class Internal:
    attr_index: int
    branches: dict[str, "TreeNode"]
    fallback_counts: dict[str, float]


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class PredictionResult:
    """Class labels with probabilities, descending by probability then id."""

    candidates: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class EvalReport:
    total: int
    correct: int
    accuracy: float
    per_class_confusion: dict[tuple[str, str], int]


# Weighted rows: (features, class_label, weight).
_Row = tuple[tuple[str, ...], str, int]


def entropy(class_counts: dict[str, float]) -> float:
    """Shannon entropy in bits of a class-count map."""
    total = sum(class_counts.values())
    if total <= 0:
        raise EmptyCounts("entropy needs at least one positive count")
    h = 0.0
    for count in class_counts.values():
        if count > 0:
            p = count / total
            h -= p * math.log2(p)
    return h


def _split_stats(rows: list[_Row], attr_index: int, parent_entropy: float,
                 total_weight: int) -> tuple[float, float]:
    """(gain, gain ratio) for splitting `rows` on one attribute."""
    by_value: dict[str, dict[str, int]] = {}
    for features, label, weight in rows:
        counts = by_value.setdefault(features[attr_index], {})
        counts[label] = counts.get(label, 0) + weight

    child_entropy = 0.0
    split_info = 0.0
    for counts in by_value.values():
        subset_weight = sum(counts.values())
        fraction = subset_weight / total_weight
        child_entropy += fraction * entropy(counts)
        split_info -= fraction * math.log2(fraction)

    gain = max(parent_entropy - child_entropy, 0.0)
    ratio = gain / split_info if split_info > 0.0 else 0.0
    return gain, ratio


def gain_ratio(records: list[TrainingRecord], attr_index: int) -> tuple[float, float]:
    """Information gain and gain ratio of one attribute over the records."""
    if not records:
        raise EmptyDataset("gain_ratio needs at least one record")
    rows: list[_Row] = [(r.features, r.class_label, 1) for r in records]
    counts = _class_counts(rows)
    return _split_stats(rows, attr_index, entropy(counts), len(records))


def _class_counts(rows: list[_Row]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for _, label, weight in rows:
        counts[label] = counts.get(label, 0) + weight
    return counts


def _aggregate(pairs: Iterable[tuple[tuple[str, ...], str]]) -> tuple[int, list[_Row]]:
    """Collapse duplicate (features, label) pairs into weighted rows."""
    weights: Counter = Counter()
    arity = -1
    for features, label in pairs:
        if arity < 0:
            arity = len(features)
        elif len(features) != arity:
            raise InconsistentArity(
                f"record has {len(features)} features, expected {arity}"
            )
        weights[(features, label)] += 1
    if not weights:
        raise EmptyDataset("no training records")
    rows = [(features, label, weight) for (features, label), weight in weights.items()]
    return arity, rows


def _grow(rows: list[_Row], arity: int, min_instances: int) -> TreeNode:
    counts = _class_counts(rows)
    total = sum(counts.values())
    if len(counts) == 1 or total < min_instances:
        return Leaf(counts)

    parent_entropy = entropy(counts)
    best_attr = -1
    best_ratio = -1.0
    for attr in range(arity):
        gain, ratio = _split_stats(rows, attr, parent_entropy, total)
        # positive gain required; ties on ratio go to the lowest attribute index
        if gain > _GAIN_EPS and ratio > best_ratio:
            best_attr, best_ratio = attr, ratio
    if best_attr < 0:
        return Leaf(counts)

    partitions: dict[str, list[_Row]] = {}
    for row in rows:
        partitions.setdefault(row[0][best_attr], []).append(row)
    branches = {
        value: _grow(subset, arity, min_instances)
        for value, subset in partitions.items()
    }
    return Internal(attr_index=best_attr, branches=branches, fallback_counts=counts)


def build_tree_from_pairs(pairs: Iterable[tuple[tuple[str, ...], str]],
                          params: TreeParams = TreeParams()) -> TreeNode:
    """Induce a tree from (features, class label) pairs."""
    params.validate()
    arity, rows = _aggregate(pairs)
    root = _grow(rows, arity, params.min_instances)
    if params.prune:
        root = prune_tree(root, params.confidence)
    return root


def build_tree(records: Iterable[TrainingRecord],
               params: TreeParams = TreeParams()) -> TreeNode:
    """Induce a tree from training records (greedy top-down, gain ratio)."""
    return build_tree_from_pairs(
        ((r.features, r.class_label) for r in records), params
    )


def _added_errors(n: float, e: float, cf: float) -> float:
    """Extra errors charged to a leaf at confidence `cf` (C4.5 formulation).

    Upper confidence bound of the binomial error for n covered instances and
    e observed mistakes, with C4.5's special cases for very small e.
    """
    if n <= 0:
        return 0.0
    if e < 1.0:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0.0:
            return base
        return base + e * (_added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / n
    upper = (
        f
        + z * z / (2.0 * n)
        + z * math.sqrt(f / n - f * f / n + z * z / (4.0 * n * n))
    ) / (1.0 + z * z / n)
    return upper * n - e


def _leaf_errors(counts: dict[str, float]) -> float:
    total = sum(counts.values())
    return total - max(counts.values())


def _pessimistic_errors(node: TreeNode, cf: float) -> float:
    if isinstance(node, Leaf):
        n = sum(node.counts.values())
        e = _leaf_errors(node.counts)
        return e + _added_errors(n, e, cf)
    return sum(_pessimistic_errors(child, cf) for child in node.branches.values())


def prune_tree(node: TreeNode, confidence: float = 0.25) -> TreeNode:
    """Bottom-up subtree replacement; never increases the node count."""
    if isinstance(node, Leaf):
        return node
    branches = {value: prune_tree(child, confidence) for value, child in node.branches.items()}
    candidate = Internal(node.attr_index, branches, node.fallback_counts)

    n = sum(node.fallback_counts.values())
    e = _leaf_errors(node.fallback_counts)
    leaf_estimate = e + _added_errors(n, e, confidence)
    if leaf_estimate <= _pessimistic_errors(candidate, confidence):
        return Leaf(dict(node.fallback_counts))
    return candidate


def node_count(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + sum(node_count(child) for child in node.branches.values())


def _resolve_counts(tree: TreeNode, features: tuple[str, ...]) -> dict[str, float]:
    node = tree
    while isinstance(node, Internal):
        if node.attr_index >= len(features):
            raise ArityMismatch(
                f"tree tests attribute {node.attr_index}, got {len(features)} features"
            )
        child = node.branches.get(features[node.attr_index])
        if child is None:
            return node.fallback_counts
        node = child
    return node.counts


def predict_distribution(tree: TreeNode, features: tuple[str, ...]) -> PredictionResult:
    """Walk the tree and normalise the reached counts into probabilities."""
    counts = _resolve_counts(tree, features)
    total = sum(counts.values())
    candidates = [(label, count / total) for label, count in counts.items() if count > 0]
    candidates.sort(key=lambda item: (-item[1], id_index(item[0])))
    return PredictionResult(candidates=tuple(candidates))


def classify(tree: TreeNode, features: tuple[str, ...]) -> str:
    """Most probable class; ties broken by ascending id."""
    counts = _resolve_counts(tree, features)
    return max(counts.items(), key=lambda item: (item[1], -id_index(item[0])))[0]


def evaluate_pairs(tree: TreeNode,
                   pairs: Iterator[tuple[tuple[str, ...], str]]) -> EvalReport:
    """Accuracy and confusion counts over (features, label) pairs."""
    cache: dict[tuple[str, ...], str] = {}
    confusion: Counter = Counter()
    total = 0
    correct = 0
    for features, label in pairs:
        predicted = cache.get(features)
        if predicted is None:
            predicted = classify(tree, features)
            cache[features] = predicted
        total += 1
        if predicted == label:
            correct += 1
        confusion[(label, predicted)] += 1
    if total == 0:
        raise EmptyDataset("no records to evaluate")
    return EvalReport(
        total=total,
        correct=correct,
        accuracy=correct / total,
        per_class_confusion=dict(confusion),
    )


def evaluate(tree: TreeNode, records: list[TrainingRecord]) -> EvalReport:
    if not records:
        raise EmptyDataset("no records to evaluate")
    return evaluate_pairs(tree, ((r.features, r.class_label) for r in records))


def _attr_name(index: int) -> str:
    return f"componentW{index + 1}"


def _leaf_label(counts: dict[str, float]) -> str:
    total = sum(counts.values())
    errors = _leaf_errors(counts)
    label = max(counts.items(), key=lambda item: (item[1], -id_index(item[0])))[0]
    if errors > 0:
        return f"{label} ({total:.1f}/{errors:.1f})"
    return f"{label} ({total:.1f})"


def render_tree(tree: TreeNode) -> str:
    """Textual tree, one node per line, children prefixed by '| ' per level.

    Leaves render as "attr = value: CLASS (n.0)" or "(n.0/e.0)" where n is
    the covered count and e the misclassified count.
    """
    if isinstance(tree, Leaf):
        return _leaf_label(tree.counts)
    lines: list[str] = []

    def walk(node: Internal, prefix: str) -> None:
        name = _attr_name(node.attr_index)
        for value, child in node.branches.items():
            if isinstance(child, Leaf):
                lines.append(f"{prefix}{name} = {value}: {_leaf_label(child.counts)}")
            else:
                lines.append(f"{prefix}{name} = {value}")
                walk(child, prefix + "| ")

    walk(tree, "")
    return "\n".join(lines)


def _node_to_obj(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "counts": node.counts}
    return {
        "kind": "internal",
        "attr_index": node.attr_index,
        "branches": {value: _node_to_obj(child) for value, child in node.branches.items()},
        "fallback_counts": node.fallback_counts,
    }


def _node_from_obj(obj: dict) -> TreeNode:
    kind = obj["kind"]
    if kind == "leaf":
        return Leaf(counts=dict(obj["counts"]))
    if kind == "internal":
        return Internal(
            attr_index=int(obj["attr_index"]),
            branches={value: _node_from_obj(child) for value, child in obj["branches"].items()},
            fallback_counts=dict(obj["fallback_counts"]),
        )
    raise ParseError(f"unknown tree node kind: {kind!r}")


def tree_to_json(tree: TreeNode) -> str:
    return json.dumps(_node_to_obj(tree), indent=2) + "\n"


def tree_from_json(text: str) -> TreeNode:
    try:
        return _node_from_obj(json.loads(text))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid tree document: {exc}") from exc
