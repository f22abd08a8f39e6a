import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overlaysim.dtree import (
    EvalReport,
    Internal,
    Leaf,
    TrainingRecord,
    TreeParams,
    build_tree,
    classify,
    entropy,
    evaluate,
    gain_ratio,
    node_count,
    predict_distribution,
    prune_tree,
    render_tree,
    tree_from_json,
    tree_to_json,
)
from overlaysim.errors import (
    ArityMismatch,
    EmptyCounts,
    EmptyDataset,
    InconsistentArity,
)

# ---------------------------------------------------------------------------
# Independent oracle, from the entropy definition alone: probabilities from
# raw label lists, subsets enumerated value by value. Kept free of any
# package import so it cannot share a bug with the implementation.


def oracle_entropy(labels):
    h = 0.0
    for label in set(labels):
        p = labels.count(label) / len(labels)
        h -= p * math.log(p, 2)
    return h


def oracle_gain_ratio(rows, attr):
    labels = [label for _, label in rows]
    parent = oracle_entropy(labels)
    values = []
    for features, _ in rows:
        if features[attr] not in values:
            values.append(features[attr])
    child = 0.0
    split = 0.0
    for value in values:
        subset = [label for features, label in rows if features[attr] == value]
        child += len(subset) / len(rows) * oracle_entropy(subset)
        split -= len(subset) / len(rows) * math.log(len(subset) / len(rows), 2)
    gain = parent - child
    return gain, (gain / split if split > 0 else 0.0)


SIX_RECORDS = [
    TrainingRecord(("a", "x"), "SP1"),
    TrainingRecord(("a", "y"), "SP1"),
    TrainingRecord(("b", "x"), "SP2"),
    TrainingRecord(("b", "y"), "SP2"),
    TrainingRecord(("c", "x"), "SP1"),
    TrainingRecord(("c", "y"), "SP3"),
]


# ---------------------------------------------------------------------------
# entropy


def test_entropy_uniform_binary():
    assert entropy({"SPa": 2, "SPb": 2}) == pytest.approx(1.0, abs=1e-12)


def test_entropy_pure():
    assert entropy({"SPa": 4}) == pytest.approx(0.0, abs=1e-12)


def test_entropy_nine_five():
    # frozen from the hand calculation -(9/14)log2(9/14) - (5/14)log2(5/14)
    value = entropy({"SPa": 9, "SPb": 5})
    assert value == pytest.approx(0.9402859586706309, abs=1e-12)
    assert value == pytest.approx(0.94029, abs=5e-6)
    assert value == pytest.approx(oracle_entropy(["SPa"] * 9 + ["SPb"] * 5), abs=1e-12)


def test_entropy_empty_counts():
    with pytest.raises(EmptyCounts):
        entropy({})
    with pytest.raises(EmptyCounts):
        entropy({"SPa": 0})


# ---------------------------------------------------------------------------
# gain ratio


def test_gain_ratio_single_valued_attribute():
    records = [TrainingRecord(("a", str(i)), f"SP{i}") for i in range(4)]
    gain, ratio = gain_ratio(records, 0)
    assert gain == 0.0
    assert ratio == 0.0


def test_gain_ratio_perfect_separator():
    records = [
        TrainingRecord(("a",), "SP1"),
        TrainingRecord(("a",), "SP1"),
        TrainingRecord(("b",), "SP2"),
        TrainingRecord(("b",), "SP2"),
    ]
    gain, _ = gain_ratio(records, 0)
    parent = entropy({"SP1": 2, "SP2": 2})
    assert gain == pytest.approx(parent, abs=1e-12)


def test_gain_ratio_six_record_frozen_values():
    # expected values computed with oracle_gain_ratio before implementation
    gain0, ratio0 = gain_ratio(SIX_RECORDS, 0)
    assert gain0 == pytest.approx(1.1258145836939115, abs=1e-9)
    assert ratio0 == pytest.approx(0.7103099178571526, abs=1e-9)
    gain1, ratio1 = gain_ratio(SIX_RECORDS, 1)
    assert gain1 == pytest.approx(0.20751874963942196, abs=1e-9)
    assert ratio1 == pytest.approx(0.20751874963942196, abs=1e-9)


def _random_dataset(rng, max_records=12, max_attrs=3):
    arity = rng.randint(1, max_attrs)
    n = rng.randint(1, max_records)
    values = ["u", "v", "w"]
    labels = ["SP0", "SP1", "SP2"]
    return [
        TrainingRecord(
            tuple(rng.choice(values) for _ in range(arity)),
            rng.choice(labels),
        )
        for _ in range(n)
    ]


def test_gain_ratio_matches_oracle_on_random_datasets():
    rng = random.Random(97)
    for _ in range(150):
        records = _random_dataset(rng)
        rows = [(r.features, r.class_label) for r in records]
        for attr in range(len(records[0].features)):
            gain, ratio = gain_ratio(records, attr)
            egain, eratio = oracle_gain_ratio(rows, attr)
            assert gain == pytest.approx(egain, abs=1e-9)
            assert ratio == pytest.approx(eratio, abs=1e-9)
            assert 0.0 <= gain <= oracle_entropy([r.class_label for r in records]) + 1e-9
            assert ratio >= 0.0


# ---------------------------------------------------------------------------
# induction


def test_build_tree_pure_dataset_gives_leaf():
    records = [TrainingRecord(("a", "b"), "SP1")] * 5
    tree = build_tree(records, TreeParams(prune=False))
    assert isinstance(tree, Leaf)
    assert tree.counts == {"SP1": 5}


def test_build_tree_splits_on_determining_attribute():
    # attribute 0 fixes the class; attribute 1 is constant (zero gain)
    records = [
        TrainingRecord(("a", "z"), "SP1"),
        TrainingRecord(("a", "z"), "SP1"),
        TrainingRecord(("b", "z"), "SP2"),
        TrainingRecord(("b", "z"), "SP2"),
    ]
    tree = build_tree(records, TreeParams(prune=False))
    assert isinstance(tree, Internal)
    assert tree.attr_index == 0
    assert all(isinstance(child, Leaf) for child in tree.branches.values())
    assert evaluate(tree, records).accuracy == 1.0


def test_build_tree_contradiction_free_eight_records():
    rng = random.Random(5)
    features = [("a", "x"), ("a", "y"), ("b", "x"), ("b", "y"),
                ("c", "x"), ("c", "y"), ("d", "x"), ("d", "y")]
    records = [TrainingRecord(f, f"SP{i % 3}") for i, f in enumerate(features)]
    rng.shuffle(records)
    tree = build_tree(records, TreeParams(prune=False, min_instances=1))
    # exhaustive check of the tree against its own training set
    for record in records:
        assert classify(tree, record.features) == record.class_label
    assert evaluate(tree, records).accuracy == 1.0


def test_build_tree_errors():
    with pytest.raises(EmptyDataset):
        build_tree([], TreeParams())
    with pytest.raises(InconsistentArity):
        build_tree(
            [TrainingRecord(("a",), "SP1"), TrainingRecord(("a", "b"), "SP2")],
            TreeParams(),
        )


def test_duplicates_accumulate_in_leaf_counts():
    records = [TrainingRecord(("a",), "SP1")] * 3 + [TrainingRecord(("a",), "SP2")]
    tree = build_tree(records, TreeParams(prune=False))
    assert isinstance(tree, Leaf)
    assert tree.counts == {"SP1": 3, "SP2": 1}


def _structural_fallback_check(node):
    if isinstance(node, Leaf):
        return dict(node.counts)
    summed: dict[str, float] = {}
    for child in node.branches.values():
        for label, count in _structural_fallback_check(child).items():
            summed[label] = summed.get(label, 0) + count
    assert summed == node.fallback_counts
    assert len(node.branches) >= 2
    return summed


def test_fallback_counts_match_descendants():
    rng = random.Random(11)
    for _ in range(30):
        records = _random_dataset(rng, max_records=40, max_attrs=4)
        for prune in (False, True):
            tree = build_tree(records, TreeParams(prune=prune))
            _structural_fallback_check(tree)


# ---------------------------------------------------------------------------
# pruning


def test_prune_leaf_is_identity():
    leaf = Leaf({"SP1": 3})
    assert prune_tree(leaf, 0.25) is leaf


def test_prune_collapses_redundant_split():
    # children agree with the parent majority, so replacement cannot be worse
    tree = Internal(
        attr_index=0,
        branches={
            "a": Leaf({"SP1": 5, "SP2": 1}),
            "b": Leaf({"SP1": 4, "SP2": 2}),
        },
        fallback_counts={"SP1": 9, "SP2": 3},
    )
    pruned = prune_tree(tree, 0.25)
    assert isinstance(pruned, Leaf)
    assert pruned.counts == {"SP1": 9, "SP2": 3}


def test_prune_never_grows_and_is_idempotent():
    rng = random.Random(23)
    for _ in range(40):
        records = _random_dataset(rng, max_records=200, max_attrs=4)
        unpruned = build_tree(records, TreeParams(prune=False))
        pruned = build_tree(records, TreeParams(prune=True))
        assert node_count(pruned) <= node_count(unpruned)
        again = prune_tree(pruned, 0.25)
        assert again == pruned


# ---------------------------------------------------------------------------
# prediction


def _demo_tree():
    return Internal(
        attr_index=0,
        branches={
            "k.f": Internal(
                attr_index=1,
                branches={
                    "g.f": Leaf({"SP3": 26}),
                    "g.h": Leaf({"SP0": 15}),
                },
                fallback_counts={"SP3": 26, "SP0": 15},
            ),
            "p.i": Leaf({"SP0": 50}),
            "r.m": Leaf({"SP5": 255, "SP3": 100, "SP6": 38}),
        },
        fallback_counts={"SP3": 126, "SP0": 65, "SP5": 255, "SP6": 38},
    )


def test_predict_pure_leaf():
    result = predict_distribution(_demo_tree(), ("p.i", "a.a", "b.b", "c.c"))
    assert result.candidates == (("SP0", 1.0),)


def test_predict_two_level_path():
    result = predict_distribution(_demo_tree(), ("k.f", "g.f", "b.b", "c.c"))
    assert result.candidates[0] == ("SP3", 1.0)


def test_predict_unseen_value_uses_fallback():
    tree = _demo_tree()
    result = predict_distribution(tree, ("zz.zz", "a.a", "b.b", "c.c"))
    total = sum(tree.fallback_counts.values())
    expected = {sp: c / total for sp, c in tree.fallback_counts.items()}
    assert dict(result.candidates) == pytest.approx(expected)


def test_predict_distribution_sums_to_one():
    rng = random.Random(7)
    for _ in range(50):
        records = _random_dataset(rng, max_records=30, max_attrs=3)
        tree = build_tree(records, TreeParams())
        for record in records:
            result = predict_distribution(tree, record.features)
            probs = [p for _, p in result.candidates]
            assert abs(sum(probs) - 1.0) < 1e-9
            assert all(0.0 <= p <= 1.0 for p in probs)
            # sorted by descending probability, ascending id on ties
            for (sp_a, p_a), (sp_b, p_b) in zip(result.candidates, result.candidates[1:]):
                assert p_a > p_b or (p_a == p_b and sp_a < sp_b)


def test_classify_majority_and_ties():
    assert classify(_demo_tree(), ("r.m", "a.a", "b.b", "c.c")) == "SP5"
    tie = Leaf({"SP7": 3, "SP2": 3})
    assert classify(tie, ("a",)) == "SP2"  # ascending id wins the tie


def test_classify_matches_top_candidate():
    rng = random.Random(13)
    for _ in range(30):
        records = _random_dataset(rng, max_records=25, max_attrs=3)
        tree = build_tree(records, TreeParams())
        for record in records:
            top = predict_distribution(tree, record.features).candidates[0][0]
            assert classify(tree, record.features) == top


def test_classify_scale_invariance():
    tree = _demo_tree()
    scaled = Internal(
        attr_index=0,
        branches={v: Leaf({k: c * 7 for k, c in b.counts.items()})
                  if isinstance(b, Leaf) else b
                  for v, b in tree.branches.items()},
        fallback_counts={k: c * 7 for k, c in tree.fallback_counts.items()},
    )
    for features in (("p.i", "x.x"), ("r.m", "x.x"), ("q.q", "x.x")):
        assert classify(tree, features) == classify(scaled, features)


def test_predict_arity_mismatch():
    tree = _demo_tree()
    with pytest.raises(ArityMismatch):
        predict_distribution(Internal(5, {"a": Leaf({"SP1": 1}), "b": Leaf({"SP2": 1})},
                                      {"SP1": 1, "SP2": 1}), ("a",))
    assert classify(tree, ("p.i",)) == "SP0"  # attr 0 fits a 1-feature vector


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_perfect_on_own_data():
    tree = build_tree(SIX_RECORDS, TreeParams(prune=False, min_instances=1))
    report = evaluate(tree, SIX_RECORDS)
    assert report.accuracy == 1.0
    assert report.total == 6
    assert report.correct == 6
    assert sum(report.per_class_confusion.values()) == 6
    assert all(actual == predicted for actual, predicted in report.per_class_confusion)


def test_evaluate_counts_errors():
    leaf = Leaf({"SP1": 3})
    records = [TrainingRecord(("a",), "SP1"), TrainingRecord(("a",), "SP2")]
    report = evaluate(leaf, records)
    assert report == EvalReport(
        total=2, correct=1, accuracy=0.5,
        per_class_confusion={("SP1", "SP1"): 1, ("SP2", "SP1"): 1},
    )


def test_evaluate_empty():
    with pytest.raises(EmptyDataset):
        evaluate(Leaf({"SP1": 1}), [])


# ---------------------------------------------------------------------------
# rendering and serialization


def test_render_matches_expected_layout():
    text = render_tree(_demo_tree())
    lines = text.splitlines()
    assert "componentW1 = k.f" in lines
    assert "| componentW2 = g.f: SP3 (26.0)" in lines
    assert "| componentW2 = g.h: SP0 (15.0)" in lines
    assert "componentW1 = p.i: SP0 (50.0)" in lines
    assert "componentW1 = r.m: SP5 (393.0/138.0)" in lines


def test_render_single_leaf():
    assert render_tree(Leaf({"SP2": 4})) == "SP2 (4.0)"


def test_json_round_trip():
    rng = random.Random(31)
    for _ in range(10):
        records = _random_dataset(rng, max_records=30, max_attrs=3)
        tree = build_tree(records, TreeParams())
        assert tree_from_json(tree_to_json(tree)) == tree


@settings(max_examples=40)
@given(st.data())
def test_prediction_properties_hypothesis(data):
    labels = st.sampled_from(["SP0", "SP1", "SP4"])
    values = st.sampled_from(["a", "b", "c"])
    records = data.draw(
        st.lists(
            st.tuples(st.tuples(values, values), labels),
            min_size=1,
            max_size=25,
        )
    )
    tree = build_tree([TrainingRecord(f, c) for f, c in records], TreeParams())
    features = data.draw(st.tuples(values, values))
    result = predict_distribution(tree, features)
    assert abs(sum(p for _, p in result.candidates) - 1.0) < 1e-9
    assert classify(tree, features) == result.candidates[0][0]
