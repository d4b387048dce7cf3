from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from discodeck.discourse import (
    DiscourseTree,
    Leaf,
    RelationLabel,
    Relation,
    compute_stats,
    correlation_report,
    fallback_tree,
    node_from_json,
    node_to_json,
    parse_section_discourse,
    pearson,
    relation_distribution,
    shallow_nuclei,
    validate_tree,
    validate_tree_json,
)
from discodeck.errors import DegenerateSample
from discodeck.gateway import Gateway, GatewayMode
from discodeck.gateway.transport import ScriptedTransport
from discodeck.ingest import DocumentBundle, Paragraph, Section, SectionGroup
from oracles import count_wire_nodes, pearson_fraction, random_tree_json


def make_section(n: int, index: int = 1, group: SectionGroup = SectionGroup.METHODOLOGY) -> Section:
    paras = tuple(Paragraph(f"s{index}.p{i}", f"Paragraph {i} of section {index} with words.") for i in range(1, n + 1))
    return Section(index, f"Section {index}", group, paras)


def chain(ids: list[str], label=RelationLabel.ELABORATION):
    node = Leaf(ids[-1])
    for pid in reversed(ids[:-1]):
        node = Relation(label, Leaf(pid), node)
    return node


def test_taxonomy_and_arity():
    assert [l.value for l in RelationLabel] == [
        "Elaboration", "Explanation", "Context", "Purpose", "Evaluation", "Organization", "Joint", "SameUnit"]
    assert {l.value for l in RelationLabel if l.arity.value == "MN"} == {"Joint", "SameUnit"}
    assert RelationLabel.parse("same-unit") is RelationLabel.SAME_UNIT


def test_valid_three_leaf_tree_has_empty_report():
    sec = make_section(3)
    tree = {"relation": "Elaboration", "type": "NS", "nucleus": {"edu": "s1.p1"},
            "satellite": {"relation": "Joint", "type": "MN", "left": {"edu": "s1.p2"}, "right": {"edu": "s1.p3"}}}
    assert validate_tree_json(tree, sec) == []


def test_three_child_node_is_non_binary():
    tree = {"relation": "Joint", "type": "MN", "children": [{"edu": "a"}, {"edu": "b"}, {"edu": "c"}]}
    errors = validate_tree_json(tree)
    assert any("non-binary node at root" in e for e in errors)


def test_out_of_order_leaves_flagged():
    sec = make_section(3)
    tree = {"relation": "Elaboration", "type": "NS", "nucleus": {"edu": "s1.p2"},
            "satellite": {"relation": "Joint", "type": "MN", "left": {"edu": "s1.p1"}, "right": {"edu": "s1.p3"}}}
    errors = validate_tree_json(tree, sec)
    assert len(errors) == 1 and "order" in errors[0]


def test_wrong_type_and_unknown_relation_flagged():
    bad = {"relation": "Joint", "type": "NS", "nucleus": {"edu": "a"}, "satellite": {"edu": "b"}}
    assert any("must be MN" in e for e in validate_tree_json(bad))
    bad = {"relation": "Contrast", "type": "NS", "nucleus": {"edu": "a"}, "satellite": {"edu": "b"}}
    assert any("unknown relation" in e for e in validate_tree_json(bad))


def test_stats_single_leaf():
    st_ = compute_stats(Leaf("s1.p1"))
    assert (st_.height, st_.avg_leaf_depth, st_.relation_count) == (0, 0, 0)


def test_stats_balanced_four():
    root = Relation(RelationLabel.JOINT, Relation(RelationLabel.ELABORATION, Leaf("a"), Leaf("b")),
                    Relation(RelationLabel.ELABORATION, Leaf("c"), Leaf("d")))
    st_ = compute_stats(root)
    assert (st_.height, st_.avg_leaf_depth, st_.relation_count) == (2, 2, 3)


def test_stats_right_chain_of_five():
    st_ = compute_stats(chain(["a", "b", "c", "d", "e"]))
    assert st_.height == 4
    assert st_.avg_leaf_depth == Fraction(1 + 2 + 3 + 4 + 4, 5) == Fraction(14, 5)
    assert st_.relation_count == 4


@given(st.integers(1, 40), st.integers(0, 2**32))
def test_random_trees_obey_structural_law(n, seed):
    ids = [f"s1.p{i}" for i in range(1, n + 1)]
    obj = random_tree_json(ids, random.Random(seed))
    assert validate_tree_json(obj, make_section(n)) == []
    tree = DiscourseTree(1, node_from_json(obj))
    leaves, rels = count_wire_nodes(obj)
    st_ = compute_stats(tree)
    assert st_.relation_count == rels == leaves - 1
    assert st_.height >= (n - 1).bit_length() if n > 1 else st_.height == 0
    assert st_.avg_leaf_depth <= st_.height
    assert tree.leaf_order == ids


@given(st.integers(1, 30), st.integers(0, 2**32))
def test_json_round_trip_is_identity(n, seed):
    ids = [f"s2.p{i}" for i in range(1, n + 1)]
    tree = DiscourseTree(2, node_from_json(random_tree_json(ids, random.Random(seed))))
    again = DiscourseTree.from_json(json.loads(tree.dumps()))
    assert again == tree
    assert again.dumps() == tree.dumps()


def test_canonical_key_order():
    tree = DiscourseTree(1, Relation(RelationLabel.PURPOSE, Leaf("a"), Leaf("b"), nucleus_left=False))
    assert list(node_to_json(tree.root)) == ["relation", "type", "nucleus", "satellite", "satellite_first"]
    assert node_to_json(tree.root)["nucleus"] == {"edu": "b"}


@given(st.integers(1, 25))
def test_fallback_tree_always_validates(n):
    sec = make_section(n)
    tree = fallback_tree(sec)
    assert validate_tree(tree, sec) == []
    assert shallow_nuclei(tree) == ["s1.p1"]


def _gateway(responses):
    it = iter(responses)
    return Gateway(GatewayMode.RECORD, ScriptedTransport(lambda req: next(it)))


def test_single_paragraph_section_needs_no_agent():
    tree = parse_section_discourse(make_section(1), _gateway([]))
    assert tree.root == Leaf("s1.p1")


def test_two_paragraph_section_forced_shape():
    resp = json.dumps({"tree": {"relation": "Evaluation", "type": "NS", "nucleus": {"edu": "s1.p1"},
                                "satellite": {"edu": "s1.p2"}}})
    tree = parse_section_discourse(make_section(2), _gateway([resp]))
    assert tree.root == Relation(RelationLabel.EVALUATION, Leaf("s1.p1"), Leaf("s1.p2"))


def test_garbage_output_falls_back_after_repairs():
    gw = _gateway(["not json"] * 4)
    tree = parse_section_discourse(make_section(4), gw)
    assert tree.fallback and validate_tree(tree, make_section(4)) == []
    assert len(gw.transcript) == 4


def test_relation_distribution_examples():
    sec1, sec2 = make_section(3, 1, SectionGroup.METHODOLOGY), make_section(3, 2, SectionGroup.EVALUATION)
    bundle = DocumentBundle("t", (sec1, sec2))
    t1 = DiscourseTree(1, chain(sec1.paragraph_ids))
    dist = relation_distribution([t1], bundle)
    assert dist == {SectionGroup.METHODOLOGY: {RelationLabel.ELABORATION: 1.0}}
    t1 = DiscourseTree(1, Relation(RelationLabel.CONTEXT, Leaf("s1.p1"), Relation(
        RelationLabel.PURPOSE, Leaf("s1.p2"), Leaf("s1.p3"))))
    t2 = DiscourseTree(2, Relation(RelationLabel.JOINT, Leaf("s2.p1"), Relation(
        RelationLabel.EVALUATION, Leaf("s2.p2"), Leaf("s2.p3"))))
    dist = relation_distribution([t1, t2], bundle)
    assert all(sorted(h.values()) == [0.5, 0.5] for h in dist.values()) and len(dist) == 2
    assert relation_distribution([], bundle) == {}


@given(st.lists(st.integers(1, 12), min_size=1, max_size=6), st.integers(0, 2**32))
def test_distribution_sums_to_one(sizes, seed):
    rng = random.Random(seed)
    sections = tuple(make_section(n, k + 1, rng.choice(list(SectionGroup))) for k, n in enumerate(sizes))
    trees = [DiscourseTree(s.index, node_from_json(random_tree_json(s.paragraph_ids, rng))) for s in sections]
    for hist in relation_distribution(trees, DocumentBundle("t", sections)).values():
        assert abs(sum(hist.values()) - 1.0) <= 1e-9


def test_correlation_examples():
    trees = [DiscourseTree(1, chain([f"p{i}" for i in range(n)])) for n in (2, 3, 5)]
    assert correlation_report(trees)["leaves_vs_relations"] == 1.0
    with pytest.raises(DegenerateSample):
        correlation_report([DiscourseTree(1, chain(["a", "b"]))] * 3)
    chains = [DiscourseTree(1, chain([f"p{i}" for i in range(n)])) for n in (2, 4, 8)]
    rep = correlation_report(chains)
    assert pearson_fraction([2, 4, 8], [1, 3, 7]) == 1
    assert rep["leaves_vs_height"] == 1.0


@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=12))
def test_pearson_matches_exact_oracle(pairs):
    xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
    try:
        r = pearson(xs, ys)
    except DegenerateSample:
        assert len(set(xs)) == 1 or len(set(ys)) == 1
        return
    r2 = pearson_fraction(xs, ys)
    assert abs(r * abs(r) - float(r2)) < 1e-12
