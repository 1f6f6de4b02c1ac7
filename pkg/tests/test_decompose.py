"""Composite-question trees: generation, assembly and serialization."""

import pytest

import sentbank
from hcqa.decompose import (
    CompositeQuestionTree,
    Vertex,
    build_cqtree,
    check_tree,
    concat,
    concat_assign,
    decompose,
    generate_subquestions,
    trace_spt,
    tree_to_json,
)
from hcqa.errors import ContractViolation, DecompositionError
from hcqa.extract import extract_all
from hcqa.settings import parse_settings

SETTINGS = parse_settings("ABCDEH")


def tree_for(name):
    sent = getattr(sentbank, name)()
    return decompose(extract_all(sent, SETTINGS, sentbank.LEX), sent)


def subqs_for(name):
    sent = getattr(sentbank, name)()
    return generate_subquestions(extract_all(sent, SETTINGS, sentbank.LEX))


def sq(vid, children, subject, predicate, object, template, instance, depths):
    return {
        "id": vid,
        "children": children,
        "kind": "subquestion",
        "triple": {"subject": subject, "predicate": predicate, "object": object},
        "template": template,
        "instance": instance,
        "depths": depths,
    }


def op(vid, children, operator, symbol, detail=None):
    entry = {"id": vid, "children": children, "kind": "operator", "operator": operator, "symbol": symbol}
    if detail is not None:
        entry["detail"] = detail
    return entry


# -- whole-tree shapes ------------------------------------------------------


def test_two_clause_chain():
    assert tree_to_json(tree_for("writers")) == {
        "root": 0,
        "vertices": [
            sq(0, [1], "writers", "influenced", "philosopher", 16, 1, [1, 4]),
            op(1, [2], "assign", "↑", [1, "object", 2, "subject"]),
            sq(2, [], "philosopher", "refused", "Nobel Prize", 16, 2, [4, 7]),
        ],
    }


def test_shared_unknown_subject_chain():
    assert tree_to_json(tree_for("chaplin")) == {
        "root": 0,
        "vertices": [
            sq(0, [1], "?s", "Born", "city", 16, 1, [2, 2]),
            op(1, [2], "assign", "↑", [1, "subject", 2, "subject"]),
            sq(2, [], "?s", "half brother", "Charli Chaplin", 36, 2, [2, 3]),
        ],
    }


def test_counting_root():
    assert tree_to_json(tree_for("q2")) == {
        "root": 0,
        "vertices": [
            op(0, [1], "count", "F"),
            sq(1, [2], "?s", "children", "actor", 3, 1, [1, 3]),
            op(2, [3], "assign", "↑", [1, "object", 2, "subject"]),
            sq(3, [], "actor", "plays", "Dan White", 10, 2, [3, 6]),
        ],
    }


def test_counting_with_genitive_provider():
    assert tree_to_json(tree_for("q3")) == {
        "root": 0,
        "vertices": [
            op(0, [1], "count", "F"),
            sq(1, [2], "?s", "Golden Glob awards", "daughter", 3, 2, [1, 3]),
            op(2, [3], "assign", "↑", [2, "object", 4, "subject"]),
            sq(3, [], "?s", "daughter", "Henry Fonda", 36, 4, [3, 4]),
        ],
    }


def test_subject_fed_by_shallower_clause():
    assert tree_to_json(tree_for("q4")) == {
        "root": 0,
        "vertices": [
            sq(0, [1], "?s", "fought", "Battle of Arnhem", 16, 2, [2, 4]),
            op(1, [2], "assign", "↑", [2, "subject", 1, "subject"]),
            sq(2, [], "?s", "recipient", "Victoria Cross", 36, 1, [2, 3]),
        ],
    }


def test_coordination_picks_union_for_or():
    assert tree_to_json(tree_for("cities_or")) == {
        "root": 0,
        "vertices": [
            op(0, [1, 2], "union", "∪", ["subject", "subject"]),
            sq(1, [], "cities", "hosted", "Olympics", 16, 1, [1, 4]),
            sq(2, [], "cities", "hosted", "Expo", 16, 2, [1, 4]),
        ],
    }


def test_coordination_picks_intersection_for_and():
    tree = tree_to_json(tree_for("cities_and"))
    assert tree["vertices"][0]["operator"] == "intersect"
    assert tree["vertices"][0]["symbol"] == "∩"
    assert tree["vertices"][1:] == tree_to_json(tree_for("cities_or"))["vertices"][1:]


def test_numeric_filter_wraps_its_vertex():
    assert tree_to_json(tree_for("lakes_deeper")) == {
        "root": 0,
        "vertices": [
            sq(0, [1], "?s", "man-made lakes", "Australia", 36, 2, [2, 3]),
            op(1, [2], "assign", "↑", [2, "subject", 3, "subject"]),
            op(2, [3], "filter", "F", ["compare", "gt", 100.0]),
            sq(3, [], "?s", "deeper", "?n", 42, 3, [5, 5]),
        ],
    }


# -- sub-question generation ------------------------------------------------


def test_one_subquestion_per_surviving_instance():
    subqs = subqs_for("writers")
    assert [(q.instance_id, q.render()) for q in subqs] == [
        (1, ("writers", "influenced", "philosopher")),
        (2, ("philosopher", "refused", "Nobel Prize")),
    ]
    assert not any(q.wants_count for q in subqs)


def test_count_marker_comes_from_how_many():
    subqs = subqs_for("q2")
    assert [q.wants_count for q in subqs] == [True, False]


def test_nested_noun_pair_is_absorbed():
    # "half brother" matches both the possessive and the compound pattern;
    # the compound survives extraction but never becomes a sub-question
    subqs = subqs_for("chaplin")
    assert [q.instance_id for q in subqs] == [1, 2]
    assert all(q.triple.template_id != 28 for q in subqs)


def test_subject_sharing_rewrites_to_the_provider_variable():
    subqs = subqs_for("chaplin")
    born = subqs[0]
    possessive = subqs[1]
    assert born.triple.subject == possessive.triple.subject
    assert born.triple.subject.text == "?s"
    assert born.provider_id == possessive.instance_id


def test_genitive_key_selects_the_row():
    triples = extract_all(sentbank.daughter_obama(), SETTINGS, sentbank.LEX)
    default = generate_subquestions(triples)
    flipped = generate_subquestions(triples, genitive_key=38)
    assert default[0].render() == ("?s", "daughter", "Obama")
    assert flipped[0].render() == ("daughter", "?p", "Obama")
    with pytest.raises(ValueError):
        generate_subquestions(triples, genitive_key=16)


def test_no_key_triples_is_an_error():
    with pytest.raises(DecompositionError):
        generate_subquestions([])


def test_qualifier_travels_with_the_subquestion():
    subqs = subqs_for("lakes_deeper")
    quals = {q.instance_id: q.qualifier for q in subqs}
    assert quals == {2: None, 3: ("compare", "gt", 100.0)}


# -- assembly primitives ----------------------------------------------------


def _leaf(name, index=0):
    return Vertex(subq=subqs_for(name)[index])


def test_vertex_needs_exactly_one_payload():
    with pytest.raises(ContractViolation):
        Vertex()
    with pytest.raises(ContractViolation):
        Vertex(subq=subqs_for("writers")[0], op="union")


def test_vertices_are_binary():
    v = _leaf("writers")
    v.add_child(_leaf("writers", 1))
    v.add_child(_leaf("played"))
    with pytest.raises(ContractViolation):
        v.add_child(_leaf("played"))


def test_concat_rejects_self_and_bad_operators():
    a = CompositeQuestionTree(_leaf("writers"))
    b = CompositeQuestionTree(_leaf("writers", 1))
    with pytest.raises(ContractViolation):
        concat(a, a, "union")
    with pytest.raises(ContractViolation):
        concat(a, b, "assign")
    with pytest.raises(ContractViolation):
        concat(a, b, "union", slot_a="predicate")


def test_concat_assign_records_the_assignment():
    a = CompositeQuestionTree(_leaf("writers"))
    b = CompositeQuestionTree(_leaf("writers", 1))
    tree = concat_assign(a, b, "object", "subject")
    assert tree.assignments == [(1, "object", 2, "subject")]
    link = tree.root.children[0]
    assert link.op == "assign"
    assert link.children[0] is b.root


def test_check_tree_flags_shared_vertices():
    leaf = _leaf("writers")
    root = Vertex(op="union", detail=("subject", "subject"))
    root.add_child(leaf)
    root.add_child(leaf)
    with pytest.raises(ContractViolation):
        check_tree(CompositeQuestionTree(root))


def test_check_tree_counts_subquestions():
    tree = tree_for("q2")
    check_tree(tree, expected_subquestions=2)
    with pytest.raises(ContractViolation):
        check_tree(tree, expected_subquestions=3)


def test_check_tree_rejects_operator_leaves():
    bad = Vertex(op="count")
    with pytest.raises(ContractViolation):
        check_tree(CompositeQuestionTree(bad))


def test_placement_requires_a_constituency_tree():
    sent = sentbank.tallest_building()  # dependency-only fixture
    subqs = generate_subquestions(extract_all(sent, SETTINGS, sentbank.LEX))
    with pytest.raises(DecompositionError):
        trace_spt(subqs[0], sent.const_root)
    with pytest.raises(DecompositionError):
        build_cqtree(subqs, sent)
