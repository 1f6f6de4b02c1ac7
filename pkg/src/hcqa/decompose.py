"""Question decomposition: sub-question sets and the composite-question tree.

A composite question becomes a binary tree whose leaves are sub-questions
and whose internal vertices are operators: set intersection, set union,
assignment (child answers fill a slot of the parent) and functions such as
counting or numeric filtering.  Deeper constituents are placed lower so
that inner clauses are answered first.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import templates
from .errors import ContractViolation, DecompositionError
from .extract import Phrase, TriplePattern, Var
from .ingest import ConstituencyNode, ParsedSentence, Span

INTERSECT = "intersect"
UNION = "union"
ASSIGN = "assign"
COUNT = "count"
FILTER = "filter"

OPERATOR_SYMBOLS = {INTERSECT: "∩", UNION: "∪", ASSIGN: "↑", COUNT: "F", FILTER: "F"}

GENITIVE_TEMPLATE_IDS = (36, 37, 38, 39)


@dataclass
class SubQuestion:
    triple: TriplePattern
    instance_id: int
    span: Span
    top_depth: int = -1
    down_depth: int = -1
    wants_count: bool = False
    qualifier: tuple | None = None
    provider_id: int | None = None  # instance that supplied our subject variable

    def phrase_terms(self) -> list[Phrase]:
        return [t for t in self.triple.terms() if isinstance(t, Phrase)]

    def render(self) -> tuple[str, str, str]:
        return self.triple.render()


class Vertex:
    """One node of a composite-question tree."""

    __slots__ = ("subq", "op", "detail", "children")

    def __init__(self, subq: SubQuestion | None = None, op: str | None = None, detail: tuple | None = None):
        if (subq is None) == (op is None):
            raise ContractViolation("a vertex holds either a sub-question or an operator")
        self.subq = subq
        self.op = op
        self.detail = detail
        self.children: list[Vertex] = []

    @property
    def is_subquestion(self) -> bool:
        return self.subq is not None

    def add_child(self, child: "Vertex") -> None:
        if len(self.children) >= 2:
            raise ContractViolation("tree vertices are binary")
        self.children.append(child)


@dataclass
class CompositeQuestionTree:
    root: Vertex
    assignments: list[tuple] = field(default_factory=list)  # (consumer, c_slot, provider, p_slot)

    def walk(self):
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.children))

    def vertices(self) -> list[Vertex]:
        return list(self.walk())

    def leaves(self) -> list[Vertex]:
        return [v for v in self.walk() if not v.children]

    def subquestions(self) -> list[SubQuestion]:
        return [v.subq for v in self.walk() if v.is_subquestion]

    def subquestion_vertices(self) -> list[Vertex]:
        return [v for v in self.walk() if v.is_subquestion]


# ---------------------------------------------------------------------------
# sub-question generation


def _designated_key(group: list[TriplePattern], genitive_key: int) -> TriplePattern | None:
    keys = [t for t in group if t.is_key]
    if not keys:
        return None
    if any(t.template_id in GENITIVE_TEMPLATE_IDS for t in group):
        for t in keys:
            if t.template_id == genitive_key:
                return t
    return min(keys, key=lambda t: t.template_id)


def generate_subquestions(triples: list[TriplePattern], genitive_key: int = 36) -> list[SubQuestion]:
    """One sub-question per pattern instance, built from its key triple.

    Genitive matches carry two key rows; `genitive_key` picks which one
    becomes the sub-question (the variable-subject row by default, which
    keeps the later subject-sharing step applicable).
    """
    if genitive_key not in GENITIVE_TEMPLATE_IDS:
        raise ValueError(f"genitive_key must be one of {GENITIVE_TEMPLATE_IDS}")
    by_instance: dict[int, list[TriplePattern]] = {}
    for t in triples:
        by_instance.setdefault(t.instance_id, []).append(t)
    subqs = []
    for iid in sorted(by_instance):
        group = by_instance[iid]
        key = _designated_key(group, genitive_key)
        if key is None:
            continue
        subqs.append(
            SubQuestion(
                triple=key,
                instance_id=iid,
                span=key.source_span,
                wants_count=key.template_id == 3,
                qualifier=key.qualifier,
            )
        )
    subqs = [q for q in subqs if not _absorbed(q, subqs)]
    if not subqs:
        raise DecompositionError("question not decomposable: no key triples found")
    _share_subjects(subqs)
    return subqs


def _absorbed(q: SubQuestion, subqs: list[SubQuestion]) -> bool:
    """True when every phrase of `q` sits inside one phrase of another
    sub-question, as with a noun pair nested in a larger argument."""
    terms = [t for t in q.triple.terms() if isinstance(t, Phrase)]
    if not terms:
        return False
    for other in subqs:
        if other is q:
            continue
        for host in other.triple.terms():
            if isinstance(host, Phrase) and all(host.span.covers(t.span) for t in terms):
                return True
    return False


def _share_subjects(subqs: list[SubQuestion]) -> None:
    """Replace a phrasal subject by another sub-question's subject variable.

    Applies when that other sub-question's predicate is the same phrase and
    its subject is already a variable: "X's Y ..." yields (?s, Y, X), and a
    clause about Y then asks about the same unknown ?s.
    """
    for q in subqs:
        subject = q.triple.subject
        if not isinstance(subject, Phrase):
            continue
        for other in subqs:
            if other is q:
                continue
            pred = other.triple.predicate
            if not isinstance(other.triple.subject, Var) or not isinstance(pred, Phrase):
                continue
            if pred.head == subject.head:
                q.triple = replace(q.triple, subject=other.triple.subject)
                q.provider_id = other.instance_id
                break


# ---------------------------------------------------------------------------
# locating sub-questions in the constituency tree


def trace_spt(q: SubQuestion, root: ConstituencyNode | None) -> tuple[int, int]:
    """Shallowest and deepest constituency depth over the sub-question's phrases."""
    if root is None:
        raise DecompositionError("constituency tree required to place sub-questions")
    depths = []
    for term in q.phrase_terms():
        node = root.tightest_phrase(term.span)
        if node is None:
            raise DecompositionError(f"cannot locate term {term.text!r} in the constituency tree")
        depths.append(node.depth)
    if not depths:
        depths = [root.depth]
    return (min(depths), max(depths))


# ---------------------------------------------------------------------------
# tree assembly primitives


def _single(q: SubQuestion) -> CompositeQuestionTree:
    return CompositeQuestionTree(Vertex(subq=q))


def concat(a: CompositeQuestionTree, b: CompositeQuestionTree, op: str, slot_a: str = "subject", slot_b: str = "subject") -> CompositeQuestionTree:
    """Join two trees under a new set-operator root."""
    if a is b or a.root is b.root:
        raise ContractViolation("cannot concatenate a tree with itself")
    if op not in (INTERSECT, UNION):
        raise ContractViolation(f"concat takes a set operator, got {op!r}")
    _check_slot(slot_a)
    _check_slot(slot_b)
    root = Vertex(op=op, detail=(slot_a, slot_b))
    root.add_child(a.root)
    root.add_child(b.root)
    return CompositeQuestionTree(root, a.assignments + b.assignments)


def concat_assign(
    consumer: CompositeQuestionTree,
    provider: CompositeQuestionTree,
    consumer_slot: str,
    provider_slot: str,
    anchor: Vertex | None = None,
) -> CompositeQuestionTree:
    """Feed the provider tree's answers into one slot of a consumer vertex.

    The provider ends up below an assignment vertex attached to the consumer,
    so it is executed first.
    """
    if consumer is provider or consumer.root is provider.root:
        raise ContractViolation("cannot concatenate a tree with itself")
    _check_slot(consumer_slot)
    _check_slot(provider_slot)
    if anchor is None:
        anchor = next((v for v in consumer.walk() if v.is_subquestion), None)
    if anchor is None or not anchor.is_subquestion:
        raise ContractViolation("assignment needs a sub-question vertex to feed")
    p_rep = _principal_vertex(provider.root)
    link = Vertex(op=ASSIGN, detail=(anchor.subq.instance_id, consumer_slot, p_rep.subq.instance_id, provider_slot))
    link.add_child(provider.root)
    anchor.add_child(link)
    assignments = consumer.assignments + provider.assignments
    assignments.append((anchor.subq.instance_id, consumer_slot, p_rep.subq.instance_id, provider_slot))
    return CompositeQuestionTree(consumer.root, assignments)


def _check_slot(slot: str) -> None:
    if slot not in ("subject", "object"):
        raise ContractViolation(f"unknown slot {slot!r}")


def _principal_vertex(v: Vertex) -> Vertex:
    """The sub-question vertex whose subject stands for a tree's answers."""
    while not v.is_subquestion:
        v = v.children[0]
    return v


# ---------------------------------------------------------------------------
# grouping and assembly


def _subject_terms_equal(a: SubQuestion, b: SubQuestion) -> bool:
    ta, tb = a.triple.subject, b.triple.subject
    if isinstance(ta, Var) and isinstance(tb, Var):
        return ta == tb
    if isinstance(ta, Phrase) and isinstance(tb, Phrase):
        return ta.head == tb.head
    return False


def _theta(sent: ParsedSentence, a: SubQuestion, b: SubQuestion) -> str:
    """Union when a coordinating "or" separates the two spans, else intersection.

    Sub-questions sharing a subject overlap at the front, so the gap is taken
    between their object phrases when both have one.
    """
    span_a, span_b = a.span, b.span
    if isinstance(a.triple.object, Phrase) and isinstance(b.triple.object, Phrase):
        span_a, span_b = a.triple.object.span, b.triple.object.span
    first, second = sorted((span_a, span_b), key=lambda s: s.start)
    for i in range(first.end + 1, second.start):
        if sent.token(i).lemma.lower() == "or":
            return UNION
    return INTERSECT


def build_subtree(group: list[SubQuestion], sent: ParsedSentence) -> CompositeQuestionTree:
    """Assemble the sub-tree for sub-questions sharing one top depth."""
    if not group:
        raise DecompositionError("empty sub-question group")
    ordered = sorted(group, key=lambda q: (q.down_depth, q.span.start, q.instance_id))
    if len(ordered) == 1:
        return _single(ordered[0])

    remaining = list(ordered)
    tree: CompositeQuestionTree | None = None
    # A sub-question whose subject came from a sibling's variable consumes
    # that sibling's answers first.
    for q in list(remaining):
        if q.provider_id is None:
            continue
        provider = next((p for p in remaining if p.instance_id == q.provider_id), None)
        if provider is None:
            continue
        tree = concat_assign(_single(q), _single(provider), "subject", "subject")
        remaining.remove(q)
        remaining.remove(provider)
        break
    if tree is None:
        first, second = remaining[0], remaining[1]
        tree = concat(_single(first), _single(second), _theta(sent, first, second))
        remaining = remaining[2:]
    for q in remaining:
        rep = _principal_vertex(tree.root).subq
        tree = concat(tree, _single(q), _theta(sent, rep, q))
    return tree


def _link_anchor(tree: CompositeQuestionTree, provider_rep: SubQuestion) -> tuple[Vertex, str]:
    """Pick the consumer vertex and slot that the provider's answers fill."""
    p_subject = provider_rep.triple.subject

    def matches(term) -> bool:
        if isinstance(term, Var) and isinstance(p_subject, Var):
            return term == p_subject
        if isinstance(term, Phrase) and isinstance(p_subject, Phrase):
            return term.head == p_subject.head
        return False

    for v in tree.subquestion_vertices():
        if matches(v.subq.triple.object):
            return v, "object"
    for v in tree.subquestion_vertices():
        if matches(v.subq.triple.subject):
            return v, "subject"
    return tree.subquestion_vertices()[0], "object"


def build_cqtree(subqs: list[SubQuestion], sent: ParsedSentence) -> CompositeQuestionTree:
    """Build the full composite-question tree for one parsed question."""
    if not subqs:
        raise DecompositionError("no sub-questions to arrange")
    for q in subqs:
        q.top_depth, q.down_depth = trace_spt(q, sent.const_root)
    groups: dict[int, list[SubQuestion]] = {}
    for q in subqs:
        groups.setdefault(q.top_depth, []).append(q)
    depths = sorted(groups, reverse=True)

    cqt = build_subtree(groups[depths[0]], sent)
    for depth in depths[1:]:
        subtree = build_subtree(groups[depth], sent)
        rep = _principal_vertex(cqt.root).subq
        anchor, slot = _link_anchor(subtree, rep)
        cqt = concat_assign(subtree, cqt, slot, "subject", anchor)
    return _insert_functions(cqt)


def _insert_functions(tree: CompositeQuestionTree) -> CompositeQuestionTree:
    """Add function vertices: numeric filters per vertex, counting at the root."""
    def rewrite(v: Vertex) -> Vertex:
        v.children = [rewrite(c) for c in v.children]
        if v.is_subquestion and v.subq.qualifier is not None:
            wrapper = Vertex(op=FILTER, detail=v.subq.qualifier)
            wrapper.add_child(v)
            return wrapper
        return v

    root = rewrite(tree.root)
    if any(q.wants_count for q in tree.subquestions()):
        wrapper = Vertex(op=COUNT)
        wrapper.add_child(root)
        root = wrapper
    return CompositeQuestionTree(root, tree.assignments)


def decompose(triples: list[TriplePattern], sent: ParsedSentence, genitive_key: int = 36) -> CompositeQuestionTree:
    return build_cqtree(generate_subquestions(triples, genitive_key), sent)


# ---------------------------------------------------------------------------
# checks and serialization


def check_tree(tree: CompositeQuestionTree, expected_subquestions: int | None = None) -> None:
    """Raise on any structural violation; used by tests and the CLI."""
    seen: set[int] = set()
    for v in tree.walk():
        if id(v) in seen:
            raise ContractViolation("tree contains a shared vertex")
        seen.add(id(v))
        if len(v.children) > 2:
            raise ContractViolation("vertex has more than two children")
        if not v.children and not v.is_subquestion:
            raise ContractViolation("leaf vertex is not a sub-question")
    if expected_subquestions is not None:
        count = len(tree.subquestions())
        if count != expected_subquestions:
            raise ContractViolation(f"expected {expected_subquestions} sub-question vertices, found {count}")


def tree_to_json(tree: CompositeQuestionTree) -> dict:
    ids: dict[int, int] = {}
    order: list[Vertex] = []

    def number(v: Vertex) -> None:
        ids[id(v)] = len(order)
        order.append(v)
        for c in v.children:
            number(c)

    number(tree.root)
    vertices = []
    for v in order:
        entry: dict = {"id": ids[id(v)], "children": [ids[id(c)] for c in v.children]}
        if v.is_subquestion:
            s, p, o = v.subq.render()
            entry["kind"] = "subquestion"
            entry["triple"] = {"subject": s, "predicate": p, "object": o}
            entry["template"] = v.subq.triple.template_id
            entry["instance"] = v.subq.instance_id
            entry["depths"] = [v.subq.top_depth, v.subq.down_depth]
        else:
            entry["kind"] = "operator"
            entry["operator"] = v.op
            entry["symbol"] = OPERATOR_SYMBOLS[v.op]
            if v.detail is not None:
                entry["detail"] = list(v.detail)
        vertices.append(entry)
    return {"root": 0, "vertices": vertices}
