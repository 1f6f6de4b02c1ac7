"""Turning a composite-question tree into an executable query plan.

Each sub-question vertex expands into a ranked candidate list (its key
triple first, then the sibling rows of the same match, then synonym
variants).  Terms are linked against the entity lexicon; class-valued
objects become typed variables.  Assignment and set-operator edges get a
shared variable wired into both sides.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from .decompose import ASSIGN, COUNT, FILTER, INTERSECT, UNION, CompositeQuestionTree, SubQuestion, Vertex
from .errors import PlanningError
from .extract import Phrase, Term, TriplePattern, Var
from .lexicons import EntityLexicon, SynonymLexicon, normalize

logger = logging.getLogger(__name__)

TYPE_OF = "type-of"


@dataclass
class QueryVertex:
    origin: SubQuestion
    candidates: list[TriplePattern] = field(default_factory=list)
    bindings: dict[str, str] = field(default_factory=dict)
    type_constraints: list[tuple[Var, str, str]] = field(default_factory=list)

    @property
    def instance_id(self) -> int:
        return self.origin.instance_id


@dataclass
class QueryPlan:
    tree: CompositeQuestionTree
    vertices: dict[int, QueryVertex]  # keyed by pattern-instance id
    joins: list[dict] = field(default_factory=list)

    def vertex_for(self, subq: SubQuestion) -> QueryVertex:
        return self.vertices[subq.instance_id]


def _terms_equal(a: Term, b: Term) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        return a == b
    if isinstance(a, Phrase) and isinstance(b, Phrase):
        return a.head == b.head or normalize(a.text) == normalize(b.text)
    return False


def _replace_term(tp: TriplePattern, old: Term, new: Term) -> TriplePattern:
    changed = tp
    if _terms_equal(tp.subject, old):
        changed = replace(changed, subject=new)
    if _terms_equal(changed.predicate, old):
        changed = replace(changed, predicate=new)
    if _terms_equal(changed.object, old):
        changed = replace(changed, object=new)
    return changed


def expand_vertex(q: SubQuestion, all_triples: list[TriplePattern]) -> QueryVertex:
    """Candidate list: the sub-question's triple, then its instance siblings."""
    siblings = sorted(
        (t for t in all_triples if t.instance_id == q.instance_id),
        key=lambda t: t.template_id,
    )
    # carry any subject rewrite done during decomposition into the siblings
    original_subject = next(
        (x.subject for x in siblings if x.template_id == q.triple.template_id), None
    )
    rewritten = original_subject is not None and not _terms_equal(original_subject, q.triple.subject)
    candidates = [q.triple]
    for t in siblings:
        if t.template_id == q.triple.template_id:
            continue
        if rewritten:
            t = _replace_term(t, original_subject, q.triple.subject)
        candidates.append(t)
    return QueryVertex(origin=q, candidates=candidates)


def link_entities(v: QueryVertex, lexicon: EntityLexicon) -> QueryVertex:
    """Bind lexicon matches; class-valued objects become typed variables."""
    for term in v.candidates[0].terms():
        if isinstance(term, Phrase):
            hit = lexicon.lookup(term.text)
            if hit is not None:
                v.bindings[term.text] = hit[0]
    obj = v.candidates[0].object
    if isinstance(obj, Phrase):
        hit = lexicon.lookup(obj.text)
        if hit is not None and hit[1] == "class":
            var = Var("entity-object", f"c{v.instance_id}", v.instance_id)
            v.candidates = [_replace_term(t, obj, var) for t in v.candidates]
            v.type_constraints.append((var, TYPE_OF, hit[0]))
    return v


def expand_predicates(v: QueryVertex, synlex: SynonymLexicon) -> QueryVertex:
    """Append candidate variants whose predicate is a synonym of the original."""
    variants = []
    for t in v.candidates:
        pred = t.predicate
        if not isinstance(pred, Phrase):
            continue
        if pred.text in v.bindings:
            continue
        synonyms = synlex.synonyms(pred.text)
        if not synonyms:
            logger.debug("no synonyms for predicate %r", pred.text)
            continue
        for syn in synonyms:
            variants.append(replace(t, predicate=Phrase(pred.kind, pred.span, syn, pred.head)))
    v.candidates.extend(variants)
    return v


def _joinable(a: Term, b: Term) -> bool:
    if isinstance(a, Var) or isinstance(b, Var):
        return True
    return _terms_equal(a, b)


def _slot_term(qv: QueryVertex, slot: str) -> Term:
    t = qv.candidates[0]
    return t.subject if slot == "subject" else t.object


def _wire(qv: QueryVertex, slot_term: Term, var: Var, lexicon: EntityLexicon) -> None:
    if isinstance(slot_term, Var) and slot_term == var:
        return
    qv.candidates = [_replace_term(t, slot_term, var) for t in qv.candidates]
    if isinstance(slot_term, Phrase):
        hit = lexicon.lookup(slot_term.text)
        if hit is not None and hit[1] == "class":
            constraint = (var, TYPE_OF, hit[0])
            if constraint not in qv.type_constraints:
                qv.type_constraints.append(constraint)


def connect_plan(tree: CompositeQuestionTree, vertices: dict[int, QueryVertex], lexicon: EntityLexicon) -> QueryPlan:
    """Introduce one shared variable per operator edge, recording the joint."""
    plan = QueryPlan(tree=tree, vertices=vertices)
    fresh = [0]

    def next_var() -> Var:
        fresh[0] += 1
        return Var("entity-subject", f"j{fresh[0]}")

    def shared_var(a: Term, b: Term) -> Var:
        if isinstance(a, Var):
            return a
        if isinstance(b, Var):
            return b
        return next_var()

    for v in tree.walk():
        if v.op == ASSIGN:
            consumer_id, c_slot, provider_id, p_slot = v.detail
            consumer, provider = vertices[consumer_id], vertices[provider_id]
            c_term = _slot_term(consumer, c_slot)
            p_term = _slot_term(provider, p_slot)
            if not _joinable(c_term, p_term):
                raise PlanningError(
                    f"no joinable slot pair between instances {consumer_id} and {provider_id}: "
                    f"{c_term.text!r} vs {p_term.text!r}"
                )
            var = shared_var(c_term, p_term)
            _wire(consumer, c_term, var, lexicon)
            _wire(provider, p_term, var, lexicon)
            plan.joins.append(
                {
                    "consumer": consumer_id,
                    "consumer_slot": c_slot,
                    "provider": provider_id,
                    "provider_slot": p_slot,
                    "kind": f"{c_slot}-{p_slot}",
                    "var": var.text,
                }
            )
        elif v.op in (INTERSECT, UNION):
            reps = [_principal(c) for c in v.children]
            if len(reps) == 2:
                a, b = vertices[reps[0].instance_id], vertices[reps[1].instance_id]
                a_term, b_term = _slot_term(a, "subject"), _slot_term(b, "subject")
                if not _joinable(a_term, b_term):
                    raise PlanningError(
                        f"set operator joins need a shared subject between instances "
                        f"{a.instance_id} and {b.instance_id}"
                    )
                var = shared_var(a_term, b_term)
                _wire(a, a_term, var, lexicon)
                _wire(b, b_term, var, lexicon)
                plan.joins.append(
                    {
                        "consumer": a.instance_id,
                        "consumer_slot": "subject",
                        "provider": b.instance_id,
                        "provider_slot": "subject",
                        "kind": "subject-subject",
                        "var": var.text,
                    }
                )
    return plan


def _principal(v: Vertex) -> SubQuestion:
    while not v.is_subquestion:
        v = v.children[0]
    return v.subq


def build_plan(
    tree: CompositeQuestionTree,
    all_triples: list[TriplePattern],
    lexicon: EntityLexicon,
    synlex: SynonymLexicon,
) -> QueryPlan:
    vertices: dict[int, QueryVertex] = {}
    for subq in tree.subquestions():
        qv = expand_vertex(subq, all_triples)
        link_entities(qv, lexicon)
        expand_predicates(qv, synlex)
        vertices[subq.instance_id] = qv
    return connect_plan(tree, vertices, lexicon)


def plan_to_json(plan: QueryPlan) -> dict:
    from .decompose import tree_to_json

    def term_json(t: Term) -> dict:
        if isinstance(t, Var):
            return {"var": t.text, "kind": t.kind}
        return {"text": t.text, "span": [t.span.start, t.span.end]}

    vertices = {}
    for iid in sorted(plan.vertices):
        qv = plan.vertices[iid]
        vertices[str(iid)] = {
            "candidates": [
                {
                    "template": t.template_id,
                    "subject": term_json(t.subject),
                    "predicate": term_json(t.predicate),
                    "object": term_json(t.object),
                }
                for t in qv.candidates
            ],
            "bindings": dict(sorted(qv.bindings.items())),
            "type_constraints": [[var.text, pred, cls] for var, pred, cls in qv.type_constraints],
        }
    return {"tree": tree_to_json(plan.tree), "vertices": vertices, "joins": plan.joins}
