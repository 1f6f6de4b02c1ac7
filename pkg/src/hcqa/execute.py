"""Hybrid plan execution over a local triple store and a parsed text corpus.

Every sub-question vertex is evaluated against both sources: the knowledge
graph by identifier match, the corpus by running relation extraction over
its passages and matching the derived triples lexically.  Rows carry
provenance so a final answer can cite which source produced it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .decompose import ASSIGN, COUNT, FILTER, INTERSECT, UNION, Vertex
from .errors import ExecutionError, ParseError
from .extract import Phrase, TriplePattern, Var, extract_instances
from .ingest import ParsedSentence
from .lexicons import Lexicons, normalize
from .querygen import QueryPlan, QueryVertex
from .settings import SettingSet

logger = logging.getLogger(__name__)

KG_SOURCE = "kg"


def text_source(passage_id: str) -> str:
    return f"text:{passage_id}"


class TripleStore:
    """In-memory fact set with subject/predicate/object indexes."""

    def __init__(self, triples=()):
        self.triples: set[tuple[str, str, str]] = set()
        self._by_s: dict[str, list[tuple[str, str, str]]] = {}
        self._by_p: dict[str, list[tuple[str, str, str]]] = {}
        self._by_o: dict[str, list[tuple[str, str, str]]] = {}
        for t in triples:
            self.add(*t)

    def add(self, s: str, p: str, o: str) -> None:
        t = (s, p, o)
        if t in self.triples:
            return
        self.triples.add(t)
        self._by_s.setdefault(normalize(s), []).append(t)
        self._by_p.setdefault(normalize(p), []).append(t)
        self._by_o.setdefault(normalize(o), []).append(t)

    def __len__(self) -> int:
        return len(self.triples)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "TripleStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ParseError("expected subject<TAB>predicate<TAB>object", line=lineno)
                store.add(*parts)
        return store

    def match(self, s: str | None, p: str | None, o: str | None):
        """Triples whose fixed positions equal the given normalized values."""
        pools = []
        if s is not None:
            pools.append(self._by_s.get(s, []))
        if p is not None:
            pools.append(self._by_p.get(p, []))
        if o is not None:
            pools.append(self._by_o.get(o, []))
        candidates = min(pools, key=len) if pools else self.triples
        for t in candidates:
            if s is not None and normalize(t[0]) != s:
                continue
            if p is not None and normalize(t[1]) != p:
                continue
            if o is not None and normalize(t[2]) != o:
                continue
            yield t

    def has(self, s: str, p: str, o: str) -> bool:
        for _ in self.match(normalize(s), normalize(p), normalize(o)):
            return True
        return False


class TextIndex:
    """Derives triples from pre-parsed passages by running the extractor."""

    def __init__(self, passages: dict[str, list[ParsedSentence]], settings: SettingSet, lexicons: Lexicons):
        self.passages = dict(sorted(passages.items()))
        self.settings = settings
        self.lexicons = lexicons
        self._facts: list[tuple[str, str, str, str]] | None = None

    def facts(self) -> list[tuple[str, str, str, str]]:
        """(subject, predicate, object, passage-id) with phrase-only terms."""
        if self._facts is None:
            out = []
            for pid, sents in self.passages.items():
                for sent in sents:
                    for inst in extract_instances(sent, self.settings, self.lexicons):
                        seen = set()
                        for tp in inst.triples:
                            terms = tp.terms()
                            if not all(isinstance(t, Phrase) for t in terms):
                                continue
                            fact = tuple(t.text for t in terms)
                            if fact in seen:
                                continue
                            seen.add(fact)
                            out.append((*fact, pid))
            self._facts = out
        return self._facts


Row = tuple[tuple[tuple[str, str], ...], frozenset]


@dataclass
class AnswerSet:
    """Variable bindings with per-row provenance.

    Rows are keyed by normalized values, so the same entity arriving from
    the store and from text collapses into one row with merged provenance.
    """

    variables: tuple[str, ...]
    _rows: dict[tuple, tuple[dict, frozenset]] = field(default_factory=dict)

    @staticmethod
    def _key(variables: tuple[str, ...], bindings: dict) -> tuple:
        return tuple((v, normalize(str(bindings[v]))) for v in variables)

    def add(self, bindings: dict, provenance: frozenset) -> None:
        key = self._key(self.variables, bindings)
        if key in self._rows:
            old_bind, old_prov = self._rows[key]
            self._rows[key] = (old_bind, old_prov | provenance)
        else:
            self._rows[key] = (dict(bindings), frozenset(provenance))

    def rows(self) -> list[tuple[dict, frozenset]]:
        return [self._rows[k] for k in sorted(self._rows)]

    def __len__(self) -> int:
        return len(self._rows)

    def __bool__(self) -> bool:
        return bool(self._rows)

    def values(self, var: str) -> list[str]:
        return [bind[var] for bind, _ in self.rows()]

    def project(self, variables: tuple[str, ...]) -> "AnswerSet":
        out = AnswerSet(variables)
        for bind, prov in self.rows():
            out.add({v: bind[v] for v in variables}, prov)
        return out

    def canonical(self, with_provenance: bool = False):
        """Hashable form for equality checks in tests."""
        if with_provenance:
            return (self.variables, frozenset((k, prov) for k, (_, prov) in self._rows.items()))
        return (self.variables, frozenset(self._rows))


def apply_operator(op: str, left: AnswerSet, right: AnswerSet | None = None, detail=None) -> AnswerSet:
    if op == COUNT:
        prov = frozenset().union(*[p for _, p in left.rows()]) if left else frozenset()
        out = AnswerSet(("?n",))
        out.add({"?n": str(len(left))}, prov)
        return out
    if op == FILTER:
        return _apply_filter(left, detail)
    if op not in (INTERSECT, UNION):
        raise ExecutionError(f"unknown operator {op!r}")
    if right is None:
        raise ExecutionError(f"{op} needs two answer sets")
    common = tuple(v for v in left.variables if v in right.variables)
    if not common:
        raise ExecutionError(
            f"no shared variables between answer sets {left.variables} and {right.variables}"
        )
    lp, rp = left.project(common), right.project(common)
    out = AnswerSet(common)
    if op == UNION:
        for bind, prov in lp.rows():
            out.add(bind, prov)
        for bind, prov in rp.rows():
            out.add(bind, prov)
        return out
    right_keys = {AnswerSet._key(common, bind): prov for bind, prov in rp.rows()}
    for bind, prov in lp.rows():
        key = AnswerSet._key(common, bind)
        if key in right_keys:
            out.add(bind, prov | right_keys[key])
    return out


def _numeric(value: str) -> float | None:
    try:
        return float(str(value).replace(",", ""))
    except ValueError:
        return None


def _apply_filter(answers: AnswerSet, qualifier) -> AnswerSet:
    if qualifier is None:
        return answers
    mode = qualifier[0]
    num_vars = [v for v in answers.variables if v.lstrip("?").startswith("n")]
    if not num_vars:
        return answers
    out = AnswerSet(answers.variables)
    if mode == "compare":
        _, direction, threshold = qualifier
        for bind, prov in answers.rows():
            val = _numeric(bind[num_vars[0]])
            if val is None:
                logger.debug("dropping non-numeric row %r under filter", bind)
                continue
            if _compare(direction, val, float(threshold)):
                out.add(bind, prov)
        return out
    if mode == "compare-pair":
        _, direction = qualifier
        for bind, prov in answers.rows():
            vals = [_numeric(bind[v]) for v in num_vars[:2]]
            if len(vals) < 2 or any(v is None for v in vals):
                out.add(bind, prov)
                continue
            if _compare(direction, vals[0], vals[1]):
                out.add(bind, prov)
        return out
    if mode == "extremum":
        _, direction = qualifier
        best = None
        for bind, _ in answers.rows():
            val = _numeric(bind[num_vars[0]])
            if val is None:
                continue
            if best is None or (val > best if direction == "max" else val < best):
                best = val
        for bind, prov in answers.rows():
            if _numeric(bind[num_vars[0]]) == best and best is not None:
                out.add(bind, prov)
        return out
    raise ExecutionError(f"unknown filter qualifier {qualifier!r}")


def _compare(direction: str, a: float, b: float) -> bool:
    if direction == "gt":
        return a > b
    if direction == "lt":
        return a < b
    if direction == "eq":
        return a == b
    raise ExecutionError(f"unknown comparison {direction!r}")


class Executor:
    def __init__(self, plan: QueryPlan, store: TripleStore, index: TextIndex | None = None):
        self.plan = plan
        self.store = store
        self.index = index

    def run(self) -> AnswerSet:
        return self._eval(self.plan.tree.root)

    def _eval(self, v: Vertex) -> AnswerSet:
        if v.is_subquestion:
            incoming = []
            for child in v.children:
                if child.op != ASSIGN:
                    raise ExecutionError("sub-question vertices may only hold assignment children")
                incoming.append(self._eval(child.children[0]))
            return self._eval_subquestion(self.plan.vertex_for(v.subq), incoming)
        if v.op == COUNT:
            return apply_operator(COUNT, self._eval(v.children[0]))
        if v.op == FILTER:
            return apply_operator(FILTER, self._eval(v.children[0]), detail=v.detail)
        if v.op in (INTERSECT, UNION):
            left = self._eval(v.children[0])
            right = self._eval(v.children[1])
            return apply_operator(v.op, left, right)
        raise ExecutionError(f"cannot evaluate vertex with operator {v.op!r}")

    # -- sub-question evaluation ------------------------------------------

    def _eval_subquestion(self, qv: QueryVertex, incoming: list[AnswerSet]) -> AnswerSet:
        contexts = [({}, frozenset())]
        for answers in incoming:
            new_contexts = []
            for bind, prov in contexts:
                for in_bind, in_prov in answers.rows():
                    merged = dict(bind)
                    merged.update(in_bind)
                    new_contexts.append((merged, prov | in_prov))
            contexts = new_contexts
        if not contexts:
            return AnswerSet(self._vertex_variables(qv))

        variables = self._vertex_variables(qv)
        for candidate in qv.candidates:
            result = AnswerSet(variables)
            for ctx_bind, ctx_prov in contexts:
                for bind, prov in self._match_candidate(qv, candidate, ctx_bind):
                    merged = dict(ctx_bind)
                    merged.update(bind)
                    row = {v: merged[v] for v in variables if v in merged}
                    if len(row) != len(variables):
                        continue
                    result.add(row, prov | ctx_prov)
            if result:
                return result
        return AnswerSet(variables)

    def _vertex_variables(self, qv: QueryVertex) -> tuple[str, ...]:
        out = []
        for term in qv.candidates[0].terms():
            if isinstance(term, Var) and term.text not in out:
                out.append(term.text)
        return tuple(out)

    def _match_candidate(self, qv: QueryVertex, candidate: TriplePattern, ctx: dict):
        """Rows from the store and the text index for one candidate triple."""
        fixed, var_slots = self._resolve_terms(qv, candidate, ctx)
        yield from self._match_store(qv, fixed, var_slots, ctx)
        if self.index is not None:
            yield from self._match_text(qv, fixed, var_slots, ctx)

    def _resolve_terms(self, qv: QueryVertex, candidate: TriplePattern, ctx: dict):
        fixed: list[str | None] = []
        var_slots: list[str | None] = []
        for term in candidate.terms():
            if isinstance(term, Var):
                if term.text in ctx:
                    fixed.append(normalize(str(ctx[term.text])))
                    var_slots.append(None)
                else:
                    fixed.append(None)
                    var_slots.append(term.text)
            else:
                linked = qv.bindings.get(term.text, term.text)
                fixed.append(normalize(linked))
                var_slots.append(None)
        return fixed, var_slots

    def _match_store(self, qv, fixed, var_slots, ctx):
        for triple in self.store.match(*fixed):
            bind = {}
            ok = True
            for value, slot in zip(triple, var_slots):
                if slot is None:
                    continue
                if slot in bind and normalize(bind[slot]) != normalize(value):
                    ok = False
                    break
                bind[slot] = value
            if ok and self._types_ok(qv, {**ctx, **bind}):
                yield bind, frozenset({KG_SOURCE})

    def _match_text(self, qv, fixed, var_slots, ctx):
        for s, p, o, pid in self.index.facts():
            values = (s, p, o)
            bind = {}
            ok = True
            for value, want, slot in zip(values, fixed, var_slots):
                if want is not None:
                    if normalize(value) != want:
                        ok = False
                        break
                elif slot is not None:
                    if slot in bind and normalize(bind[slot]) != normalize(value):
                        ok = False
                        break
                    bind[slot] = value
            if ok and self._types_ok(qv, {**ctx, **bind}):
                yield bind, frozenset({text_source(pid)})

    def _types_ok(self, qv: QueryVertex, bind: dict) -> bool:
        for var, pred, cls in qv.type_constraints:
            value = bind.get(var.text)
            if value is None:
                continue
            if not self.store.has(value, pred, cls):
                return False
        return True


def answer(plan: QueryPlan, store: TripleStore, index: TextIndex | None = None) -> AnswerSet:
    """Evaluate the plan bottom-up and return the root answer set."""
    return Executor(plan, store, index).run()


def answers_to_json(answers: AnswerSet) -> dict:
    return {
        "variables": list(answers.variables),
        "rows": [
            {"bindings": bind, "provenance": sorted(prov)}
            for bind, prov in answers.rows()
        ],
    }
