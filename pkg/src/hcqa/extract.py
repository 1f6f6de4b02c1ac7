"""Relation extraction over pre-parsed sentences.

The extractor scans the dependency tree for fifteen linguistic patterns and
instantiates the template row of each match (see templates.py).  A pattern
instance keeps its triples together with the span it matched, which later
stages use for ordering, decomposition and candidate ranking.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from . import templates
from .ingest import EntityMention, ParsedSentence, Span, Token
from .lexicons import Lexicons
from .phrases import (
    AdjectiveClass,
    Phrase,
    adjective_phrase,
    attach_adverb_modifiers,
    classify_adjective,
    detokenize,
    expression_spans,
    full_noun_phrase,
    is_copular,
    make_verb_phrase,
    noun_phrase,
)
from .settings import SettingSet

logger = logging.getLogger(__name__)

SUBJECT_LABELS = ("nsubj", "csubj")
OBJECT_LABELS = ("obj", "dobj", "iobj")
CORE_ARG_LABELS = ("obj", "dobj", "nsubj", "xcomp", "ccomp", "attr")
RELATIVE_PRONOUNS = {"who", "whom", "which", "that", "whose"}
PLURAL_POSSESSIVES = {"their", "our"}
SINGULAR_POSSESSIVES = {"his", "her", "its", "my"}
# Quantity adjectives whose comparative points downward (smaller than = less).
DOWNWARD_ADJECTIVES = {"small", "short", "narrow", "low", "young", "slow", "light", "shallow", "cheap"}

PATTERN_ORDER = {p: i for i, p in enumerate(templates.PATTERN_ROWS)}


@dataclass(frozen=True)
class Var:
    """A placeholder term; identity includes the pattern-instance scope."""

    kind: str  # entity-subject | entity-object | predicate | numeric
    label: str  # s, o, p, n, n1, n2
    scope: int = 0

    @property
    def text(self) -> str:
        return "?" + self.label


Term = Phrase | Var


def term_text(term: Term) -> str:
    return term.text


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term
    template_id: int
    category: str
    is_key: bool
    source_span: Span
    instance_id: int = 0
    qualifier: tuple | None = None  # numeric comparison carried by T42-T46

    def terms(self) -> tuple[Term, Term, Term]:
        return (self.subject, self.predicate, self.object)

    def render(self) -> tuple[str, str, str]:
        return (self.subject.text, self.predicate.text, self.object.text)


@dataclass
class PatternInstance:
    instance_id: int
    pattern: str  # P1 .. P15
    category: str
    span: Span
    triples: list[TriplePattern] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def key_triples(self) -> list[TriplePattern]:
        return [t for t in self.triples if t.is_key]

    def display(self) -> tuple[str, str, str] | None:
        """Human-readable relation string, used for corpus-style output."""
        return self.meta.get("display")


@dataclass
class _Clause:
    verb: Token  # the copula itself for copular clauses
    copular: bool
    pred: Token | None  # predicate noun/adjective (copular only)
    subj: Token | None
    subj_is_possessed: bool
    possessive: Token | None  # PRP$/WP$ on the subject, if any
    obj: Token | None
    promoted_prep: str | None  # preposition lemma when obj came from an oblique
    obls: list[tuple[str, Token]]
    obls_all: list[tuple[str, Token]]
    anchor: Token  # token whose dep_label tells relative-clause attachment


class _Match:
    """A raw pattern match waiting for its instance id."""

    def __init__(self, pattern: str, span: Span, build, meta: dict | None = None, order: int = 0):
        self.pattern = pattern
        self.span = span
        self.build = build  # (instance_id) -> list[TriplePattern]
        self.meta = meta or {}
        self.order = order


class Extractor:
    def __init__(self, sent: ParsedSentence, settings: SettingSet, lexicons: Lexicons):
        self.sent = sent
        self.settings = settings
        self.lexicons = lexicons
        self._np_cache: dict[int, Phrase] = {}
        self._expr_spans = expression_spans(sent, lexicons) if "B" in settings else []
        self.matches: list[_Match] = []
        self._clause_verbs: set[int] = set()

    # -- phrase helpers ----------------------------------------------------

    def np(self, tok: Token) -> Phrase:
        got = self._np_cache.get(tok.index)
        if got is None:
            got = noun_phrase(self.sent, tok, self.settings, self.lexicons, self._expr_spans)
            self._np_cache[tok.index] = got
        return got

    def vp(self, verb: Token) -> Phrase:
        return attach_adverb_modifiers(make_verb_phrase(self.sent, verb), self.sent)

    def prep_phrase(self, tok: Token) -> Phrase:
        return Phrase("PREP", Span(tok.index, tok.index), tok.surface, tok.index)

    def is_definite(self, phrase: Phrase) -> bool:
        """Entity mention, number or quoted material."""
        sent = self.sent
        m = sent.mention_covering(phrase.span)
        if m is not None and m.kind in ("entity", "number"):
            return True
        if sent.quoted_covering(phrase.span) is not None:
            return True
        head = sent.token(phrase.head)
        if head.pos == "CD":
            return True
        if any(c.pos == "CD" for c in sent.children(head.index, "nummod")):
            return True
        toks = [sent.token(i) for i in range(phrase.span.start, phrase.span.end + 1)]
        return bool(toks) and all(t.pos in ("NNP", "NNPS") for t in toks)

    def numeric_value(self, tok: Token) -> float | None:
        def parse(t: Token) -> float | None:
            try:
                return float(t.surface.replace(",", ""))
            except ValueError:
                return None

        if tok.pos == "CD":
            return parse(tok)
        for child in self.sent.children(tok.index, "nummod"):
            if child.pos == "CD":
                return parse(child)
        return None

    # -- clause discovery --------------------------------------------------

    def find_clauses(self) -> list[_Clause]:
        clauses = []
        sent = self.sent
        for tok in sent.tokens:
            cops = sent.children(tok.index, "cop")
            if cops and not tok.is_verb:
                subj = self._first_child(tok, SUBJECT_LABELS)
                obls = self._obliques(tok)
                clauses.append(
                    self._make_clause(verb=cops[0], copular=True, pred=tok, subj=subj, obj=None, obls=obls, anchor=tok)
                )
                self._clause_verbs.add(cops[0].index)
                continue
            if not tok.is_verb or tok.pos == "MD":
                continue
            if tok.dep_label in ("aux", "aux:pass", "cop"):
                continue
            subj = self._first_child(tok, SUBJECT_LABELS)
            if subj is None and tok.dep_label == "conj":
                subj = self._conjunct_subject(tok)
            obj = self._first_child(tok, OBJECT_LABELS)
            obls = self._obliques(tok)
            if subj is None and obj is None:
                continue
            copular = is_copular(tok, sent, self.lexicons)
            if copular and obj is None and not obls:
                continue
            clauses.append(
                self._make_clause(verb=tok, copular=False, pred=None, subj=subj, obj=obj, obls=obls, anchor=tok)
            )
            self._clause_verbs.add(tok.index)
        return clauses

    def _make_clause(self, verb, copular, pred, subj, obj, obls, anchor) -> _Clause:
        promoted = None
        obls_all = list(obls)
        if not copular and obj is None and obls:
            promoted, obj = obls[0]
            obls = obls[1:]
        possessive = None
        possessed = False
        if subj is not None:
            resolved = self._resolve_relative(subj, anchor)
            if resolved is not None:
                subj = resolved
            for dep in self.sent.children(subj.index, "nmod"):
                if dep.is_pronoun_possessive:
                    possessive = dep
                    possessed = True
        return _Clause(
            verb=verb,
            copular=copular,
            pred=pred,
            subj=subj,
            subj_is_possessed=possessed,
            possessive=possessive,
            obj=obj,
            promoted_prep=promoted,
            obls=obls,
            obls_all=obls_all,
            anchor=anchor,
        )

    def _conjunct_subject(self, verb: Token) -> Token | None:
        """Subject shared from the first conjunct, as in "X did A and did B"."""
        cur = verb
        for _ in range(len(self.sent.tokens)):
            if cur.dep_label != "conj" or not cur.dep_head:
                break
            cur = self.sent.token(cur.dep_head)
        if cur is not verb:
            return self._first_child(cur, SUBJECT_LABELS)
        return None

    def _first_child(self, tok: Token, labels) -> Token | None:
        kids = self.sent.children(tok.index, *labels)
        return kids[0] if kids else None

    def _obliques(self, tok: Token) -> list[tuple[str, Token]]:
        """Case-marked dependents of a predicate, with their preposition."""
        out = []
        for dep in self.sent.children(tok.index, "obl", "nmod"):
            case = self._first_child(dep, ("case",))
            if case is None or case.pos == "POS":
                continue
            out.append((case.lemma, dep))
        return out

    def _resolve_relative(self, subj: Token, anchor: Token) -> Token | None:
        if subj.lemma.lower() not in RELATIVE_PRONOUNS and subj.pos not in ("WP", "WDT"):
            return None
        if anchor.dep_label.startswith("acl") and anchor.dep_head != 0:
            return self.sent.token(anchor.dep_head)
        return None

    def _resolve_possessive(self, pron: Token, possessed: Token) -> Phrase | None:
        """Referent of a possessive pronoun as a phrase."""
        sent = self.sent
        if pron.pos == "WP$":
            cur = possessed
            for _ in range(len(sent.tokens)):
                if cur.dep_label.startswith("acl") and cur.dep_head != 0:
                    return self.np(sent.token(cur.dep_head))
                if cur.dep_head == 0:
                    break
                cur = sent.token(cur.dep_head)
        want = None
        lemma = pron.lemma.lower()
        if lemma in SINGULAR_POSSESSIVES:
            want = "singular"
        elif lemma in PLURAL_POSSESSIVES:
            want = "plural"
        candidates = [
            t
            for t in sent.tokens
            if t.index < pron.index and t.is_noun and t.pos not in ("PRP", "WP")
        ]
        exclude = self.np(possessed).span
        candidates = [t for t in candidates if not (exclude.start <= t.index <= exclude.end)]

        def number_of(t: Token) -> str:
            return "plural" if t.pos in ("NNS", "NNPS") else "singular"

        if pron.pos == "WP$" and possessed.dep_head:
            siblings = [t for t in candidates if t.dep_head == possessed.dep_head]
            for t in reversed(siblings):
                if want is None or number_of(t) == want:
                    return self.np(t)
        for t in reversed(candidates):
            if want is None or number_of(t) == want:
                return self.np(t)
        if candidates:
            return self.np(candidates[-1])
        logger.debug("possessive %r in %s has no resolvable referent", pron.surface, sent.sent_id or "<sentence>")
        return None

    # -- emission helpers --------------------------------------------------

    def add(self, pattern: str, span: Span, build, meta: dict | None = None) -> None:
        self.matches.append(_Match(pattern, span, build, meta, order=PATTERN_ORDER[pattern]))

    @staticmethod
    def _span_over(*parts: Phrase) -> Span:
        start = min(p.span.start for p in parts)
        end = max(p.span.end for p in parts)
        return Span(start, end)

    # -- clause patterns (P1 - P7) ----------------------------------------

    def run_clause_patterns(self, clauses: list[_Clause]) -> None:
        for clause in clauses:
            if self._try_p1(clause):
                continue
            if self._try_p2(clause):
                continue
            if clause.copular and clause.pred is not None and clause.pred.pos.startswith("JJ"):
                continue
            if clause.subj_is_possessed and clause.subj is not None:
                self._emit_p6_p7(clause)
                continue
            if clause.copular and clause.pred is not None and self._pred_mods(clause):
                self._emit_p3(clause)
                continue
            if not clause.copular and clause.obj is not None and clause.obls:
                self._emit_p4(clause)
                continue
            self._emit_p5(clause)

    def _pred_mods(self, clause: _Clause) -> list[tuple[str, Token]]:
        return clause.obls if clause.copular else []

    def _how_many_noun(self) -> Token | None:
        sent = self.sent
        for tok in sent.tokens:
            if tok.lemma.lower() != "how" or tok.index >= len(sent.tokens):
                continue
            nxt = sent.token(tok.index + 1)
            if nxt.lemma.lower() != "many":
                continue
            head = sent.token(nxt.dep_head) if nxt.dep_head else None
            if head is not None and head.is_noun:
                return head
        return None

    def _try_p1(self, clause: _Clause) -> bool:
        hm = self._how_many_noun()
        if hm is None:
            return False
        if clause.obj is not None and clause.obj.index == hm.index and clause.subj is not None:
            other = clause.subj
        elif clause.subj is not None and clause.subj.index == hm.index and clause.obj is not None:
            other = clause.obj
        else:
            return False
        np1, np2 = self.np(hm), self.np(other)
        vp = self.vp(clause.verb)
        span = self._span_over(np1, np2, vp)

        def build(iid: int) -> list[TriplePattern]:
            n = Var("numeric", "n", iid)
            o = Var("entity-object", "o", iid)
            s = Var("entity-subject", "s", iid)
            return [
                self._t(1, np2, np1, n, span, iid),
                self._t(2, np2, np1, o, span, iid),
                self._t(3, s, np1, np2, span, iid),
                self._t(4, np2, vp, np1, span, iid),
                self._t(5, np1, vp, np2, span, iid),
            ]

        self.add("P1", span, build, meta={"count": True})
        return True

    def _try_p2(self, clause: _Clause) -> bool:
        if not (clause.copular and clause.pred is not None):
            return False
        pred = clause.pred
        if not pred.pos.startswith("JJ") and pred.upos != "ADJ":
            return False
        hows = [d for d in self.sent.children(pred.index, "advmod") if d.lemma.lower() == "how"]
        if not hows or clause.subj is None:
            return False
        np1 = self.np(clause.subj)
        adjp = adjective_phrase(self.sent, pred)
        span = self._span_over(np1, adjp)

        def build(iid: int) -> list[TriplePattern]:
            o = Var("entity-object", "o", iid)
            return [self._t(6, np1, adjp, o, span, iid)]

        self.add("P2", span, build)
        return True

    def _emit_p3(self, clause: _Clause) -> None:
        np1 = self.np(clause.subj) if clause.subj is not None else None
        if np1 is None:
            return
        np2 = self.np(clause.pred)
        vp = self.vp(clause.verb)
        preps = [(p, self.np(t)) for p, t in self._pred_mods(clause)]
        span = self._span_over(np1, np2, *[n for _, n in preps])

        def build(iid: int) -> list[TriplePattern]:
            out = []
            for _, np3 in preps:
                out.append(self._t(7, np1, np2, np3, span, iid))
                out.append(self._t(8, np3, np2, np1, span, iid))
            out.append(self._t(9, np1, vp, np2, span, iid))
            return out

        self.add("P3", span, build)

    def _emit_p4(self, clause: _Clause) -> None:
        if clause.subj is None or clause.obj is None:
            return
        np1 = self.np(clause.subj)
        vp = self.vp(clause.verb)
        for np2 in self._with_conjuncts(clause.obj):
            preps = [(p, self.np(t)) for p, t in clause.obls]
            span = self._span_over(np1, np2, vp, *[n for _, n in preps])

            def build(iid: int, np2=np2, preps=preps, span=span) -> list[TriplePattern]:
                out = [
                    self._t(10, np1, vp, np2, span, iid),
                    self._t(11, np2, vp, np1, span, iid),
                ]
                for _, np3 in preps:
                    out.append(self._t(12, np2, vp, np3, span, iid))
                    out.append(self._t(13, np3, vp, np2, span, iid))
                    if self.is_definite(np2) and self.is_definite(np3):
                        out.append(self._t(14, np1, vp, np3, span, iid))
                        out.append(self._t(15, np3, vp, np1, span, iid))
                return out

            self.add("P4", span, build)

    def _emit_p5(self, clause: _Clause) -> None:
        if clause.subj is None:
            return
        np1 = self.np(clause.subj)
        vp = self.vp(clause.verb)
        second = clause.pred if clause.copular else clause.obj
        if second is None:
            if self._interrogative_adverb(clause):
                span = self._span_over(np1, vp)

                def build(iid: int) -> list[TriplePattern]:
                    o = Var("entity-object", "o", iid)
                    return [
                        self._t(16, np1, vp, o, span, iid),
                        self._t(17, o, vp, np1, span, iid),
                    ]

                self.add("P5", span, build)
            return
        for np2 in self._with_conjuncts(second):
            span = self._span_over(np1, np2, vp)

            def build(iid: int, np2=np2, span=span) -> list[TriplePattern]:
                return [
                    self._t(16, np1, vp, np2, span, iid),
                    self._t(17, np2, vp, np1, span, iid),
                ]

            self.add("P5", span, build)

    def _interrogative_adverb(self, clause: _Clause) -> bool:
        for host in (clause.verb, clause.anchor):
            for dep in self.sent.children(host.index, "advmod"):
                if dep.lemma.lower() in ("where", "when"):
                    return True
        return False

    def _with_conjuncts(self, tok: Token) -> list[Phrase]:
        out = [self.np(tok)]
        for conj in self.sent.children(tok.index, "conj"):
            if conj.is_noun:
                out.append(self.np(conj))
        return out

    def _emit_p6_p7(self, clause: _Clause) -> None:
        pron = clause.possessive
        np3 = self._resolve_possessive(pron, clause.subj)
        if np3 is None:
            return
        np1 = self.np(clause.subj)
        second = clause.pred if clause.copular else clause.obj
        np2 = self.np(second) if second is not None else None
        vp = self.vp(clause.verb)
        span = self._span_over(np1, *( [np2] if np2 else [] ))

        if clause.copular and np2 is not None:
            def build18(iid: int) -> list[TriplePattern]:
                return [
                    self._t(18, np3, np1, np2, span, iid),
                    self._t(19, np2, np1, np3, span, iid),
                ]

            self.add("P6", span, build18)
            return

        def build20(iid: int) -> list[TriplePattern]:
            s = Var("entity-subject", "s", iid)
            o = Var("entity-object", "o", iid)
            p = Var("predicate", "p", iid)
            out = [
                self._t(20, np3, np1, o, span, iid),
                self._t(21, np3, p, np1, span, iid),
            ]
            if np2 is not None:
                out.append(self._t(22, o, vp, np2, span, iid))
                out.append(self._t(23, np2, vp, o, span, iid))
            out.append(self._t(24, np1, p, np3, span, iid))
            out.append(self._t(25, s, np1, np3, span, iid))
            if np2 is not None:
                out.append(self._t(26, s, vp, np2, span, iid))
                out.append(self._t(27, np2, vp, s, span, iid))
            return out

        self.add("P7", span, build20)

    def emit_bare_possessives(self, clauses: list[_Clause]) -> None:
        """P7 without the optional verb part: a possessive outside any subject."""
        claimed = {c.possessive.index for c in clauses if c.possessive is not None}
        for tok in self.sent.tokens:
            if not tok.is_pronoun_possessive or tok.index in claimed:
                continue
            if not tok.dep_label.startswith("nmod"):
                continue
            possessed = self.sent.token(tok.dep_head) if tok.dep_head else None
            if possessed is None or not possessed.is_noun:
                continue
            np3 = self._resolve_possessive(tok, possessed)
            if np3 is None:
                continue
            np1 = self.np(possessed)
            span = self._span_over(np1)

            def build(iid: int, np1=np1, np3=np3, span=span) -> list[TriplePattern]:
                s = Var("entity-subject", "s", iid)
                o = Var("entity-object", "o", iid)
                p = Var("predicate", "p", iid)
                return [
                    self._t(20, np3, np1, o, span, iid),
                    self._t(21, np3, p, np1, span, iid),
                    self._t(24, np1, p, np3, span, iid),
                    self._t(25, s, np1, np3, span, iid),
                ]

            self.add("P7", span, build)

    # -- genitive & preposition (P9 / P10) ---------------------------------

    def run_genitive_preposition(self) -> None:
        sent = self.sent
        for tok in sent.tokens:
            if not tok.dep_head:
                continue
            head = sent.token(tok.dep_head)
            if tok.dep_label == "nmod:poss" and not tok.is_pronoun_possessive and head.is_noun:
                marker = next((c for c in sent.children(tok.index, "case") if c.pos == "POS"), tok)
                if self._marker_suppressed(marker):
                    continue
                self._emit_genprep("P10", self.np(head), None, self.np(tok), genitive=True)
            elif tok.dep_label == "nmod" and head.is_noun and not tok.is_pronoun_possessive:
                case = next((c for c in sent.children(tok.index, "case") if c.pos != "POS"), None)
                if case is None or self._marker_suppressed(case):
                    continue
                for np2_tok in [tok] + [c for c in sent.children(tok.index, "conj") if c.is_noun]:
                    self._emit_genprep("P9", self.np(head), case.lemma, self.np(np2_tok), genitive=False)
        if "F" in self.settings:
            self._run_oblique_genprep()

    def _marker_suppressed(self, marker: Token) -> bool:
        if "C" not in self.settings:
            return False
        m = self.sent.mention_at(marker.index)
        return m is not None and m.kind != "number"

    def _emit_genprep(
        self, pattern: str, np1: Phrase, prep: str | None, np2: Phrase, genitive: bool, derived: bool = False
    ) -> None:
        if np1.span == np2.span:
            return
        span = self._span_over(np1, np2)
        if genitive:
            display = (np2.text, "has", np1.text)
        else:
            head = self.sent.token(np1.head)
            # Pairs lifted out of a clause always read as a plain statement;
            # number agreement applies only to attachments the noun had itself.
            cop = "are" if not derived and head.pos in ("NNS", "NNPS") else "is"
            display = (np1.text, f"{cop} {prep}", np2.text)
        meta = {"display": display, "genitive": genitive, "prep": prep}

        def build(iid: int) -> list[TriplePattern]:
            s = Var("entity-subject", "s", iid)
            o = Var("entity-object", "o", iid)
            p = Var("predicate", "p", iid)
            return [
                self._t(36, s, np1, np2, span, iid),
                self._t(37, np2, np1, o, span, iid),
                self._t(38, np1, p, np2, span, iid),
                self._t(39, np2, p, np1, span, iid),
            ]

        self.add(pattern, span, build, meta)

    def _run_oblique_genprep(self) -> None:
        """Setting F: relate each core verb argument to each oblique object."""
        for tok in self.sent.tokens:
            if tok.index not in self._clause_verbs:
                continue
            args = []
            for dep in self.sent.children(tok.index, *CORE_ARG_LABELS):
                if dep.is_noun:
                    args.append((dep.dep_label, dep))
            for prep, pobj in self._obliques(tok):
                if any(d.index == pobj.index for _, d in args):
                    continue
                for label, arg in args:
                    logger.debug("setting F fired via %s on %r", label, arg.surface)
                    self._emit_genprep("P9", self.np(arg), prep, self.np(pobj), genitive=False, derived=True)

    # -- appositive (P11) --------------------------------------------------

    def run_appositive(self) -> None:
        sent = self.sent
        for tok in sent.tokens:
            if tok.dep_label != "appos" or not tok.dep_head:
                continue
            head = sent.token(tok.dep_head)
            np1 = full_noun_phrase(sent, head)
            np2 = full_noun_phrase(sent, tok)
            if "C" in self.settings:
                m = sent.mention_covering(Span(np1.span.start, np2.span.end))
                if m is not None and m.kind != "number":
                    continue
            if "E" in self.settings and self._spurious_appositive(head):
                continue
            span = self._span_over(np1, np2)
            meta = {"display": (np1.text, "is", np2.text)}

            def build(iid: int, np1=np1, np2=np2, span=span) -> list[TriplePattern]:
                p = Var("predicate", "p", iid)
                return [
                    self._t(40, np1, p, np2, span, iid),
                    self._t(41, np2, p, np1, span, iid),
                ]

            self.add("P11", span, build, meta)

    def _spurious_appositive(self, head: Token) -> bool:
        """True when the apposition restates a clause event, not the head noun.

        An appositive hanging off a preposition-marked argument of a verb
        ("reported ... in the United States, an increase of 176") comments on
        the whole clause, so pairing it with the nearest noun is unsound.
        """
        if not any(c.dep_label == "case" and c.pos != "POS" for c in self.sent.children(head.index)):
            return False
        if head.dep_head == 0:
            return False
        return self.sent.token(head.dep_head).is_verb

    # -- noun compounds (P8) -----------------------------------------------

    def run_noun_phrase(self) -> None:
        if "G" not in self.settings and "H" not in self.settings:
            return
        for units in self._unit_runs():
            pairs: list[tuple[Phrase, Phrase]] = []
            nouns = [u for u in units if u[1]]
            if len(units) < 2 or not nouns:
                continue
            if "G" in self.settings:
                pairs.extend((units[i][0], units[i + 1][0]) for i in range(len(units) - 1))
            if "H" in self.settings:
                pairs.extend((nouns[i][0], nouns[i + 1][0]) for i in range(len(nouns) - 1))
                rightmost = nouns[-1][0]
                pairs.extend((u[0], rightmost) for u in units if not u[1])
            seen = set()
            for e1, e2 in pairs:
                key = (e1.span, e2.span)
                if key in seen or e1.span == e2.span:
                    continue
                seen.add(key)
                self._emit_pair(e1, e2)

    def _unit_runs(self) -> list[list[tuple[Phrase, bool]]]:
        """Adjective/noun unit sequences inside base constituents.

        Each unit is (phrase, is_noun_unit).  Mentions, quotations and
        expressions collapse their tokens into one noun unit.
        """
        sent = self.sent
        if sent.const_root is None:
            return []
        covered: list[Span] = []
        if "C" in self.settings:
            covered += [m.span for m in sent.mentions if m.kind != "number"]
        if "B" in self.settings:
            covered += sent.quoted_spans + self._expr_spans

        def unit_for(index: int) -> tuple[Span, bool] | None:
            for span in covered:
                if span.start <= index <= span.end:
                    return span, True
            tok = sent.token(index)
            if tok.pos.startswith("NN"):
                return Span(index, index), True
            if tok.pos.startswith("JJ"):
                return Span(index, index), False
            return None

        runs: list[list[tuple[Phrase, bool]]] = []
        seen_runs: set[tuple] = set()
        for node in sent.const_root.walk():
            if node.is_leaf or node.label not in ("NP", "WHNP", "NX", "NML"):
                continue
            pret_children = [c for c in node.children if c.is_leaf]
            run: list[tuple[Span, bool]] = []

            def flush() -> None:
                nonlocal run
                dedup: list[tuple[Span, bool]] = []
                for item in run:
                    if not dedup or dedup[-1][0] != item[0]:
                        dedup.append(item)
                if len(dedup) >= 2:
                    key = tuple(i[0] for i in dedup)
                    if key not in seen_runs:
                        seen_runs.add(key)
                        runs.append(
                            [
                                (self._unit_phrase(span), is_noun)
                                for span, is_noun in dedup
                            ]
                        )
                run = []

            for child in pret_children:
                u = unit_for(child.token_span.start)
                if u is None:
                    flush()
                else:
                    run.append(u)
            flush()
        return runs

    def _unit_phrase(self, span: Span) -> Phrase:
        toks = [self.sent.token(i) for i in range(span.start, span.end + 1)]
        return Phrase("NP", span, detokenize(toks), span.end)

    def _emit_pair(self, e1: Phrase, e2: Phrase) -> None:
        look = self.lexicons.entities.lookup
        m1 = look(e1.text)
        m2 = look(e2.text)
        k1 = m1[1] if m1 else None
        k2 = m2[1] if m2 else None
        if k1 == "entity" and k2 == "class":
            tids = (28, 29)
        elif k1 == "entity" and k2 == "entity":
            tids = (32, 33, 34, 35)
        elif k1 == "entity":
            tids = (30, 31)
        else:
            tids = (28, 29, 30, 31, 32, 33, 34, 35)
        span = self._span_over(e1, e2)

        def build(iid: int) -> list[TriplePattern]:
            s = Var("entity-subject", "s", iid)
            o = Var("entity-object", "o", iid)
            p = Var("predicate", "p", iid)
            shapes = {
                28: (e1, p, e2),
                29: (e2, p, e1),
                30: (e1, e2, o),
                31: (s, e2, e1),
                32: (s, p, e1),
                33: (e1, p, o),
                34: (s, p, e2),
                35: (e2, p, o),
            }
            return [self._t(tid, *shapes[tid], span, iid) for tid in tids]

        self.add("P8", span, build)

    # -- comparatives and superlatives (P12 - P15) -------------------------

    def run_comparative_superlative(self) -> None:
        sent = self.sent
        for tok in sent.tokens:
            cls = classify_adjective(tok, self.lexicons)
            if tok.pos == "JJS":
                if cls is not AdjectiveClass.QUANTITY_SUPERLATIVE:
                    continue
                if not tok.dep_label.startswith("amod") or not tok.dep_head:
                    continue
                noun = sent.token(tok.dep_head)
                self._emit_p15(tok, noun)
                continue
            if cls is AdjectiveClass.PLAIN and not self._is_equative(tok):
                continue
            if tok.pos not in ("JJR", "JJ"):
                continue
            np1 = self._comparative_subject(tok)
            comp = self._comparative_complement(tok)
            if np1 is None or comp is None:
                continue
            self._emit_comparative(tok, np1, comp)

    def _is_equative(self, tok: Token) -> bool:
        if tok.pos != "JJ":
            return False
        from .lexicons import normalize

        if normalize(tok.lemma) not in self.lexicons.quantity_adjectives:
            return False
        return any(d.lemma.lower() == "as" for d in self.sent.children(tok.index, "advmod"))

    def _comparative_subject(self, adj: Token) -> Phrase | None:
        sent = self.sent
        subj = self._first_child(adj, SUBJECT_LABELS)
        if subj is not None:
            resolved = self._resolve_relative(subj, adj)
            return self._bare_np(resolved if resolved is not None else subj)
        if adj.dep_label.startswith(("amod", "acl")) and adj.dep_head:
            return self._np_without(sent.token(adj.dep_head), adj)
        return None

    def _bare_np(self, tok: Token) -> Phrase:
        """Head-only phrase: comparisons range over the class noun itself."""
        if "C" in self.settings and self.sent.mention_at(tok.index) is not None:
            return self.np(tok)
        return Phrase("NP", Span(tok.index, tok.index), detokenize([tok]), tok.index)

    def _comparative_complement(self, adj: Token) -> Token | None:
        for dep in self.sent.children(adj.index, "obl", "nmod"):
            case = self._first_child(dep, ("case",))
            mark = case.lemma.lower() if case else ""
            if mark in ("than", "as") or case is None:
                return dep
        return None

    def _np_without(self, noun: Token, drop: Token) -> Phrase:
        from .phrases import EXCLUDED_NP_POS, is_punct

        base = self.np(noun)
        toks = []
        for i in range(base.span.start, base.span.end + 1):
            tok = self.sent.token(i)
            if i == drop.index or tok.pos in EXCLUDED_NP_POS or is_punct(tok):
                continue
            toks.append(tok)
        return Phrase("NP", base.span, detokenize(toks), base.head)

    def _emit_comparative(self, adj: Token, np1: Phrase, comp: Token) -> None:
        cls = classify_adjective(adj, self.lexicons)
        adjp = adjective_phrase(self.sent, adj)
        equative = self._is_equative(adj)
        direction = "lt" if adj.lemma.lower() in DOWNWARD_ADJECTIVES else "gt"
        if equative:
            direction = "eq"
        value = self.numeric_value(comp)
        if value is not None and (cls is AdjectiveClass.QUANTITY_COMPARATIVE or equative):
            span = self._span_over(np1, adjp)
            qual = ("compare", direction, value)

            def build(iid: int) -> list[TriplePattern]:
                n = Var("numeric", "n", iid)
                return [self._t(42, np1, adjp, n, span, iid, qualifier=qual)]

            self.add("P12", span, build, meta={"filter": qual})
            return
        np2 = self.np(comp)
        if cls is AdjectiveClass.QUANTITY_COMPARATIVE or equative:
            span = self._span_over(np1, adjp, np2)
            qual = ("compare-pair", direction)

            def build(iid: int) -> list[TriplePattern]:
                n1 = Var("numeric", "n1", iid)
                n2 = Var("numeric", "n2", iid)
                return [
                    self._t(43, np1, adjp, n1, span, iid, qualifier=qual),
                    self._t(44, np2, adjp, n2, span, iid, qualifier=qual),
                ]

            self.add("P13", span, build, meta={"filter": qual})
            return
        span = self._span_over(np1, adjp, np2)

        def build(iid: int) -> list[TriplePattern]:
            return [self._t(45, np1, adjp, np2, span, iid)]

        self.add("P14", span, build)

    def _emit_p15(self, adj: Token, noun: Token) -> None:
        np1 = self._np_without(noun, adj)
        adjp = adjective_phrase(self.sent, adj)
        mode = "min" if adj.lemma.lower() in DOWNWARD_ADJECTIVES else "max"
        span = self._span_over(np1, adjp)
        qual = ("extremum", mode)

        def build(iid: int) -> list[TriplePattern]:
            n = Var("numeric", "n", iid)
            return [self._t(46, np1, adjp, n, span, iid, qualifier=qual)]

        self.add("P15", span, build, meta={"filter": qual})

    # -- shared triple constructor ----------------------------------------

    def _t(
        self,
        template_id: int,
        subject: Term,
        predicate: Term,
        object_: Term,
        span: Span,
        instance_id: int,
        qualifier: tuple | None = None,
    ) -> TriplePattern:
        return TriplePattern(
            subject=subject,
            predicate=predicate,
            object=object_,
            template_id=template_id,
            category=templates.category_of(template_id),
            is_key=templates.is_key(template_id),
            source_span=span,
            instance_id=instance_id,
            qualifier=qualifier,
        )

    # -- driver ------------------------------------------------------------

    def run(self) -> list[PatternInstance]:
        clauses = self.find_clauses()
        self.run_clause_patterns(clauses)
        self.emit_bare_possessives(clauses)
        self.run_genitive_preposition()
        self.run_appositive()
        self.run_noun_phrase()
        self.run_comparative_superlative()
        self.matches.sort(key=lambda m: (m.span.start, m.span.end, m.order))
        instances = []
        for iid, match in enumerate(self.matches, start=1):
            inst = PatternInstance(
                instance_id=iid,
                pattern=match.pattern,
                category=templates.category_of(templates.PATTERN_ROWS[match.pattern][0]),
                span=match.span,
                triples=match.build(iid),
                meta=dict(match.meta),
            )
            instances.append(inst)
        if "D" in self.settings:
            instances = self._reform(instances)
        return instances

    # -- setting D reformation --------------------------------------------

    def _reform(self, instances: list[PatternInstance]) -> list[PatternInstance]:
        """Drop entity/number preposition tails and re-attach them upstream."""
        genpreps = [i for i in instances if i.pattern in ("P9", "P10") and not i.meta.get("genitive")]
        drop: set[int] = set()
        for inst in genpreps:
            t38 = next(t for t in inst.triples if t.template_id == 38)
            np1, np2 = t38.subject, t38.object
            if not (isinstance(np1, Phrase) and isinstance(np2, Phrase)):
                continue
            if not (self.is_definite(np1) and self.is_definite(np2)):
                continue
            prep = inst.meta.get("prep")
            chained = self._chain_head(instances, np1)
            if chained is not None:
                # (NP1, prep1, NP2, prep2, NP3): relate NP1 to the tail instead.
                drop.add(inst.instance_id)
                self._append_genprep_triples(chained, prep, np2)
                continue
            verbal = self._clause_with_object(instances, np1)
            if verbal is not None:
                drop.add(inst.instance_id)
                self._append_indirect_triples(verbal, np2)
        return [i for i in instances if i.instance_id not in drop]

    def _chain_head(self, instances: list[PatternInstance], np_mid: Phrase) -> PatternInstance | None:
        for inst in instances:
            if inst.pattern not in ("P9", "P10"):
                continue
            t38 = next((t for t in inst.triples if t.template_id == 38), None)
            if t38 is None or not isinstance(t38.object, Phrase):
                continue
            if t38.object.head == np_mid.head and t38.subject is not t38.object:
                return inst
        return None

    def _clause_with_object(self, instances: list[PatternInstance], np_obj: Phrase) -> PatternInstance | None:
        for inst in instances:
            if inst.pattern not in ("P4", "P5"):
                continue
            t = next((t for t in inst.triples if t.template_id in (10, 16)), None)
            if t is None or not isinstance(t.object, Phrase):
                continue
            if t.object.head == np_obj.head:
                return inst
        return None

    def _append_genprep_triples(self, inst: PatternInstance, prep: str | None, np3: Phrase) -> None:
        t38 = next(t for t in inst.triples if t.template_id == 38)
        np1 = t38.subject
        iid = inst.instance_id
        span = Span(min(inst.span.start, np3.span.start), max(inst.span.end, np3.span.end))
        s = Var("entity-subject", "s", iid)
        o = Var("entity-object", "o", iid)
        p = Var("predicate", "p", iid)
        for tid, (a, b, c) in {
            36: (s, np1, np3),
            37: (np3, np1, o),
            38: (np1, p, np3),
            39: (np3, p, np1),
        }.items():
            tp = self._t(tid, a, b, c, span, iid)
            if tp.render() not in {x.render() for x in inst.triples}:
                inst.triples.append(tp)
        inst.meta.setdefault("reformed", []).append((prep, np3.text))

    def _append_indirect_triples(self, inst: PatternInstance, np3: Phrase) -> None:
        t = next(t for t in inst.triples if t.template_id in (10, 16))
        np1, vp = t.subject, t.predicate
        iid = inst.instance_id
        span = Span(min(inst.span.start, np3.span.start), max(inst.span.end, np3.span.end))
        inst.triples.append(self._t(14, np1, vp, np3, span, iid))
        inst.triples.append(self._t(15, np3, vp, np1, span, iid))
        inst.meta.setdefault("reformed", []).append(("indirect", np3.text))


# ---------------------------------------------------------------------------
# public API


def extract_instances(sent: ParsedSentence, settings: SettingSet, lexicons: Lexicons) -> list[PatternInstance]:
    return Extractor(sent, settings, lexicons).run()


def _category_triples(sent, settings, lexicons, category: str) -> list[TriplePattern]:
    out = []
    for inst in extract_instances(sent, settings, lexicons):
        out.extend(t for t in inst.triples if t.category == category)
    return out


def extract_verbal(sent, settings, lexicons) -> list[TriplePattern]:
    return _category_triples(sent, settings, lexicons, templates.VERBAL)


def extract_poss_adj_whose(sent, settings, lexicons) -> list[TriplePattern]:
    return _category_triples(sent, settings, lexicons, templates.POSS_ADJ_WHOSE)


def extract_noun_phrase(sent, settings, lexicons) -> list[TriplePattern]:
    return _category_triples(sent, settings, lexicons, templates.NOUN_PHRASE)


def extract_genitive_preposition(sent, settings, lexicons) -> list[TriplePattern]:
    return _category_triples(sent, settings, lexicons, templates.GENITIVE_PREPOSITION)


def extract_appositive(sent, settings, lexicons) -> list[TriplePattern]:
    return _category_triples(sent, settings, lexicons, templates.APPOSITIVE)


def extract_comparative_superlative(sent, settings, lexicons) -> list[TriplePattern]:
    return _category_triples(sent, settings, lexicons, templates.COMPARATIVE_SUPERLATIVE)


def _struct_key(tp: TriplePattern) -> tuple:
    def term_key(term: Term) -> tuple:
        if isinstance(term, Var):
            return ("V", term.kind)
        return ("P", term.span, term.text.lower())

    return (term_key(tp.subject), term_key(tp.predicate), term_key(tp.object))


def dedup_triples(triples: list[TriplePattern]) -> list[TriplePattern]:
    """Merge structurally identical triples, keeping the lowest template id."""
    best: dict[tuple, TriplePattern] = {}
    for tp in triples:
        key = _struct_key(tp)
        cur = best.get(key)
        if cur is None or (tp.template_id, tp.instance_id) < (cur.template_id, cur.instance_id):
            best[key] = tp
    return list(best.values())


def extract_all(sent: ParsedSentence, settings: SettingSet, lexicons: Lexicons) -> list[TriplePattern]:
    """Every triple of every matched pattern instance, deduplicated and sorted."""
    triples: list[TriplePattern] = []
    for inst in extract_instances(sent, settings, lexicons):
        triples.extend(inst.triples)
    triples = dedup_triples(triples)
    triples.sort(key=lambda t: (t.source_span.start, t.source_span.end, t.template_id, t.instance_id))
    return triples
