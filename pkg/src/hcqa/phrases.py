"""Phrase formation on top of the two parse views.

Noun phrases default to the minimal reading: a noun head plus those of its
modifier dependents that sit at the same constituency level.  Settings B and
C widen a span to a whole quotation/expression or entity mention; dropping
setting A falls back to the full NP subtree, which reproduces the long
chunker-style arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .ingest import ParsedSentence, Span, Token
from .lexicons import Lexicons, normalize
from .settings import SettingSet

# POS tags never included in a minimal noun phrase span.
EXCLUDED_NP_POS = {"DT", "PDT", "WDT", "POS"}
PUNCT_POS = {".", ",", ":", "``", "''", "-LRB-", "-RRB-", "HYPH", "SYM", "$", "#"}
# Dependency labels that may extend a noun head into a larger minimal NP.
NP_MODIFIER_LABELS = ("amod", "compound", "flat", "nummod")
# Labels excluded from a verb phrase span.
VP_EXCLUDED_LABELS = ("aux", "cop", "punct", "mark")

NO_SPACE_BEFORE = {",", ".", "!", "?", ";", ":", "%", ")", "''", "”"}
NO_SPACE_AFTER = {"(", "``", "“"}


class AdjectiveClass(Enum):
    PLAIN = "plain"
    QUANTITY_COMPARATIVE = "quantity-comparative"
    QUALITY_COMPARATIVE = "quality-comparative"
    QUANTITY_SUPERLATIVE = "quantity-superlative"


@dataclass(frozen=True)
class Phrase:
    """A contiguous phrase with its head token index."""

    kind: str  # NP | VP | ADJP | PREP
    span: Span
    text: str
    head: int

    def __str__(self) -> str:
        return self.text


def is_punct(tok: Token) -> bool:
    return tok.dep_label == "punct" or tok.upos == "PUNCT" or tok.pos in PUNCT_POS


def detokenize(tokens: list[Token]) -> str:
    """Join surfaces with typographically sane spacing."""
    out: list[str] = []
    for tok in tokens:
        s = tok.surface
        glue_left = (
            s in NO_SPACE_BEFORE
            or s.startswith("'")
            or s == "n't"
        )
        if not out or glue_left or out[-1] in NO_SPACE_AFTER:
            if out and not glue_left and out[-1] not in NO_SPACE_AFTER:
                out.append(" ")
            out.append(s)
        else:
            out.append(" ")
            out.append(s)
    return "".join(out)


def _pret_depth(sent: ParsedSentence, index: int) -> int:
    """Depth of the preterminal above one token."""
    if sent.const_root is None:
        return 0
    span = Span(index, index)
    best = None
    for node in sent.const_root.walk():
        if node.is_leaf and node.token_span == span:
            best = node
    if best is None:
        return 0
    return best.depth


def expression_spans(sent: ParsedSentence, lexicons: Lexicons) -> list[Span]:
    """Occurrences of multi-word expressions from the expression list."""
    spans = []
    n = len(sent.tokens)
    max_len = max((e.count(" ") + 1 for e in lexicons.expressions), default=0)
    for length in range(min(max_len, n), 1, -1):
        for start in range(1, n - length + 2):
            words = " ".join(sent.token(i).surface for i in range(start, start + length))
            if normalize(words) in lexicons.expressions:
                span = Span(start, start + length - 1)
                if not any(span.overlaps(s) for s in spans):
                    spans.append(span)
    return sorted(spans)


def _span_text(sent: ParsedSentence, span: Span, minimal: bool) -> str:
    toks = []
    for i in range(span.start, span.end + 1):
        tok = sent.token(i)
        if minimal and (tok.pos in EXCLUDED_NP_POS or is_punct(tok)):
            continue
        if not minimal and tok.pos in ("``", "''", "."):
            continue
        toks.append(tok)
    if not minimal:
        # Sentence-internal commas stay ("Columbus , New Mexico"); edge
        # commas picked up from a quotation or appositive boundary do not.
        while toks and toks[0].pos in (",", ":"):
            toks.pop(0)
        while toks and toks[-1].pos in (",", ":"):
            toks.pop()
    return detokenize(toks)


def _lowest_np_ancestor(sent: ParsedSentence, index: int) -> Span | None:
    if sent.const_root is None:
        return None
    span = Span(index, index)
    best = None
    for node in sent.const_root.walk():
        if node.is_leaf or not node.token_span.covers(span):
            continue
        if node.label in ("NP", "WHNP", "NX", "NML", "QP"):
            if best is None or node.depth > best.depth:
                best = node
    return best.token_span if best else None


def noun_phrase(
    sent: ParsedSentence,
    head: Token,
    settings: SettingSet,
    lexicons: Lexicons,
    _expr_spans: list[Span] | None = None,
) -> Phrase:
    """The noun phrase anchored at one noun token under the given settings."""
    span = Span(head.index, head.index)

    if "C" in settings:
        m = sent.mention_at(head.index)
        if m is not None and m.kind != "number":
            return Phrase("NP", m.span, _span_text(sent, m.span, minimal=False), head.index)
    if "B" in settings:
        q = sent.quoted_covering(span)
        if q is not None:
            return Phrase("NP", q, _span_text(sent, q, minimal=False), head.index)
        for e in _expr_spans if _expr_spans is not None else expression_spans(sent, lexicons):
            if e.covers(span):
                return Phrase("NP", e, _span_text(sent, e, minimal=False), head.index)

    if "A" not in settings:
        full = _lowest_np_ancestor(sent, head.index)
        if full is not None:
            return Phrase("NP", full, _span_text(sent, full, minimal=False), head.index)

    # Minimal reading: modifier dependents at the same constituency level.
    head_depth = _pret_depth(sent, head.index)
    lo = hi = head.index
    for dep in sent.children(head.index, *NP_MODIFIER_LABELS):
        if dep.pos in EXCLUDED_NP_POS or is_punct(dep):
            continue
        if _pret_depth(sent, dep.index) != head_depth:
            continue
        lo = min(lo, dep.index)
        hi = max(hi, dep.index)
    span = Span(lo, hi)
    return Phrase("NP", span, _span_text(sent, span, minimal=True), head.index)


def full_noun_phrase(sent: ParsedSentence, head: Token) -> Phrase:
    """The full NP subtree around a noun; used for appositive arguments."""
    span = _lowest_np_ancestor(sent, head.index) or Span(head.index, head.index)
    return Phrase("NP", span, _span_text(sent, span, minimal=False), head.index)


def form_noun_phrases(sent: ParsedSentence, settings: SettingSet, lexicons: Lexicons) -> list[Phrase]:
    """One NP per noun token, in sentence order."""
    spans = expression_spans(sent, lexicons)
    return [
        noun_phrase(sent, tok, settings, lexicons, spans)
        for tok in sent.tokens
        if tok.is_noun
    ]


def make_verb_phrase(sent: ParsedSentence, verb: Token) -> Phrase:
    """The bare verb as a phrase; auxiliaries are left out."""
    return Phrase("VP", Span(verb.index, verb.index), verb.surface, verb.index)


def attach_adverb_modifiers(vp: Phrase, sent: ParsedSentence) -> Phrase:
    """Widen a verb phrase with its adverb dependents (when, first, ...)."""
    members = [sent.token(vp.head)]
    for dep in sent.children(vp.head, "advmod"):
        if dep.lemma.lower() in ("how", "where", "when", "why"):
            continue
        members.append(dep)
    members.sort(key=lambda t: t.index)
    span = Span(members[0].index, members[-1].index)
    text = detokenize(members)
    return Phrase("VP", span, text, vp.head)


def adjective_phrase(sent: ParsedSentence, adj: Token) -> Phrase:
    return Phrase("ADJP", Span(adj.index, adj.index), adj.surface, adj.index)


def is_copular(phrase_or_token: Phrase | Token, sent: ParsedSentence, lexicons: Lexicons) -> bool:
    """True if the verb phrase's head verb is a copula by lemma."""
    head = phrase_or_token if isinstance(phrase_or_token, Token) else sent.token(phrase_or_token.head)
    return normalize(head.lemma) in lexicons.copulars


def classify_adjective(tok: Token, lexicons: Lexicons) -> AdjectiveClass:
    quantity = normalize(tok.lemma) in lexicons.quantity_adjectives
    if tok.pos == "JJR":
        return AdjectiveClass.QUANTITY_COMPARATIVE if quantity else AdjectiveClass.QUALITY_COMPARATIVE
    if tok.pos == "JJS" and quantity:
        return AdjectiveClass.QUANTITY_SUPERLATIVE
    return AdjectiveClass.PLAIN
