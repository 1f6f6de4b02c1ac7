"""Readers for pre-parsed sentences.

Two aligned views of every sentence are ingested: a dependency parse in
CoNLL-U and a bracketed constituency parse.  Both views are produced offline
by whatever parser the caller prefers; this module only validates and indexes
them.  An entity lexicon may then be used to annotate token spans as mentions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, NamedTuple

from .errors import ParseError, StructureError
from .lexicons import EntityLexicon, normalize

OPEN_QUOTES = {'"', "``", "“"}
CLOSE_QUOTES = {'"', "''", "”"}
QUOTE_TOKENS = OPEN_QUOTES | CLOSE_QUOTES


class Span(NamedTuple):
    """Inclusive token index range, 1-based."""

    start: int
    end: int

    def covers(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass
class Token:
    """One CoNLL-U row.  ``pos`` is the language-specific (PTB) tag."""

    index: int
    surface: str
    lemma: str
    upos: str
    pos: str
    dep_head: int
    dep_label: str

    @property
    def is_noun(self) -> bool:
        return self.pos.startswith("NN") or self.pos in ("WP", "PRP", "EX")

    @property
    def is_verb(self) -> bool:
        return self.pos.startswith("VB") or self.pos == "MD"

    @property
    def is_pronoun_possessive(self) -> bool:
        return self.pos in ("PRP$", "WP$")


@dataclass
class ConstituencyNode:
    """Node of the bracketed parse; leaves are preterminals over one token."""

    label: str
    children: list["ConstituencyNode"] = field(default_factory=list)
    word: str | None = None
    token_span: Span = Span(0, 0)
    depth: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.word is not None

    def walk(self) -> Iterator["ConstituencyNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> list["ConstituencyNode"]:
        return [n for n in self.walk() if n.is_leaf]

    def covering(self, span: Span) -> list["ConstituencyNode"]:
        """All nodes covering the span, shallowest first."""
        return [n for n in self.walk() if n.token_span.covers(span)]

    def tightest_phrase(self, span: Span) -> "ConstituencyNode":
        """Deepest non-leaf node covering the span."""
        best = None
        for n in self.walk():
            if n.is_leaf or not n.token_span.covers(span):
                continue
            if best is None or n.depth > best.depth:
                best = n
        if best is None:
            raise StructureError(f"no constituent covers span {span}")
        return best


@dataclass(frozen=True)
class EntityMention:
    span: Span
    canonical_id: str
    kind: str  # entity | class | number


@dataclass
class ParsedSentence:
    """A sentence with its dependency tree, constituency tree and mentions."""

    tokens: list[Token]
    const_root: ConstituencyNode | None = None
    mentions: list[EntityMention] = field(default_factory=list)
    quoted_spans: list[Span] = field(default_factory=list)
    sent_id: str = ""
    text: str = ""

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def children(self, head: int, *labels: str) -> list[Token]:
        """Dependents of a token, optionally filtered by label prefix."""
        out = []
        for t in self.tokens:
            if t.dep_head != head:
                continue
            if labels and not any(t.dep_label == l or t.dep_label.startswith(l + ":") for l in labels):
                continue
            out.append(t)
        return out

    def root_token(self) -> Token:
        for t in self.tokens:
            if t.dep_head == 0:
                return t
        raise StructureError("sentence has no root token")

    def mention_at(self, index: int) -> EntityMention | None:
        for m in self.mentions:
            if m.span.start <= index <= m.span.end:
                return m
        return None

    def mention_covering(self, span: Span) -> EntityMention | None:
        for m in self.mentions:
            if m.span.covers(span):
                return m
        return None

    def quoted_covering(self, span: Span) -> Span | None:
        for q in self.quoted_spans:
            if q.covers(span):
                return q
        return None


# ---------------------------------------------------------------------------
# CoNLL-U


def read_conllu(stream: IO[str] | Iterable[str]) -> list[ParsedSentence]:
    """Parse a CoNLL-U stream into sentences.

    Multiword-token and empty-node rows (ids with ``-`` or ``.``) are skipped.
    Raises ParseError for malformed rows and StructureError for head cycles or
    non-contiguous ids.
    """
    sentences: list[ParsedSentence] = []
    tokens: list[Token] = []
    sent_id = ""
    text = ""

    def flush(lineno: int) -> None:
        nonlocal tokens, sent_id, text
        if not tokens:
            return
        _validate_tokens(tokens, lineno)
        sent = ParsedSentence(tokens=tokens, sent_id=sent_id, text=text)
        sent.quoted_spans = find_quoted_spans(sent)
        sentences.append(sent)
        tokens, sent_id, text = [], "", ""

    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id"):
                sent_id = body.split("=", 1)[1].strip() if "=" in body else ""
            elif body.startswith("text"):
                text = body.split("=", 1)[1].strip() if "=" in body else ""
            continue
        cols = line.split("\t")
        if len(cols) < 8:
            raise ParseError(f"CoNLL-U row has {len(cols)} columns, need at least 8", line=lineno)
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            index = int(cols[0])
        except ValueError:
            raise ParseError(f"bad token id {cols[0]!r}", line=lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ParseError(f"bad head {cols[6]!r}", line=lineno) from None
        tokens.append(
            Token(
                index=index,
                surface=cols[1],
                lemma=cols[2] if cols[2] != "_" else cols[1].lower(),
                upos=cols[3],
                pos=cols[4] if cols[4] != "_" else cols[3],
                dep_head=head,
                dep_label=cols[7],
            )
        )
    flush(lineno + 1)
    return sentences


def _validate_tokens(tokens: list[Token], lineno: int) -> None:
    for want, tok in enumerate(tokens, start=1):
        if tok.index != want:
            raise ParseError(f"token ids not contiguous: expected {want}, got {tok.index}", line=lineno)
    n = len(tokens)
    roots = 0
    for tok in tokens:
        if tok.dep_head == tok.index:
            raise StructureError(f"token {tok.index} is its own head")
        if not 0 <= tok.dep_head <= n:
            raise StructureError(f"token {tok.index} has head {tok.dep_head} outside 0..{n}")
        if tok.dep_head == 0:
            roots += 1
    if roots == 0:
        raise StructureError("sentence has no root (head 0) token")
    for tok in tokens:
        seen = set()
        cur = tok.index
        while cur != 0:
            if cur in seen:
                raise StructureError(f"head cycle through token {tok.index}")
            seen.add(cur)
            cur = tokens[cur - 1].dep_head


def serialize_conllu(sentences: list[ParsedSentence]) -> str:
    """Write sentences back out; inverse of read_conllu for the fields kept."""
    blocks = []
    for sent in sentences:
        lines = []
        if sent.sent_id:
            lines.append(f"# sent_id = {sent.sent_id}")
        if sent.text:
            lines.append(f"# text = {sent.text}")
        for t in sent.tokens:
            lines.append(
                "\t".join(
                    [str(t.index), t.surface, t.lemma, t.upos, t.pos, "_", str(t.dep_head), t.dep_label, "_", "_"]
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# Bracketed constituency trees


def read_ptb(stream: IO[str] | str) -> ConstituencyNode:
    """Parse a single bracketed tree from a string or stream."""
    trees = read_ptb_trees(stream)
    if len(trees) != 1:
        raise ParseError(f"expected exactly one tree, found {len(trees)}")
    return trees[0]


def read_ptb_trees(stream: IO[str] | str) -> list[ConstituencyNode]:
    """Parse all bracketed trees in a stream.

    Understands the usual one-tree-per-line and pretty-printed layouts.  An
    optional outer TOP/ROOT/S1 wrapper with a single child is stripped.
    """
    text = stream if isinstance(stream, str) else stream.read()
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    trees: list[ConstituencyNode] = []
    pos = 0
    while pos < len(tokens):
        tree, pos = _read_node(tokens, pos, text)
        trees.append(_strip_wrapper(tree))
    for tree in trees:
        _index_tree(tree)
    return trees


def _read_node(tokens: list[str], pos: int, source: str) -> tuple[ConstituencyNode, int]:
    if tokens[pos] != "(":
        raise ParseError("expected '('", offset=_offset_of(source, pos))
    pos += 1
    if pos >= len(tokens) or tokens[pos] in ("(", ")"):
        raise ParseError("expected node label", offset=_offset_of(source, pos))
    label = tokens[pos]
    pos += 1
    node = ConstituencyNode(label=label)
    while pos < len(tokens) and tokens[pos] != ")":
        if tokens[pos] == "(":
            child, pos = _read_node(tokens, pos, source)
            node.children.append(child)
        else:
            if node.word is not None or node.children:
                raise ParseError("mixed leaf and internal content", offset=_offset_of(source, pos))
            node.word = tokens[pos]
            pos += 1
    if pos >= len(tokens):
        raise ParseError("unbalanced brackets: missing ')'", offset=len(source))
    return node, pos + 1


def _offset_of(source: str, token_pos: int) -> int:
    # A best-effort character offset for error messages.
    return min(token_pos, len(source))


def _strip_wrapper(tree: ConstituencyNode) -> ConstituencyNode:
    while tree.label in ("TOP", "ROOT", "S1") and len(tree.children) == 1 and not tree.is_leaf:
        tree = tree.children[0]
    return tree


def _index_tree(root: ConstituencyNode) -> None:
    counter = [0]

    def assign(node: ConstituencyNode, depth: int) -> Span:
        node.depth = depth
        if node.is_leaf:
            counter[0] += 1
            node.token_span = Span(counter[0], counter[0])
            return node.token_span
        if not node.children:
            raise ParseError(f"internal node {node.label!r} has no children")
        spans = [assign(child, depth + 1) for child in node.children]
        node.token_span = Span(spans[0].start, spans[-1].end)
        return node.token_span

    assign(root, 0)


def attach_constituency(sent: ParsedSentence, tree: ConstituencyNode) -> ParsedSentence:
    """Attach a constituency tree after checking token alignment."""
    leaves = tree.leaves()
    if len(leaves) != len(sent.tokens):
        raise StructureError(
            f"constituency tree has {len(leaves)} leaves but sentence has {len(sent.tokens)} tokens"
        )
    for leaf, tok in zip(leaves, sent.tokens):
        if leaf.word != tok.surface:
            raise StructureError(
                f"leaf {leaf.word!r} does not match token {tok.index} {tok.surface!r}"
            )
    sent.const_root = tree
    sent.quoted_spans = find_quoted_spans(sent)
    return sent


# ---------------------------------------------------------------------------
# Mentions and quotes


def find_quoted_spans(sent: ParsedSentence) -> list[Span]:
    """Spans strictly between paired quote tokens.

    Quotes are paired left to right; an unmatched opener is ignored.
    """
    spans = []
    open_at: int | None = None
    for tok in sent.tokens:
        if open_at is None:
            if tok.surface in OPEN_QUOTES:
                open_at = tok.index
        elif tok.surface in CLOSE_QUOTES:
            if tok.index > open_at + 1:
                spans.append(Span(open_at + 1, tok.index - 1))
            open_at = None
    return spans


def annotate_mentions(sent: ParsedSentence, lexicon: EntityLexicon) -> ParsedSentence:
    """Mark lexicon matches and numbers as mentions.

    Longest match wins; accepted mentions block shorter overlapping ones.
    Tokens tagged CD that fall outside every lexicon mention become number
    mentions with the literal surface as id.
    """
    n = len(sent.tokens)
    taken = [False] * (n + 1)
    mentions: list[EntityMention] = []
    max_len = max(lexicon.max_words, 1)
    for length in range(min(max_len, n), 0, -1):
        for start in range(1, n - length + 2):
            end = start + length - 1
            if any(taken[i] for i in range(start, end + 1)):
                continue
            surface = " ".join(sent.token(i).surface for i in range(start, end + 1))
            hit = lexicon.lookup(surface)
            if hit is None:
                continue
            cid, kind = hit
            mentions.append(EntityMention(Span(start, end), cid, kind))
            for i in range(start, end + 1):
                taken[i] = True
    for tok in sent.tokens:
        if tok.pos == "CD" and not taken[tok.index]:
            mentions.append(EntityMention(Span(tok.index, tok.index), normalize(tok.surface), "number"))
            taken[tok.index] = True
    mentions.sort(key=lambda m: (m.span.start, m.span.end))
    sent.mentions = mentions
    return sent
