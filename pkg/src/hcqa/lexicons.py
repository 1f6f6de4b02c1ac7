"""Lexical resources: entity lexicon, synonym lexicon and word lists.

All files are plain UTF-8 text.  The entity lexicon is TSV with columns
``surface<TAB>canonical_id<TAB>kind`` where kind is ``entity``, ``class`` or
``number``.  The synonym lexicon is TSV ``lemma<TAB>synonym``, one pair per
line.  Word lists hold one entry per line; ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable

from .errors import ParseError

MENTION_KINDS = ("entity", "class", "number")

_WS = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Canonical form used for all lexical comparisons.

    Lowercases, maps underscores to spaces and collapses whitespace, so the
    surface ``Henry Fonda`` and the graph id ``Henry_Fonda`` compare equal.
    """
    return _WS.sub(" ", text.replace("_", " ")).strip().lower()


@dataclass
class EntityLexicon:
    """Surface-to-id map with longest-match lookup over token sequences."""

    entries: dict[str, tuple[str, str]] = field(default_factory=dict)

    @property
    def max_words(self) -> int:
        return max((s.count(" ") + 1 for s in self.entries), default=0)

    def add(self, surface: str, canonical_id: str, kind: str) -> None:
        if kind not in MENTION_KINDS:
            raise ValueError(f"unknown mention kind {kind!r}")
        self.entries[normalize(surface)] = (canonical_id, kind)

    def lookup(self, text: str) -> tuple[str, str] | None:
        """Return (canonical_id, kind) for a surface string, or None."""
        return self.entries.get(normalize(text))

    def lookup_id(self, canonical_id: str) -> list[str]:
        """All normalized surfaces mapping to the given id."""
        want = normalize(canonical_id)
        out = [s for s, (cid, _) in self.entries.items() if normalize(cid) == want]
        return sorted(out)


@dataclass
class SynonymLexicon:
    """Lemma-to-synonyms map used for predicate expansion."""

    entries: dict[str, list[str]] = field(default_factory=dict)

    def add(self, lemma: str, synonym: str) -> None:
        bucket = self.entries.setdefault(normalize(lemma), [])
        s = synonym.strip()
        if s and s not in bucket:
            bucket.append(s)

    def synonyms(self, lemma: str) -> list[str]:
        return list(self.entries.get(normalize(lemma), []))


def _lines(stream: IO[str] | Iterable[str]) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def load_entity_lexicon(stream: IO[str] | Iterable[str]) -> EntityLexicon:
    lex = EntityLexicon()
    for lineno, line in _lines(stream):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"entity lexicon line needs 3 tab-separated fields, got {len(parts)}", line=lineno)
        surface, cid, kind = (p.strip() for p in parts)
        if kind not in MENTION_KINDS:
            raise ParseError(f"unknown mention kind {kind!r}", line=lineno)
        lex.add(surface, cid, kind)
    return lex


def load_synonym_lexicon(stream: IO[str] | Iterable[str]) -> SynonymLexicon:
    lex = SynonymLexicon()
    for lineno, line in _lines(stream):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"synonym lexicon line needs 2 tab-separated fields, got {len(parts)}", line=lineno)
        lex.add(parts[0], parts[1])
    return lex


def load_wordlist(stream: IO[str] | Iterable[str]) -> frozenset[str]:
    words = set()
    for _, line in _lines(stream):
        words.add(normalize(line))
    return frozenset(words)


def _packaged(name: str) -> frozenset[str]:
    text = resources.files("hcqa").joinpath("data", name).read_text(encoding="utf-8")
    return load_wordlist(text.splitlines())


def default_copulars() -> frozenset[str]:
    return _packaged("copulars.txt")


def default_quantity_adjectives() -> frozenset[str]:
    return _packaged("quantity_adjectives.txt")


def default_expressions() -> frozenset[str]:
    return _packaged("expressions.txt")


@dataclass
class Lexicons:
    """Bundle of every lexical resource the pipeline consults."""

    entities: EntityLexicon = field(default_factory=EntityLexicon)
    synonyms: SynonymLexicon = field(default_factory=SynonymLexicon)
    copulars: frozenset[str] = field(default_factory=default_copulars)
    quantity_adjectives: frozenset[str] = field(default_factory=default_quantity_adjectives)
    expressions: frozenset[str] = field(default_factory=default_expressions)

    @classmethod
    def from_paths(
        cls,
        entities: str | Path | None = None,
        synonyms: str | Path | None = None,
        copulars: str | Path | None = None,
        quantity_adjectives: str | Path | None = None,
        expressions: str | Path | None = None,
    ) -> "Lexicons":
        lex = cls()
        if entities:
            with open(entities, encoding="utf-8") as fh:
                lex.entities = load_entity_lexicon(fh)
        if synonyms:
            with open(synonyms, encoding="utf-8") as fh:
                lex.synonyms = load_synonym_lexicon(fh)
        if copulars:
            with open(copulars, encoding="utf-8") as fh:
                lex.copulars = load_wordlist(fh)
        if quantity_adjectives:
            with open(quantity_adjectives, encoding="utf-8") as fh:
                lex.quantity_adjectives = load_wordlist(fh)
        if expressions:
            with open(expressions, encoding="utf-8") as fh:
                lex.expressions = load_wordlist(fh)
        return lex
