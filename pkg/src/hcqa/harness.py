"""Corpus-scale evaluation: extraction runs, labeled records, precision tables.

Precision is the number of relations a human marked correct over the number
extracted, kept as an exact rational until the final formatting step so the
table never accumulates float error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

from . import templates
from .errors import ParseError
from .extract import PatternInstance, extract_instances
from .ingest import ParsedSentence, annotate_mentions, attach_constituency, read_conllu, read_ptb_trees
from .lexicons import Lexicons
from .settings import SettingSet

LABELS = ("true", "false", "unlabeled")


@dataclass(frozen=True)
class EvalRecord:
    """One extracted relation with its human label."""

    category: str
    triple: tuple[str, str, str]
    label: str
    annotator_source: str = ""

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")


def read_label_file(path: str | Path) -> list[EvalRecord]:
    """Read annotations: category, subject, predicate, object, label (TSV)."""
    records = []
    src = str(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ParseError("expected 5 tab-separated fields", line=lineno)
            category, s, p, o, label = parts
            if label not in LABELS:
                raise ParseError(f"unknown label {label!r}", line=lineno)
            records.append(EvalRecord(category, (s, p, o), label, src))
    return records


def compute_precision(records: list[EvalRecord]) -> dict[str, Fraction | None]:
    """Correct over total per category; None where nothing was labeled."""
    counts: dict[str, list[int]] = {}
    for r in records:
        if r.label == "unlabeled":
            continue
        pair = counts.setdefault(r.category, [0, 0])
        pair[1] += 1
        if r.label == "true":
            pair[0] += 1
    out: dict[str, Fraction | None] = {}
    for category in sorted(counts, key=_category_order):
        correct, total = counts[category]
        out[category] = Fraction(correct, total) if total else None
    return out


def overall_precision(records: list[EvalRecord]) -> Fraction | None:
    labeled = [r for r in records if r.label != "unlabeled"]
    if not labeled:
        return None
    correct = sum(1 for r in labeled if r.label == "true")
    return Fraction(correct, len(labeled))


def format_ratio(ratio: Fraction | None, places: int = 4) -> str:
    if ratio is None:
        return "n/a"
    quantum = Decimal(1).scaleb(-places)
    value = (Decimal(ratio.numerator) / Decimal(ratio.denominator)).quantize(
        quantum, rounding=ROUND_HALF_UP
    )
    return str(value)


def precision_rows(records: list[EvalRecord]) -> list[tuple[str, int, int, str]]:
    """(category, correct, total, formatted) rows for tabular output."""
    table = compute_precision(records)
    rows = []
    for category, ratio in table.items():
        labeled = [r for r in records if r.category == category and r.label != "unlabeled"]
        correct = sum(1 for r in labeled if r.label == "true")
        rows.append((category, correct, len(labeled), format_ratio(ratio)))
    return rows


def _category_order(category: str) -> tuple[int, str]:
    try:
        return (templates.CATEGORIES.index(category), category)
    except ValueError:
        return (len(templates.CATEGORIES), category)


# ---------------------------------------------------------------------------
# Corpus loading


def load_parsed_sentences(conllu_path: str | Path, lexicons: Lexicons) -> list[ParsedSentence]:
    """Read one .conllu file, pairing a sibling .ptb tree file when present."""
    conllu_path = Path(conllu_path)
    with open(conllu_path, encoding="utf-8") as fh:
        sentences = read_conllu(fh)
    ptb_path = conllu_path.with_suffix(".ptb")
    if ptb_path.exists():
        trees = read_ptb_trees(ptb_path.read_text(encoding="utf-8"))
        if len(trees) != len(sentences):
            raise ParseError(
                f"{ptb_path.name} has {len(trees)} trees for {len(sentences)} sentences"
            )
        for sent, tree in zip(sentences, trees):
            attach_constituency(sent, tree)
    for sent in sentences:
        annotate_mentions(sent, lexicons.entities)
    return sentences


def load_corpus(directory: str | Path, lexicons: Lexicons) -> dict[str, list[ParsedSentence]]:
    """All .conllu files under a directory, keyed by file stem."""
    directory = Path(directory)
    corpus = {}
    for path in sorted(directory.glob("*.conllu")):
        corpus[path.stem] = load_parsed_sentences(path, lexicons)
    return corpus


# ---------------------------------------------------------------------------
# Extraction runs


def instance_row(passage: str, sent: ParsedSentence, inst: PatternInstance) -> dict:
    display = inst.display()
    if display is None and inst.triples:
        keys = inst.key_triples() or inst.triples
        display = keys[0].render()
    return {
        "passage": passage,
        "sentence": sent.sent_id or sent.text,
        "category": inst.category,
        "pattern": inst.pattern,
        "span": [inst.span.start, inst.span.end],
        "display": list(display) if display else None,
        "triples": [
            {"template": t.template_id, "key": t.is_key, "triple": list(t.render())}
            for t in inst.triples
        ],
    }


def extract_corpus(
    corpus: dict[str, list[ParsedSentence]], settings: SettingSet, lexicons: Lexicons
) -> list[dict]:
    """One row per extracted relation, in a stable passage/sentence order."""
    rows = []
    for passage in sorted(corpus):
        for sent in corpus[passage]:
            for inst in extract_instances(sent, settings, lexicons):
                rows.append(instance_row(passage, sent, inst))
    return rows


def rows_to_jsonl(rows: list[dict]) -> str:
    return "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)
