"""Regenerate the committed files under tests/data from the sentence bank.

Run from the repository root:

    python3 tests/data/make_fixtures.py

The outputs are deterministic, so a rerun only changes files when the
sentence bank itself changed.
"""

from __future__ import annotations

import io
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))
sys.path.insert(0, str(HERE.parent.parent / "src"))

import sentbank as sb  # noqa: E402
from builders import conllu_text  # noqa: E402
from hcqa.ingest import read_conllu, serialize_conllu  # noqa: E402

KG_ROWS = [
    ("Trevor Brolin", "children", "Josh Brolin"),
    ("Eden Brolin", "children", "Josh Brolin"),
    ("Josh Brolin", "type-of", "actor"),
    ("Sydney Chaplin", "half brother", "Charlie Chaplin"),
    ("Wheeler Dryden", "half brother", "Charlie Chaplin"),
    ("London", "type-of", "city"),
    ("Athens", "type-of", "city"),
    ("Dubai", "type-of", "city"),
    ("Athens", "hosted", "Olympics"),
    ("London", "hosted", "Olympics"),
    ("London", "hosted", "Expo"),
    ("Dubai", "hosted", "Expo"),
]

LEXICON_ROWS = [
    ("Dan White", "Dan_White", "entity"),
    ("Milk", "Milk", "entity"),
    ("Charli Chaplin", "Charlie_Chaplin", "entity"),
    ("Nordstrom Inc.", "Nordstrom_Inc.", "entity"),
    ("Red Mountain", "Red_Mountain", "entity"),
    ("Obama", "Obama", "entity"),
    ("Australia", "Australia", "entity"),
    ("actor", "actor", "class"),
    ("city", "city", "class"),
    ("cities", "city", "class"),
]

SYNONYM_ROWS = [
    ("play", "portray"),
    ("host", "stage"),
]

QUESTIONS = {
    "chaplin": (sb.CHAPLIN_ROWS, sb.CHAPLIN_TREE),
    "children": (sb.Q2_ROWS, sb.Q2_TREE),
    "cities_or": (sb.CITIES_OR_ROWS, sb.CITIES_OR_TREE),
    "cities_and": (sb.CITIES_AND_ROWS, sb.CITIES_AND_TREE),
}

# Passage text for "Milk plays Dan White ." below is deliberately wrong; the
# class constraint on the join variable has to reject it.
MILK_JUNK_ROWS = [
    ("Milk", "NNP", 2, "nsubj"),
    ("plays", "VBZ", 0, "root", "play"),
    ("Dan", "NNP", 2, "obj"),
    ("White", "NNP", 3, "flat"),
    (".", ".", 2, "punct"),
]

PASSAGES = {
    "p01": (sb.JOSH_BROLIN_ROWS, None),
    "p02": (sb.SYDNEY_ROWS, None),
    "p03": (sb.WHEELER_ROWS, None),
    "p04": (MILK_JUNK_ROWS, None),
    "p05": (sb.NORDSTROM_ROWS, sb.NORDSTROM_TREE),
    "p06": (sb.CHAIRMAN_ROWS, None),
    "p07": (sb.BOND_ROWS, sb.BOND_TREE),
    "p08": (sb.LAKES_ROWS, None),
    "p09": (sb.DAUGHTER_OBAMA_ROWS, None),
    "p10": (sb.STATUE_ROWS, None),
}


def write_conllu(path: Path, rows, sent_id: str, ptb: str | None) -> None:
    sentences = read_conllu(io.StringIO(conllu_text(rows, sent_id=sent_id)))
    path.write_text(serialize_conllu(sentences), encoding="utf-8")
    tree_path = path.with_suffix(".ptb")
    if ptb is not None:
        tree_path.write_text(ptb + "\n", encoding="utf-8")
    elif tree_path.exists():
        tree_path.unlink()


def tsv(rows) -> str:
    return "".join("\t".join(row) + "\n" for row in rows)


def main() -> None:
    (HERE / "questions").mkdir(exist_ok=True)
    (HERE / "corpus").mkdir(exist_ok=True)

    (HERE / "kg.tsv").write_text(tsv(KG_ROWS), encoding="utf-8")
    (HERE / "lexicon.tsv").write_text(tsv(LEXICON_ROWS), encoding="utf-8")
    (HERE / "synonyms.tsv").write_text(tsv(SYNONYM_ROWS), encoding="utf-8")

    for name, (rows, ptb) in QUESTIONS.items():
        write_conllu(HERE / "questions" / f"{name}.conllu", rows, name, ptb)
    for pid, (rows, ptb) in PASSAGES.items():
        write_conllu(HERE / "corpus" / f"{pid}.conllu", rows, pid, ptb)
    print(f"wrote fixtures under {HERE}")


if __name__ == "__main__":
    main()
