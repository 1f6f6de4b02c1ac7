"""Command-line surface.

Subcommands cover the whole pipeline: ``extract`` and ``precision`` for
corpus evaluation, ``decompose``/``plan``/``answer`` for question handling,
``ablate`` for settings sweeps.  Exit codes: 0 success, 2 input problem,
3 decomposition failure, 4 planning or execution failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .decompose import decompose, tree_to_json
from .errors import DecompositionError, ExecutionError, ParseError, PlanningError, StructureError
from .execute import TextIndex, TripleStore, answer, answers_to_json
from .extract import extract_all
from .harness import (
    extract_corpus,
    load_corpus,
    load_parsed_sentences,
    precision_rows,
    read_label_file,
    rows_to_jsonl,
)
from .ingest import ParsedSentence
from .lexicons import Lexicons
from .querygen import build_plan, plan_to_json
from .settings import DEFAULT_SETTINGS_STRING, SettingSet, parse_settings

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DECOMPOSE = 3
EXIT_PLAN = 4

CONFIG_ENV = "HCQA_CONFIG"
CONFIG_KEYS = ("lexicon", "synlex", "kg", "corpus")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, corpus: bool = False) -> None:
        p.add_argument("--settings", default=None, help=f"extraction flags (default {DEFAULT_SETTINGS_STRING})")
        p.add_argument("--lexicon", default=None, help="entity lexicon TSV")
        p.add_argument("--synlex", default=None, help="synonym lexicon TSV")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        if corpus:
            p.add_argument("--corpus", default=None, help="directory of .conllu (+.ptb) files")

    p = sub.add_parser("extract", help="run relation extraction over a corpus")
    common(p, corpus=True)

    p = sub.add_parser("precision", help="precision table from a label file")
    p.add_argument("labels", help="TSV: category, subject, predicate, object, label")
    p.add_argument("--out", default=None)

    p = sub.add_parser("decompose", help="decompose a parsed question into a tree")
    p.add_argument("question", help=".conllu file with a sibling .ptb tree")
    common(p)

    p = sub.add_parser("plan", help="build the query plan for a parsed question")
    p.add_argument("question")
    common(p)

    p = sub.add_parser("answer", help="answer a parsed question over KG and corpus")
    p.add_argument("question")
    p.add_argument("--kg", default=None, help="triple store TSV")
    common(p, corpus=True)

    p = sub.add_parser("ablate", help="per-category relation counts per settings string")
    p.add_argument("--runs", default="A," + DEFAULT_SETTINGS_STRING, help="comma-separated settings strings")
    p.add_argument("--lexicon", default=None)
    p.add_argument("--synlex", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--corpus", default=None)
    return parser


def _config() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    unknown = set(cfg) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _resolve(args: argparse.Namespace, cfg: dict, key: str):
    value = getattr(args, key, None)
    return value if value is not None else cfg.get(key)


def _lexicons(args: argparse.Namespace, cfg: dict) -> Lexicons:
    return Lexicons.from_paths(
        entities=_resolve(args, cfg, "lexicon"),
        synonyms=_resolve(args, cfg, "synlex"),
    )


def _settings(args: argparse.Namespace) -> SettingSet:
    return parse_settings(getattr(args, "settings", None) or DEFAULT_SETTINGS_STRING)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _question_sentence(path: str, lexicons: Lexicons) -> ParsedSentence:
    sentences = load_parsed_sentences(path, lexicons)
    if not sentences:
        raise ParseError(f"no sentences in {path}")
    return sentences[0]


def cmd_extract(args: argparse.Namespace, cfg: dict) -> int:
    corpus_dir = _resolve(args, cfg, "corpus")
    if not corpus_dir:
        raise ValueError("extract needs --corpus")
    lexicons = _lexicons(args, cfg)
    rows = extract_corpus(load_corpus(corpus_dir, lexicons), _settings(args), lexicons)
    _emit(rows_to_jsonl(rows), args.out)
    return EXIT_OK


def cmd_precision(args: argparse.Namespace, cfg: dict) -> int:
    records = read_label_file(args.labels)
    lines = [
        "\t".join([category, str(correct), str(total), formatted])
        for category, correct, total, formatted in precision_rows(records)
    ]
    _emit("\n".join(lines) + "\n" if lines else "", args.out)
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace, cfg: dict) -> int:
    lexicons = _lexicons(args, cfg)
    sent = _question_sentence(args.question, lexicons)
    triples = extract_all(sent, _settings(args), lexicons)
    tree = decompose(triples, sent)
    _emit(json.dumps(tree_to_json(tree), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _build_plan(args: argparse.Namespace, cfg: dict):
    lexicons = _lexicons(args, cfg)
    sent = _question_sentence(args.question, lexicons)
    triples = extract_all(sent, _settings(args), lexicons)
    tree = decompose(triples, sent)
    return build_plan(tree, triples, lexicons.entities, lexicons.synonyms), lexicons


def cmd_plan(args: argparse.Namespace, cfg: dict) -> int:
    plan, _ = _build_plan(args, cfg)
    _emit(json.dumps(plan_to_json(plan), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_answer(args: argparse.Namespace, cfg: dict) -> int:
    plan, lexicons = _build_plan(args, cfg)
    kg_path = _resolve(args, cfg, "kg")
    store = TripleStore.from_tsv(kg_path) if kg_path else TripleStore()
    corpus_dir = _resolve(args, cfg, "corpus")
    index = None
    if corpus_dir:
        index = TextIndex(load_corpus(corpus_dir, lexicons), _settings(args), lexicons)
    result = answer(plan, store, index)
    _emit(json.dumps(answers_to_json(result), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace, cfg: dict) -> int:
    corpus_dir = _resolve(args, cfg, "corpus")
    if not corpus_dir:
        raise ValueError("ablate needs --corpus")
    lexicons = _lexicons(args, cfg)
    corpus = load_corpus(corpus_dir, lexicons)
    report = {}
    for run in args.runs.split(","):
        run = run.strip()
        settings = parse_settings(run)
        counts: dict[str, int] = {}
        for row in extract_corpus(corpus, settings, lexicons):
            counts[row["category"]] = counts.get(row["category"], 0) + 1
        report[str(settings)] = {"total": sum(counts.values()), "by_category": counts}
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "extract": cmd_extract,
    "precision": cmd_precision,
    "decompose": cmd_decompose,
    "plan": cmd_plan,
    "answer": cmd_answer,
    "ablate": cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config()
        return COMMANDS[args.command](args, cfg)
    except (ParseError, StructureError, ValueError, OSError) as exc:
        print(f"hcqa: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DecompositionError as exc:
        print(f"hcqa: {exc}", file=sys.stderr)
        return EXIT_DECOMPOSE
    except (PlanningError, ExecutionError) as exc:
        print(f"hcqa: {exc}", file=sys.stderr)
        return EXIT_PLAN


if __name__ == "__main__":
    sys.exit(main())
