"""Hybrid complex question answering over a knowledge graph and free text.

The pipeline: parse ingestion, clause and phrase based relation extraction,
question decomposition into a tree of sub-questions, query planning and
hybrid execution with provenance.
"""

from .decompose import CompositeQuestionTree, SubQuestion, Vertex, decompose
from .errors import (
    ContractViolation,
    DecompositionError,
    ExecutionError,
    HcqaError,
    ParseError,
    PlanningError,
    StructureError,
)
from .execute import AnswerSet, TextIndex, TripleStore, answer
from .extract import PatternInstance, Phrase, TriplePattern, Var, extract_all, extract_instances
from .ingest import ParsedSentence, read_conllu, read_ptb
from .lexicons import EntityLexicon, Lexicons, SynonymLexicon, normalize
from .querygen import QueryPlan, build_plan
from .settings import DEFAULT_SETTINGS, SettingSet, parse_settings

__version__ = "0.1.0"

__all__ = [
    "AnswerSet",
    "CompositeQuestionTree",
    "ContractViolation",
    "DecompositionError",
    "EntityLexicon",
    "ExecutionError",
    "HcqaError",
    "Lexicons",
    "ParseError",
    "ParsedSentence",
    "PatternInstance",
    "Phrase",
    "PlanningError",
    "QueryPlan",
    "SettingSet",
    "StructureError",
    "SubQuestion",
    "SynonymLexicon",
    "TextIndex",
    "TriplePattern",
    "TripleStore",
    "Var",
    "Vertex",
    "DEFAULT_SETTINGS",
    "answer",
    "build_plan",
    "decompose",
    "extract_all",
    "extract_instances",
    "normalize",
    "parse_settings",
    "read_conllu",
    "read_ptb",
    "__version__",
]
