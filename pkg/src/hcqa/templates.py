"""The fixed schema of triple templates.

Forty-six templates grouped into six relation categories.  Key templates are
the ones whose phrase arguments follow sentence order; they anchor
sub-question generation, while the remaining row members serve as fallback
candidates at query time.
"""

from __future__ import annotations

VERBAL = "Verbal"
POSS_ADJ_WHOSE = "PossAdjWhose"
NOUN_PHRASE = "NounPhrase"
GENITIVE_PREPOSITION = "GenitivePreposition"
APPOSITIVE = "Appositive"
COMPARATIVE_SUPERLATIVE = "ComparativeSuperlative"

CATEGORIES = (
    VERBAL,
    POSS_ADJ_WHOSE,
    NOUN_PHRASE,
    GENITIVE_PREPOSITION,
    APPOSITIVE,
    COMPARATIVE_SUPERLATIVE,
)

# Template id -> category.
TEMPLATE_CATEGORY: dict[int, str] = {}
for _tid in range(1, 18):
    TEMPLATE_CATEGORY[_tid] = VERBAL
for _tid in range(18, 28):
    TEMPLATE_CATEGORY[_tid] = POSS_ADJ_WHOSE
for _tid in range(28, 36):
    TEMPLATE_CATEGORY[_tid] = NOUN_PHRASE
for _tid in range(36, 40):
    TEMPLATE_CATEGORY[_tid] = GENITIVE_PREPOSITION
for _tid in range(40, 42):
    TEMPLATE_CATEGORY[_tid] = APPOSITIVE
for _tid in range(42, 47):
    TEMPLATE_CATEGORY[_tid] = COMPARATIVE_SUPERLATIVE

# Templates whose phrase arguments keep sentence order.
KEY_TEMPLATES = frozenset({3, 6, 7, 10, 12, 14, 16, 18, 20, 22, 28, 36, 38, 40, 42, 43, 44, 45, 46})

# Pattern id -> template row.  Bracketed (conditional) members are part of
# the row; the extractor decides whether their side condition holds.
PATTERN_ROWS: dict[str, tuple[int, ...]] = {
    "P1": (1, 2, 3, 4, 5),
    "P2": (6,),
    "P3": (7, 8, 9),
    "P4": (10, 11, 12, 13, 14, 15),
    "P5": (16, 17),
    "P6": (18, 19),
    "P7": (20, 21, 22, 23, 24, 25, 26, 27),
    "P8": (28, 29, 30, 31, 32, 33, 34, 35),
    "P9": (36, 37, 38, 39),
    "P10": (36, 37, 38, 39),
    "P11": (40, 41),
    "P12": (42,),
    "P13": (43, 44),
    "P14": (45,),
    "P15": (46,),
}

CONDITIONAL_TEMPLATES = frozenset({14, 15, 22, 23, 26, 27})


def category_of(template_id: int) -> str:
    try:
        return TEMPLATE_CATEGORY[template_id]
    except KeyError:
        raise ValueError(f"unknown template id T{template_id}") from None


def is_key(template_id: int) -> bool:
    category_of(template_id)
    return template_id in KEY_TEMPLATES
