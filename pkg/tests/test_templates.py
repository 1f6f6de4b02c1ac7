"""Schema checks for the 46-template table."""

import pytest

from hcqa import templates as T


def test_every_id_has_a_category():
    assert sorted(T.TEMPLATE_CATEGORY) == list(range(1, 47))


def test_category_ranges():
    def cat_range(lo, hi):
        return {T.category_of(i) for i in range(lo, hi + 1)}

    assert cat_range(1, 17) == {T.VERBAL}
    assert cat_range(18, 27) == {T.POSS_ADJ_WHOSE}
    assert cat_range(28, 35) == {T.NOUN_PHRASE}
    assert cat_range(36, 39) == {T.GENITIVE_PREPOSITION}
    assert cat_range(40, 41) == {T.APPOSITIVE}
    assert cat_range(42, 46) == {T.COMPARATIVE_SUPERLATIVE}


def test_categories_tuple_is_complete_and_ordered():
    assert T.CATEGORIES == (
        "Verbal",
        "PossAdjWhose",
        "NounPhrase",
        "GenitivePreposition",
        "Appositive",
        "ComparativeSuperlative",
    )
    assert set(T.TEMPLATE_CATEGORY.values()) == set(T.CATEGORIES)


@pytest.mark.parametrize("bad_id", [0, 47, -3, 1000])
def test_category_of_rejects_unknown_ids(bad_id):
    with pytest.raises(ValueError):
        T.category_of(bad_id)


def test_is_key_matches_the_key_set():
    keys = {tid for tid in range(1, 47) if T.is_key(tid)}
    assert keys == T.KEY_TEMPLATES
    assert keys == {3, 6, 7, 10, 12, 14, 16, 18, 20, 22, 28, 36, 38, 40, 42, 43, 44, 45, 46}
    with pytest.raises(ValueError):
        T.is_key(99)


def test_every_pattern_row_has_a_key_member():
    for pattern, row in T.PATTERN_ROWS.items():
        assert any(tid in T.KEY_TEMPLATES for tid in row), pattern


def test_pattern_rows_partition_the_table():
    # P9 and P10 share a row; every other row is disjoint and together they
    # cover all 46 ids.
    assert T.PATTERN_ROWS["P9"] == T.PATTERN_ROWS["P10"] == (36, 37, 38, 39)
    seen = []
    for pattern, row in T.PATTERN_ROWS.items():
        if pattern == "P10":
            continue
        seen.extend(row)
    assert sorted(seen) == list(range(1, 47))


def test_rows_stay_inside_one_category():
    for pattern, row in T.PATTERN_ROWS.items():
        cats = {T.category_of(tid) for tid in row}
        assert len(cats) == 1, pattern


def test_conditional_templates_sit_in_verbal_and_possessive_rows():
    assert T.CONDITIONAL_TEMPLATES == {14, 15, 22, 23, 26, 27}
    assert T.CONDITIONAL_TEMPLATES < set(T.PATTERN_ROWS["P4"]) | set(T.PATTERN_ROWS["P7"])
