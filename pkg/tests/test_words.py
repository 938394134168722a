import pytest

from tracmom.words import all_words, canonical_word, canonical_words


def test_reversal_pairs():
    assert canonical_word("YX") == "XY"


def test_cyclic_triple():
    # X^2 Y class: XXY ~ XYX ~ YXX
    assert canonical_word("XYX") == "XXY"
    assert canonical_word("YXX") == "XXY"


def test_degree_four_mixed():
    assert canonical_word("YXYX") == "XYXY"


def test_idempotent():
    for w in all_words(6):
        assert canonical_word(canonical_word(w)) == canonical_word(w)


def test_constant_on_classes_exhaustive():
    # every rotation of w and of its reverse maps to the same representative
    for w in all_words(6):
        rep = canonical_word(w)
        for u in (w, w[::-1]):
            for i in range(max(len(u), 1)):
                assert canonical_word(u[i:] + u[:i]) == rep


def test_degree_four_class_list():
    expected = ("", "X", "Y", "XX", "XY", "YY",
                "XXX", "XXY", "XYY", "YYY",
                "XXXX", "XXXY", "XXYY", "XYXY", "XYYY", "YYYY")
    assert canonical_words(4) == expected


def test_degree_five_classes():
    deg5 = [w for w in canonical_words(5) if len(w) == 5]
    assert deg5 == ["XXXXX", "XXXXY", "XXXYY", "XXYXY",
                    "XXYYY", "XYXYY", "XYYYY", "YYYYY"]


def test_rejects_bad_letters():
    with pytest.raises(ValueError):
        canonical_word("XZ")
