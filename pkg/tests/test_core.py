import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ranksim import (
    Document,
    LabelDistribution,
    ParseError,
    RankedExplanation,
    normalize_weights,
    parse_explanation,
    serialize_explanation,
)

words = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"), max_codepoint=0x2FF),
    min_size=1,
    max_size=8,
)
finite_weights = st.floats(allow_nan=False, allow_infinity=False, width=64)


def expl_strategy(min_size=1, max_size=10):
    return st.dictionaries(words, finite_weights, min_size=min_size, max_size=max_size).map(
        lambda d: RankedExplanation(list(d.items()))
    )


class TestRankedExplanation:
    def test_canonical_order_by_abs_weight(self):
        e = RankedExplanation([("low", 0.1), ("big", -2.0), ("mid", 1.0)])
        assert e.features == ("big", "mid", "low")

    def test_tie_break_is_lexicographic(self):
        e = RankedExplanation([("zeta", 1.0), ("alpha", -1.0), ("mid", 1.5)])
        assert e.features == ("mid", "alpha", "zeta")

    def test_duplicate_feature_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            RankedExplanation([("a", 1.0), ("a", 0.5)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            RankedExplanation([])

    def test_nonfinite_weight_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            RankedExplanation([("a", float("nan"))])

    def test_whitespace_feature_rejected(self):
        with pytest.raises(ValueError, match="whitespace"):
            RankedExplanation([("a b", 1.0)])

    def test_rank_of(self):
        e = RankedExplanation([("a", 3.0), ("b", 2.0), ("c", 1.0)])
        assert e.rank_of("b") == 1
        assert e.rank_of("z") is None
        assert RankedExplanation([("a", 1.0)]).rank_of("a") == 0

    @given(expl_strategy())
    def test_resort_is_noop(self, e):
        assert RankedExplanation(e.entries) == e


class TestNormalizeWeights:
    def test_hand_example(self):
        e = RankedExplanation([("a", 0.25), ("b", 0.10), ("c", 0.05)])
        assert normalize_weights(e) == pytest.approx((0.625, 0.25, 0.125), abs=1e-12)

    def test_single_feature(self):
        assert normalize_weights(RankedExplanation([("a", 1.77)])) == (1.0,)

    def test_all_zero_falls_back_to_uniform(self):
        e = RankedExplanation([("a", 0.0), ("b", 0.0)])
        assert normalize_weights(e) == (0.5, 0.5)

    @given(expl_strategy())
    def test_sums_to_one_and_nonnegative(self, e):
        w = normalize_weights(e)
        assert all(x >= 0 for x in w)
        assert math.fsum(w) == pytest.approx(1.0, abs=1e-9)

    @given(
        st.dictionaries(
            words,
            st.floats(min_value=-1e12, max_value=1e12).filter(
                lambda x: x == 0.0 or abs(x) > 1e-9
            ),
            min_size=1,
            max_size=10,
        ),
        st.floats(min_value=1e-6, max_value=1e6),
    )
    def test_scale_invariance(self, d, c):
        e = RankedExplanation(list(d.items()))
        scaled = RankedExplanation([(f, w * c) for f, w in e.entries])
        w0 = normalize_weights(e)
        w1 = normalize_weights(scaled)
        assert scaled.features == e.features
        assert all(abs(x - y) <= 1e-9 for x, y in zip(w0, w1))


class TestExplanationTsv:
    def test_parse_two_rows(self):
        e = parse_explanation("heartburn\t1.77\neat\t0.59")
        assert e.entries == (("heartburn", 1.77), ("eat", 0.59))

    def test_serialize_then_parse_roundtrip(self):
        e = RankedExplanation([("word", 0.1), ("other", -1.2345678901234567)])
        assert parse_explanation(serialize_explanation(e)) == e

    def test_parse_then_serialize_is_identity_on_canonical_text(self):
        text = "heartburn\t1.77\neat\t0.59\n"
        assert serialize_explanation(parse_explanation(text)) == text

    @given(expl_strategy())
    def test_roundtrip_exact(self, e):
        assert parse_explanation(serialize_explanation(e)) == e

    def test_nan_weight_rejected_with_line(self):
        with pytest.raises(ParseError, match="2"):
            parse_explanation("ok\t1.0\nword\tNaN")

    def test_malformed_line_number_reported(self):
        with pytest.raises(ParseError, match="3"):
            parse_explanation("a\t1.0\nb\t0.5\nnotabs")

    def test_duplicate_feature_reported(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_explanation("a\t1.0\na\t0.5")

    def test_non_numeric_weight(self):
        with pytest.raises(ParseError, match="non-numeric"):
            parse_explanation("a\tpotato")


class TestDocument:
    def test_from_raw_splits_whitespace(self):
        d = Document.from_raw("Hello  world,  again")
        assert d.tokens == ("Hello", "world,", "again")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Document.from_raw("   ")

    def test_tokens_must_match_raw(self):
        with pytest.raises(ValueError):
            Document(tokens=("a",), raw="a b")

    def test_with_replacement(self):
        d = Document.from_raw("a b c")
        d2 = d.with_replacement(1, "x")
        assert d2.tokens == ("a", "x", "c")
        assert d2.raw == "a x c"
        assert d.tokens == ("a", "b", "c")


class TestLabelDistribution:
    def test_needs_two_classes(self):
        with pytest.raises(ValueError):
            LabelDistribution({0: 1.0})

    def test_must_sum_to_one(self):
        with pytest.raises(ValueError):
            LabelDistribution({0: 0.7, 1: 0.2})

    def test_argmax_tie_goes_to_lowest_id(self):
        assert LabelDistribution({1: 0.5, 0: 0.5}).argmax_class() == 0
        assert LabelDistribution({0: 0.2, 1: 0.4, 2: 0.4}).argmax_class() == 1
