import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oprules.lexicon import (
    DEFAULT_LEXICON,
    DEFAULT_TABLE,
    Lexicon,
    Operator,
    OperatorCategory,
    classify_mismatch,
    extract_operators,
    op,
    operator_alignment_score,
    operator_similarity,
)


def tokens(text):
    return {o.token for o in extract_operators(text)}


class TestExtraction:
    def test_basic_implication_and_delay(self):
        ops = extract_operators("req |-> ##2 gnt")
        assert {(o.token, o.category) for o in ops} == {
            ("|->", OperatorCategory.TEMPORAL_IMPLICATION),
            ("##m", OperatorCategory.TEMPORAL_DELAY),
        }

    def test_empty_text(self):
        assert extract_operators("") == frozenset()

    def test_four_category_mix(self):
        ops = extract_operators("a && $rose(b) |=> s_eventually c")
        assert {(o.token, o.category) for o in ops} == {
            ("&&", OperatorCategory.COMBINATIONAL),
            ("$rose", OperatorCategory.TEMPORAL_SAMPLING),
            ("|=>", OperatorCategory.TEMPORAL_IMPLICATION),
            ("s_eventually", OperatorCategory.TEMPORAL_LIVENESS),
        }

    def test_longest_match_first(self):
        # |=> must never be read as | then =>
        assert tokens("a |=> b") == {"|=>"}
        assert tokens("a || b") == {"||"}
        assert tokens("a !== b") == {"!=="}
        assert tokens("!a") == {"!"}

    def test_delay_shapes_canonicalize(self):
        assert tokens("##3") == tokens("##7") == {"##m"}
        assert tokens("[2:5]") == {"[m:n]"}
        assert tokens("##[1:3]") == {"[m:n]"}

    def test_inequality_family_folds_together(self):
        assert tokens("a != b") == tokens("a !== b") == {"!=="}
        assert tokens("a === b") == tokens("a == b") == {"=="}

    def test_clocking_and_reset_shapes(self):
        assert tokens("@(posedge clk_core) x") == {"@(posedge clk)"}
        assert tokens("disable iff (!rst_n) x") == {"disable iff(rst)"}

    def test_line_comments_ignored(self):
        assert tokens("a // |-> hidden\n&& b") == {"&&"}

    def test_word_operators_respect_word_boundaries(self):
        assert tokens("headstrong strongly") == set()
        assert tokens("strong") == {"strong"}
        assert tokens("xs_always") == set()

    def test_total_over_arbitrary_text(self):
        assert extract_operators("%%% ??? éé 12'hFF") == frozenset()

    def test_canonical_tokens_rescan_to_themselves(self):
        for token in DEFAULT_TABLE:
            assert tokens(token) == {token}, token

    @given(st.text(max_size=200))
    def test_reconstruction_is_stable(self, text):
        first = extract_operators(text)
        rebuilt = " ".join(sorted(o.token for o in first))
        assert extract_operators(rebuilt) == first


class TestSimilarity:
    def test_identical(self):
        assert operator_similarity(op("|->"), op("|->")) == 1.0

    def test_same_category(self):
        assert operator_similarity(op("|->"), op("|=>")) == 0.5

    def test_cross_category(self):
        assert operator_similarity(op("|->"), op("&&")) == 0.0

    def test_shaped_delays_same_category(self):
        assert operator_similarity(op("##m"), op("[m:n]")) == 0.5

    @given(st.sampled_from(sorted(DEFAULT_TABLE)), st.sampled_from(sorted(DEFAULT_TABLE)))
    def test_symmetric_and_reflexive(self, a, b):
        u, v = op(a), op(b)
        assert operator_similarity(u, v) == operator_similarity(v, u)
        assert operator_similarity(u, u) == 1.0


def alignment_oracle(init, trace):
    """Brute-force evaluation with exact rationals, converted to float last."""
    if not init and not trace:
        return 1.0
    if not init:
        return 0.0
    union = {o.token for o in init} | {o.token for o in trace}
    total = Fraction(0)
    for u in init:
        best = Fraction(0)
        for v in trace:
            best = max(best, Fraction(operator_similarity(u, v)))
        total += best
    return float(total / len(union))


operator_sets = st.frozensets(
    st.sampled_from([op(t) for t in sorted(DEFAULT_TABLE)]), max_size=8
)


class TestAlignment:
    def test_identical_sets(self):
        s = frozenset({op("|->"), op("##m")})
        assert operator_alignment_score(s, s) == 1.0

    def test_hand_case_quarter(self):
        assert operator_alignment_score(
            frozenset({op("|->")}), frozenset({op("|=>")})
        ) == 0.25

    def test_disjoint_categories(self):
        assert operator_alignment_score(
            frozenset({op("&&")}), frozenset({op("|->")})
        ) == 0.0

    def test_empty_conventions(self):
        assert operator_alignment_score(frozenset(), frozenset()) == 1.0
        assert operator_alignment_score(frozenset(), frozenset({op("|->")})) == 0.0
        assert operator_alignment_score(frozenset({op("|->")}), frozenset()) == 0.0

    @given(operator_sets, operator_sets)
    def test_matches_bruteforce_oracle_exactly(self, init, trace):
        assert operator_alignment_score(init, trace) == alignment_oracle(init, trace)

    @given(operator_sets, operator_sets)
    def test_bounded(self, init, trace):
        assert 0.0 <= operator_alignment_score(init, trace) <= 1.0


class TestClassifyMismatch:
    def test_keyed_to_generated_side(self):
        cats = classify_mismatch(tokens_set("|=>"), tokens_set("|->"))
        assert cats == [OperatorCategory.TEMPORAL_IMPLICATION]

    def test_no_mismatch(self):
        s = tokens_set("|-> ##2")
        assert classify_mismatch(s, s) == []

    def test_extra_delay_in_generated(self):
        cats = classify_mismatch(tokens_set("|-> ##2"), tokens_set("|->"))
        assert cats == [OperatorCategory.TEMPORAL_DELAY]

    def test_missing_clocking_reported_as_miscellaneous(self):
        generated = extract_operators("req |-> gnt")
        golden = extract_operators("@(posedge clk) req |-> gnt")
        assert classify_mismatch(generated, golden) == [OperatorCategory.MISCELLANEOUS]

    def test_fixed_category_order(self):
        generated = extract_operators("a && $rose(b) |=> ##1 c")
        golden = extract_operators("x s_eventually y")  # none of the generated ops
        cats = classify_mismatch(generated, golden)
        assert cats == [
            OperatorCategory.TEMPORAL_IMPLICATION,
            OperatorCategory.TEMPORAL_DELAY,
            OperatorCategory.TEMPORAL_SAMPLING,
            OperatorCategory.COMBINATIONAL,
        ]

    @given(operator_sets)
    def test_self_mismatch_is_empty(self, ops):
        assert classify_mismatch(ops, ops) == []


def tokens_set(text):
    return extract_operators(text)


class TestTableExportImport:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "table.json"
        DEFAULT_LEXICON.dump(path)
        loaded = Lexicon.load(path)
        assert loaded.table == DEFAULT_LEXICON.table
        assert loaded.extract("req |-> ##2 gnt") == extract_operators("req |-> ##2 gnt")

    def test_json_shape_is_token_to_category(self, tmp_path):
        doc = json.loads(DEFAULT_LEXICON.to_json())
        assert doc["|->"] == "temporal_implication"
        assert set(doc) == set(DEFAULT_TABLE)

    def test_user_extension_token(self):
        table = dict(DEFAULT_TABLE)
        table["throughout"] = OperatorCategory.TEMPORAL_LIVENESS
        custom = Lexicon(table)
        assert {o.token for o in custom.extract("a throughout b")} == {"throughout"}
        # the default table does not know it
        assert extract_operators("a throughout b") == frozenset()

    def test_unknown_token_rejected(self):
        with pytest.raises(KeyError):
            DEFAULT_LEXICON.operator("~>")


class TestOperatorValue:
    def test_category_lookup_helper(self):
        assert op("s_always").category is OperatorCategory.TEMPORAL_LIVENESS

    def test_exactly_six_categories(self):
        assert len(OperatorCategory) == 6
        assert {o.category for o in (op(t) for t in DEFAULT_TABLE)} == set(OperatorCategory)

    def test_operator_is_hashable_value(self):
        assert len({op("|->"), op("|->"), op("|=>")}) == 2
        assert Operator("|->", OperatorCategory.TEMPORAL_IMPLICATION) == op("|->")
