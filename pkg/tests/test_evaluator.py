import pytest

from oprules.errors import UnknownSignal
from oprules.semantics import eval_assertion, parse_sva
from oprules.semantics.evaluator import Trace, make_trace


def holds(text, **signals):
    return eval_assertion(parse_sva(text), make_trace(signals))


class TestTraceType:
    def test_every_cycle_assigns_every_signal(self):
        with pytest.raises(ValueError):
            Trace(("a", "b"), 2, {"a": (True, False), "b": (True,)})

    def test_length_at_least_one(self):
        with pytest.raises(ValueError):
            Trace(("a",), 0, {"a": ()})

    def test_unknown_signal_raises(self):
        with pytest.raises(UnknownSignal):
            holds("req |-> gnt", req=[1])


class TestImplications:
    def test_overlap_same_cycle(self):
        assert holds("req |-> gnt", req=[1], gnt=[1])
        assert not holds("req |-> gnt", req=[1], gnt=[0])

    def test_overlap_vacuous_on_idle(self):
        assert holds("req |-> gnt", req=[0, 0], gnt=[0, 0])

    def test_nonoverlap_checks_next_cycle(self):
        # gnt must hold at cycle 1, not cycle 0
        assert not holds("req |=> gnt", req=[1, 0], gnt=[1, 0])
        assert holds("req |=> gnt", req=[1, 0], gnt=[0, 1])

    def test_nonoverlap_obligation_past_end_fails(self):
        assert not holds("req |=> gnt", req=[0, 1], gnt=[1, 1])

    def test_every_antecedent_match_is_checked(self):
        assert not holds("req |-> gnt", req=[1, 1], gnt=[1, 0])


class TestDelays:
    def test_fixed_delay(self):
        assert holds("req |-> ##2 gnt", req=[1, 0, 0], gnt=[0, 0, 1])
        assert not holds("req |-> ##2 gnt", req=[1, 0, 0], gnt=[0, 1, 0])

    def test_delay_obligation_past_end_fails(self):
        assert not holds("req |-> ##2 gnt", req=[0, 1], gnt=[1, 1])

    def test_window_any_point(self):
        for hit in (1, 2, 3):
            gnt = [0, 0, 0, 0]
            gnt[hit] = 1
            assert holds("req |-> ##[1:3] gnt", req=[1, 0, 0, 0], gnt=gnt), hit
        assert not holds("req |-> ##[1:3] gnt", req=[1, 0, 0, 0], gnt=[1, 0, 0, 0])

    def test_zero_delay_fuses(self):
        assert holds("a ##0 b", a=[1], b=[1])
        assert not holds("a ##0 b", a=[1], b=[0])

    def test_sequence_as_property_is_strong(self):
        # the sequence must match at every start cycle; the last start is
        # always a pending (hence failing) match for a multi-cycle sequence
        assert not holds("a ##1 b", a=[1], b=[1])
        assert not holds("a ##1 b", a=[1, 1], b=[1, 1])
        assert holds("a", a=[1, 1])
        assert not holds("a", a=[1, 0])


class TestLiveness:
    def test_eventually_within_trace(self):
        assert holds("s_eventually gnt", gnt=[0, 0, 1])
        assert not holds("s_eventually gnt", gnt=[0, 0, 0])

    def test_eventually_under_implication(self):
        assert holds("req |-> s_eventually gnt", req=[1, 0, 0], gnt=[0, 0, 1])
        assert not holds("req |-> s_eventually gnt", req=[0, 0, 1], gnt=[1, 1, 0])

    def test_always_from_start_cycle(self):
        assert holds("lock |-> s_always !err", lock=[0, 1, 0], err=[1, 0, 0])
        assert not holds("lock |-> s_always !err", lock=[0, 1, 0], err=[0, 0, 1])


class TestSampling:
    def test_rose_with_false_prehistory(self):
        # at cycle 0 the prior value reads false, so rose == current value
        assert holds("$rose(a)", a=[1])
        assert not holds("$rose(a)", a=[0])
        assert holds("$rose(a) |-> b", a=[0, 1], b=[0, 1])
        assert not holds("$rose(a) |-> b", a=[0, 1], b=[1, 0])

    def test_fell_with_false_prehistory(self):
        assert not holds("$fell(a) |-> b", a=[1, 0], b=[1, 0])
        assert holds("$fell(a) |-> b", a=[1, 0], b=[0, 1])
        # cannot fall at cycle 0: prior value is false
        assert holds("$fell(a) |-> b", a=[0], b=[0])

    def test_stable_at_cycle_zero_compares_to_false(self):
        assert holds("$stable(a)", a=[0, 0])
        assert not holds("$stable(a)", a=[1, 1])  # cycle 0: 1 != false

    def test_past_reads_history(self):
        assert holds("done |-> $past(start, 2)", done=[0, 0, 1], start=[1, 0, 0])
        assert not holds("done |-> $past(start, 2)", done=[0, 0, 1], start=[0, 1, 0])

    def test_past_of_negation_over_missing_history(self):
        # pre-history signals read false, so $past(!a, 2) at cycle 0 is true
        assert holds("$past(!a, 2)", a=[0])
        assert not holds("$past(a, 2)", a=[1])


class TestDisableGuard:
    def test_guard_true_anywhere_after_start_aborts_attempt(self):
        assert holds(
            "disable iff (rst) req |-> gnt", rst=[0, 0, 1], req=[1, 0, 0], gnt=[0, 0, 0]
        )

    def test_attempts_after_last_guard_cycle_still_checked(self):
        assert not holds(
            "disable iff (rst) req |-> gnt", rst=[1, 0, 0], req=[0, 0, 1], gnt=[1, 1, 0]
        )

    def test_guard_never_true_changes_nothing(self):
        assert not holds(
            "disable iff (rst) req |-> gnt", rst=[0, 0], req=[1, 0], gnt=[0, 0]
        )


class TestClocking:
    def test_clock_marker_does_not_join_signal_universe(self):
        assert holds("@(posedge clk) req |-> gnt", req=[1], gnt=[1])
