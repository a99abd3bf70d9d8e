"""Equivalence and implication checking by exhaustive bounded-trace search."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from ..errors import BudgetExceeded
from . import nodes as N
from .evaluator import Trace, eval_assertion
from .parser import parse_sva

DEFAULT_MAX_LEN = 5
DEFAULT_BUDGET = 2**24


class Verdict(Enum):
    EQUIVALENT = "equivalent"
    GOLDEN_IMPLIES_GENERATED = "golden_implies_generated"
    GENERATED_IMPLIES_GOLDEN = "generated_implies_golden"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class EquivalenceVerdict:
    verdict: Verdict
    counterexample: Trace | None = None

    @property
    def equivalent(self) -> bool:
        return self.verdict is Verdict.EQUIVALENT


def enumerate_traces(signals: Sequence[str], lengths: Iterable[int]) -> Iterator[Trace]:
    """All traces over the signal set, shortest lengths first.

    Within one length, trace index n assigns signal i at cycle t the bit
    (t * num_signals + i) of n, so the order is reproducible everywhere.
    """
    sigs = tuple(signals)
    S = len(sigs)
    for L in lengths:
        for n in range(2 ** (S * L)):
            values = {
                sig: tuple(bool((n >> (t * S + i)) & 1) for t in range(L))
                for i, sig in enumerate(sigs)
            }
            yield Trace(sigs, L, values)


def trace_count(num_signals: int, max_len: int) -> int:
    return sum(2 ** (num_signals * L) for L in range(1, max_len + 1))


def check_equivalence(
    golden: N.SvaAst,
    generated: N.SvaAst,
    signals: Sequence[str] | None = None,
    max_len: int = DEFAULT_MAX_LEN,
    budget: int = DEFAULT_BUDGET,
) -> EquivalenceVerdict:
    """Compare two assertions on every trace of lengths 1..max_len.

    Verdicts: agree everywhere -> EQUIVALENT; golden-holding traces are a
    subset of generated-holding ones -> GOLDEN_IMPLIES_GENERATED; the reverse
    subset -> GENERATED_IMPLIES_GOLDEN; otherwise INCOMPARABLE. The first
    disagreeing trace in enumeration order is attached whenever the verdict
    is not EQUIVALENT.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if signals is None:
        signals = sorted(N.collect_signals(golden) | N.collect_signals(generated))
    required = trace_count(len(signals), max_len)
    if required > budget:
        raise BudgetExceeded(required, budget)

    golden_implies = True
    generated_implies = True
    first_disagreement: Trace | None = None
    for trace in enumerate_traces(signals, range(1, max_len + 1)):
        a = eval_assertion(golden, trace)
        b = eval_assertion(generated, trace)
        if a != b:
            if first_disagreement is None:
                first_disagreement = trace
            if a and not b:
                golden_implies = False
            if b and not a:
                generated_implies = False
        if not golden_implies and not generated_implies:
            break

    if first_disagreement is None:
        return EquivalenceVerdict(Verdict.EQUIVALENT)
    if golden_implies:
        return EquivalenceVerdict(Verdict.GOLDEN_IMPLIES_GENERATED, first_disagreement)
    if generated_implies:
        return EquivalenceVerdict(Verdict.GENERATED_IMPLIES_GOLDEN, first_disagreement)
    return EquivalenceVerdict(Verdict.INCOMPARABLE, first_disagreement)


class BoundedOracle:
    """Text-level front end used by training and evaluation."""

    name = "bounded"

    def __init__(self, max_len: int = DEFAULT_MAX_LEN, budget: int = DEFAULT_BUDGET):
        self.max_len = max_len
        self.budget = budget

    def check(self, golden_text: str, generated_text: str) -> EquivalenceVerdict:
        golden = parse_sva(golden_text)
        generated = parse_sva(generated_text)
        return check_equivalence(
            golden, generated, max_len=self.max_len, budget=self.budget
        )

    def equivalent(self, golden_text: str, generated_text: str) -> bool:
        return self.check(golden_text, generated_text).equivalent
