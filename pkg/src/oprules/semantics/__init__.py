"""Assertion parsing, bounded-trace evaluation, and equivalence checking."""

from .nodes import (
    And,
    Const,
    DelayConcat,
    Eq,
    Fell,
    ImplNonOverlap,
    ImplOverlap,
    Neq,
    Not,
    Or,
    Past,
    Rose,
    SAlways,
    SEventually,
    Signal,
    Stable,
    SvaAst,
    Xor,
    ast_to_text,
    collect_signals,
)
from .parser import parse_sva, syntax_check
from .evaluator import Trace, eval_assertion, make_trace
from .equivalence import (
    BoundedOracle,
    EquivalenceVerdict,
    Verdict,
    check_equivalence,
    enumerate_traces,
)
from .external import ExternalCheckerConfig, ExternalOracle, external_checker

__all__ = [
    "And",
    "BoundedOracle",
    "Const",
    "DelayConcat",
    "Eq",
    "EquivalenceVerdict",
    "ExternalCheckerConfig",
    "ExternalOracle",
    "Fell",
    "ImplNonOverlap",
    "ImplOverlap",
    "Neq",
    "Not",
    "Or",
    "Past",
    "Rose",
    "SAlways",
    "SEventually",
    "Signal",
    "Stable",
    "SvaAst",
    "Trace",
    "Verdict",
    "Xor",
    "check_equivalence",
    "collect_signals",
    "enumerate_traces",
    "eval_assertion",
    "external_checker",
    "make_trace",
    "parse_sva",
    "syntax_check",
]
