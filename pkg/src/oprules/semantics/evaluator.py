"""Finite sampled-cycle traces and assertion evaluation over them.

The assertion holds on a trace iff the property holds at every start cycle
(implicit always), with the strong/bounded reading: any obligation that
would extend past the end of the trace fails. Pre-history (cycles before 0)
reads every signal as false.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnknownSignal
from . import nodes as N


@dataclass(frozen=True)
class Trace:
    signals: tuple[str, ...]
    length: int
    values: dict[str, tuple[bool, ...]]

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("trace length must be >= 1")
        if set(self.values) != set(self.signals):
            raise ValueError("trace values must cover exactly the declared signals")
        if any(len(v) != self.length for v in self.values.values()):
            raise ValueError("every cycle must assign every signal")

    def render(self) -> str:
        return " ".join(
            f"{name}=[{','.join('1' if v else '0' for v in self.values[name])}]"
            for name in self.signals
        )


def make_trace(assignments: dict[str, list | tuple], length: int | None = None) -> Trace:
    """Convenience constructor from 0/1 lists."""
    values = {k: tuple(bool(v) for v in vs) for k, vs in assignments.items()}
    if length is None:
        length = len(next(iter(values.values()))) if values else 1
    return Trace(tuple(sorted(values)), length, values)


def _expr_under_reset(node: N.Node) -> bool:
    """Value of a boolean expression in the all-false pre-history world."""
    if isinstance(node, N.Signal):
        return False
    if isinstance(node, N.Const):
        return node.value
    if isinstance(node, N.Not):
        return not _expr_under_reset(node.operand)
    if isinstance(node, N.And):
        return _expr_under_reset(node.left) and _expr_under_reset(node.right)
    if isinstance(node, N.Or):
        return _expr_under_reset(node.left) or _expr_under_reset(node.right)
    if isinstance(node, N.Xor):
        return _expr_under_reset(node.left) != _expr_under_reset(node.right)
    if isinstance(node, N.Eq):
        return _expr_under_reset(node.left) == _expr_under_reset(node.right)
    if isinstance(node, N.Neq):
        return _expr_under_reset(node.left) != _expr_under_reset(node.right)
    if isinstance(node, N.Past):
        return _expr_under_reset(node.operand)
    if isinstance(node, (N.Rose, N.Fell)):
        return False
    if isinstance(node, N.Stable):
        return True  # false == false
    raise TypeError(f"not a boolean node: {node!r}")


class _Evaluator:
    """Per-trace dynamic programming: whole-cycle arrays per AST node."""

    def __init__(self, trace: Trace):
        self.trace = trace
        self.length = trace.length

    def signal(self, name: str) -> tuple[bool, ...]:
        try:
            return self.trace.values[name]
        except KeyError:
            raise UnknownSignal(f"signal {name!r} not driven by the trace") from None

    def expr(self, node: N.Node) -> list[bool]:
        L = self.length
        if isinstance(node, N.Signal):
            return list(self.signal(node.name))
        if isinstance(node, N.Const):
            return [node.value] * L
        if isinstance(node, N.Not):
            return [not v for v in self.expr(node.operand)]
        if isinstance(node, (N.And, N.Or, N.Xor, N.Eq, N.Neq)):
            a, b = self.expr(node.left), self.expr(node.right)
            if isinstance(node, N.And):
                return [x and y for x, y in zip(a, b)]
            if isinstance(node, N.Or):
                return [x or y for x, y in zip(a, b)]
            if isinstance(node, N.Xor):
                return [x != y for x, y in zip(a, b)]
            if isinstance(node, N.Eq):
                return [x == y for x, y in zip(a, b)]
            return [x != y for x, y in zip(a, b)]
        if isinstance(node, N.Past):
            inner = self.expr(node.operand)
            reset = _expr_under_reset(node.operand)
            return [inner[t - node.depth] if t - node.depth >= 0 else reset for t in range(L)]
        if isinstance(node, N.Rose):
            s = self.signal(node.signal)
            return [s[t] and not (s[t - 1] if t > 0 else False) for t in range(L)]
        if isinstance(node, N.Fell):
            s = self.signal(node.signal)
            return [not s[t] and (s[t - 1] if t > 0 else False) for t in range(L)]
        if isinstance(node, N.Stable):
            s = self.signal(node.signal)
            return [s[t] == (s[t - 1] if t > 0 else False) for t in range(L)]
        raise TypeError(f"not a boolean node: {node!r}")

    def seq_matches(self, node: N.Node) -> list[set[int]]:
        """For each start cycle, the set of cycles where the sequence can end."""
        L = self.length
        if N.is_boolean(node):
            vals = self.expr(node)
            return [{t} if vals[t] else set() for t in range(L)]
        if isinstance(node, N.DelayConcat):
            right = self.seq_matches(node.right)
            spans = range(node.lo, node.hi + 1)
            if node.left is None:
                return [
                    {e for d in spans if t + d < L for e in right[t + d]}
                    for t in range(L)
                ]
            left = self.seq_matches(node.left)
            return [
                {
                    e
                    for mid in left[t]
                    for d in spans
                    if mid + d < L
                    for e in right[mid + d]
                }
                for t in range(L)
            ]
        raise TypeError(f"not a sequence node: {node!r}")

    def prop_holds(self, node: N.Node) -> list[bool]:
        L = self.length
        if isinstance(node, N.ImplOverlap):
            ante = self.seq_matches(node.antecedent)
            cons = self.prop_holds(node.consequent)
            return [all(cons[e] for e in ante[t]) for t in range(L)]
        if isinstance(node, N.ImplNonOverlap):
            ante = self.seq_matches(node.antecedent)
            cons = self.prop_holds(node.consequent)
            # consequent starting past the end of the trace is a failure
            return [all(e + 1 < L and cons[e + 1] for e in ante[t]) for t in range(L)]
        if isinstance(node, N.SEventually):
            inner = self.prop_holds(node.operand)
            out, later = [], False
            for t in range(L - 1, -1, -1):
                later = later or inner[t]
                out.append(later)
            return out[::-1]
        if isinstance(node, N.SAlways):
            inner = self.prop_holds(node.operand)
            out, so_far = [], True
            for t in range(L - 1, -1, -1):
                so_far = so_far and inner[t]
                out.append(so_far)
            return out[::-1]
        # sequence as property: a match must complete within the trace
        return [bool(ends) for ends in self.seq_matches(node)]


def eval_assertion(ast: N.SvaAst, trace: Trace) -> bool:
    """True iff the assertion holds at every start cycle of the trace."""
    referenced = N.collect_signals(ast)
    missing = referenced - set(trace.signals)
    if missing:
        raise UnknownSignal(f"signals {sorted(missing)} not driven by the trace")
    ev = _Evaluator(trace)
    L = trace.length
    holds = ev.prop_holds(ast.property)
    if ast.disable_guard is None:
        return all(holds)
    guard = ev.expr(ast.disable_guard)
    # An attempt at cycle t is vacuously satisfied when the disable condition
    # is true at any cycle >= t (its obligations are considered aborted).
    aborted_from = [False] * L
    seen = False
    for t in range(L - 1, -1, -1):
        seen = seen or guard[t]
        aborted_from[t] = seen
    return all(aborted_from[t] or holds[t] for t in range(L))
