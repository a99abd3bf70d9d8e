"""Independent straight-line assertion evaluator, written from SEMANTICS.md.

Deliberately different from the library implementation: per-start recursive
evaluation with explicit loops instead of whole-trace arrays. Used as the
second opinion in equivalence cross-checks; keep it free of imports from
oprules.semantics.evaluator internals.
"""

from oprules.semantics import nodes as N
from oprules.semantics.evaluator import Trace


def _signal_at(trace: Trace, name: str, t: int) -> bool:
    if t < 0:
        return False
    return trace.values[name][t]


def _expr_at(node, trace: Trace, t: int) -> bool:
    # t < 0 is the pre-history world where every signal reads false
    if isinstance(node, N.Signal):
        return _signal_at(trace, node.name, t)
    if isinstance(node, N.Const):
        return node.value
    if isinstance(node, N.Not):
        return not _expr_at(node.operand, trace, t)
    if isinstance(node, N.And):
        return _expr_at(node.left, trace, t) and _expr_at(node.right, trace, t)
    if isinstance(node, N.Or):
        return _expr_at(node.left, trace, t) or _expr_at(node.right, trace, t)
    if isinstance(node, N.Xor):
        return _expr_at(node.left, trace, t) != _expr_at(node.right, trace, t)
    if isinstance(node, N.Eq):
        return _expr_at(node.left, trace, t) == _expr_at(node.right, trace, t)
    if isinstance(node, N.Neq):
        return _expr_at(node.left, trace, t) != _expr_at(node.right, trace, t)
    if isinstance(node, N.Past):
        return _expr_at(node.operand, trace, t - node.depth)
    if isinstance(node, N.Rose):
        return _signal_at(trace, node.signal, t) and not _signal_at(trace, node.signal, t - 1)
    if isinstance(node, N.Fell):
        return not _signal_at(trace, node.signal, t) and _signal_at(trace, node.signal, t - 1)
    if isinstance(node, N.Stable):
        return _signal_at(trace, node.signal, t) == _signal_at(trace, node.signal, t - 1)
    raise TypeError(f"not a boolean node: {node!r}")


def _seq_ends(node, trace: Trace, t: int) -> set[int]:
    L = trace.length
    if N.is_boolean(node):
        if 0 <= t < L and _expr_at(node, trace, t):
            return {t}
        return set()
    if isinstance(node, N.DelayConcat):
        left_ends = {t} if node.left is None else _seq_ends(node.left, trace, t)
        ends: set[int] = set()
        for e in left_ends:
            for d in range(node.lo, node.hi + 1):
                start = e + d
                if start < L:
                    ends |= _seq_ends(node.right, trace, start)
        return ends
    raise TypeError(f"not a sequence node: {node!r}")


def _prop_at(node, trace: Trace, t: int) -> bool:
    L = trace.length
    if isinstance(node, N.ImplOverlap):
        for e in _seq_ends(node.antecedent, trace, t):
            if not _prop_at(node.consequent, trace, e):
                return False
        return True
    if isinstance(node, N.ImplNonOverlap):
        for e in _seq_ends(node.antecedent, trace, t):
            if e + 1 >= L:
                return False
            if not _prop_at(node.consequent, trace, e + 1):
                return False
        return True
    if isinstance(node, N.SEventually):
        for u in range(t, L):
            if _prop_at(node.operand, trace, u):
                return True
        return False
    if isinstance(node, N.SAlways):
        for u in range(t, L):
            if not _prop_at(node.operand, trace, u):
                return False
        return True
    return len(_seq_ends(node, trace, t)) > 0


def naive_holds(ast: N.SvaAst, trace: Trace) -> bool:
    L = trace.length
    for t in range(L):
        if ast.disable_guard is not None and any(
            _expr_at(ast.disable_guard, trace, u) for u in range(t, L)
        ):
            continue
        if not _prop_at(ast.property, trace, t):
            return False
    return True
