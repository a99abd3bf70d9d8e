"""AST node types for the supported assertion subset.

Signals are 1-bit booleans. Sequence nodes (booleans and delay
concatenations) have match semantics; property nodes (implications and
strong liveness) have hold/fail semantics. SEMANTICS.md in the repository
root pins the evaluation rules bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass


class Node:
    """Base class; subclasses are frozen dataclasses."""


# boolean-level expressions -------------------------------------------------

@dataclass(frozen=True)
class Signal(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    value: bool


@dataclass(frozen=True)
class Not(Node):
    operand: Node


@dataclass(frozen=True)
class And(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Or(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Xor(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Eq(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Neq(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Past(Node):
    operand: Node
    depth: int  # >= 1

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("$past depth must be >= 1")


@dataclass(frozen=True)
class Rose(Node):
    signal: str


@dataclass(frozen=True)
class Fell(Node):
    signal: str


@dataclass(frozen=True)
class Stable(Node):
    signal: str


# sequence level ------------------------------------------------------------

@dataclass(frozen=True)
class DelayConcat(Node):
    """``left ##[lo:hi] right``; a missing left is a leading delay.

    The right side begins lo..hi cycles after the cycle where the left side
    matched (##0 fuses on the same cycle, ##1 is the next cycle).
    """

    left: Node | None
    lo: int
    hi: int
    right: Node

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError("delay bounds must satisfy 0 <= lo <= hi")


# property level ------------------------------------------------------------

@dataclass(frozen=True)
class ImplOverlap(Node):
    antecedent: Node
    consequent: Node


@dataclass(frozen=True)
class ImplNonOverlap(Node):
    antecedent: Node
    consequent: Node


@dataclass(frozen=True)
class SEventually(Node):
    operand: Node


@dataclass(frozen=True)
class SAlways(Node):
    operand: Node


@dataclass(frozen=True)
class SvaAst:
    """Parsed assertion: optional clocking, optional disable guard, property."""

    property: Node
    clock: str | None = None
    disable_guard: Node | None = None


_BOOLEAN_NODES = (Signal, Const, Not, And, Or, Xor, Eq, Neq, Past, Rose, Fell, Stable)
_PROPERTY_ONLY = (ImplOverlap, ImplNonOverlap, SEventually, SAlways)


def is_boolean(node: Node) -> bool:
    return isinstance(node, _BOOLEAN_NODES)


def is_sequence(node: Node) -> bool:
    return is_boolean(node) or isinstance(node, DelayConcat)


def is_property_only(node: Node) -> bool:
    return isinstance(node, _PROPERTY_ONLY)


def to_text(node: Node) -> str:
    """Parseable text form; compound subterms are parenthesized, so the
    output round-trips through the parser."""
    if isinstance(node, Signal):
        return node.name
    if isinstance(node, Const):
        return "1" if node.value else "0"
    if isinstance(node, Not):
        return f"!{_atom(node.operand)}"
    if isinstance(node, And):
        return f"{_atom(node.left)} && {_atom(node.right)}"
    if isinstance(node, Or):
        return f"{_atom(node.left)} || {_atom(node.right)}"
    if isinstance(node, Xor):
        return f"{_atom(node.left)} ^ {_atom(node.right)}"
    if isinstance(node, Eq):
        return f"{_atom(node.left)} == {_atom(node.right)}"
    if isinstance(node, Neq):
        return f"{_atom(node.left)} != {_atom(node.right)}"
    if isinstance(node, Past):
        return f"$past({to_text(node.operand)}, {node.depth})"
    if isinstance(node, Rose):
        return f"$rose({node.signal})"
    if isinstance(node, Fell):
        return f"$fell({node.signal})"
    if isinstance(node, Stable):
        return f"$stable({node.signal})"
    if isinstance(node, DelayConcat):
        delay = f"##{node.lo}" if node.lo == node.hi else f"##[{node.lo}:{node.hi}]"
        right = _atom(node.right)
        if node.left is None:
            return f"{delay} {right}"
        return f"{_atom(node.left)} {delay} {right}"
    if isinstance(node, ImplOverlap):
        return f"{_atom(node.antecedent)} |-> {_atom(node.consequent)}"
    if isinstance(node, ImplNonOverlap):
        return f"{_atom(node.antecedent)} |=> {_atom(node.consequent)}"
    if isinstance(node, SEventually):
        return f"s_eventually {_atom(node.operand)}"
    if isinstance(node, SAlways):
        return f"s_always {_atom(node.operand)}"
    raise TypeError(f"cannot render {node!r}")


def _atom(node: Node) -> str:
    if isinstance(node, (Signal, Const, Rose, Fell, Stable, Past)):
        return to_text(node)
    return f"({to_text(node)})"


def ast_to_text(ast: SvaAst) -> str:
    parts = []
    if ast.clock:
        parts.append(f"@(posedge {ast.clock})")
    if ast.disable_guard is not None:
        parts.append(f"disable iff ({to_text(ast.disable_guard)})")
    parts.append(to_text(ast.property))
    return " ".join(parts)


def collect_signals(ast: SvaAst) -> frozenset[str]:
    names: set[str] = set()

    def walk(node: Node | None):
        if node is None:
            return
        if isinstance(node, Signal):
            names.add(node.name)
        elif isinstance(node, (Rose, Fell, Stable)):
            names.add(node.signal)
        elif isinstance(node, Not):
            walk(node.operand)
        elif isinstance(node, (And, Or, Xor, Eq, Neq)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Past):
            walk(node.operand)
        elif isinstance(node, DelayConcat):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (ImplOverlap, ImplNonOverlap)):
            walk(node.antecedent)
            walk(node.consequent)
        elif isinstance(node, (SEventually, SAlways)):
            walk(node.operand)

    walk(ast.property)
    walk(ast.disable_guard)
    return frozenset(names)
