"""Seeded random generator for small ASTs in the supported subset."""

import random

from oprules.semantics import nodes as N


def random_bool(rng: random.Random, signals, depth: int):
    if depth <= 0:
        return N.Signal(rng.choice(signals)) if rng.random() < 0.9 else N.Const(rng.random() < 0.5)
    pick = rng.randrange(9)
    if pick == 0:
        return N.Not(random_bool(rng, signals, depth - 1))
    if pick == 1:
        return N.And(random_bool(rng, signals, depth - 1), random_bool(rng, signals, depth - 1))
    if pick == 2:
        return N.Or(random_bool(rng, signals, depth - 1), random_bool(rng, signals, depth - 1))
    if pick == 3:
        return N.Xor(random_bool(rng, signals, depth - 1), random_bool(rng, signals, depth - 1))
    if pick == 4:
        return N.Eq(random_bool(rng, signals, depth - 1), random_bool(rng, signals, depth - 1))
    if pick == 5:
        return N.Past(random_bool(rng, signals, depth - 1), rng.randint(1, 2))
    if pick == 6:
        return N.Rose(rng.choice(signals))
    if pick == 7:
        return N.Fell(rng.choice(signals))
    return N.Stable(rng.choice(signals))


def random_seq(rng: random.Random, signals, depth: int):
    if depth <= 0 or rng.random() < 0.5:
        return random_bool(rng, signals, depth)
    lo = rng.randint(0, 2)
    hi = lo + rng.randint(0, 1)
    left = None if rng.random() < 0.25 else random_seq(rng, signals, depth - 1)
    return N.DelayConcat(left, lo, hi, random_seq(rng, signals, depth - 1))


def random_prop(rng: random.Random, signals, depth: int):
    if depth <= 0:
        return random_bool(rng, signals, 0)
    pick = rng.randrange(6)
    if pick <= 1:
        return random_seq(rng, signals, depth)
    if pick == 2:
        return N.ImplOverlap(random_seq(rng, signals, depth - 1), random_prop(rng, signals, depth - 1))
    if pick == 3:
        return N.ImplNonOverlap(random_seq(rng, signals, depth - 1), random_prop(rng, signals, depth - 1))
    if pick == 4:
        return N.SEventually(random_prop(rng, signals, depth - 1))
    return N.SAlways(random_prop(rng, signals, depth - 1))


def random_ast(rng: random.Random, signals, depth: int = 3) -> N.SvaAst:
    guard = random_bool(rng, signals, 1) if rng.random() < 0.2 else None
    clock = "clk" if rng.random() < 0.3 else None
    return N.SvaAst(property=random_prop(rng, signals, depth), clock=clock, disable_guard=guard)
