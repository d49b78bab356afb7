"""Random formula generators shared by the logic tests."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from fobit.logic.syntax import (And, Atom, ConstEq, Eq, Exists, Forall, Iff,
                                Implies, Not, Or)

VARS = ("x", "y", "z", "u")
SIGNATURE = {"lt": 2, "ordc": 2, "C": 1, "Q": 1, "E": 2, "P": 0}


def random_formula(rng: random.Random, depth: int, signature=SIGNATURE, vars=VARS, max_const=9):
    if depth == 0 or rng.random() < 0.2:
        kind = rng.randrange(3)
        if kind == 0:
            return Eq(rng.choice(vars), rng.choice(vars))
        if kind == 1:
            return ConstEq(rng.choice(vars), rng.randrange(max_const))
        rel = rng.choice(sorted(signature))
        return Atom(rel, tuple(rng.choice(vars) for _ in range(signature[rel])))
    op = rng.randrange(7)
    if op == 0:
        return Not(random_formula(rng, depth - 1, signature, vars, max_const))
    if op < 5:
        cls = (And, Or, Implies, Iff)[op - 1]
        return cls(random_formula(rng, depth - 1, signature, vars, max_const),
                   random_formula(rng, depth - 1, signature, vars, max_const))
    cls = Exists if op == 5 else Forall
    return cls(rng.choice(vars), random_formula(rng, depth - 1, signature, vars, max_const))


@st.composite
def formulas(draw, depth=4):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_formula(random.Random(seed), depth)
