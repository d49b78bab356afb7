"""Semantic ground truth for catalog entries.

Everything here is computed element by element from :func:`coords` and plain
integer arithmetic, never from formulas or from the bulk tables in
:mod:`fobit.predicates`, so a catalog formula and its oracle share no code
path beyond the coordinate decomposition itself.
"""
from __future__ import annotations

from itertools import product

import numpy as np

from .predicates import bit, coords, ordc_less

__all__ = ["carries", "relation", "ORACLES"]


def relation(arity: int, n: int, pred) -> np.ndarray:
    """Dense table of ``pred`` over ``[0..n]^arity``."""
    size = n + 1
    out = np.zeros((size,) * arity, dtype=bool)
    for t in product(range(size), repeat=arity):
        out[t] = bool(pred(*t))
    return out


def carries(a: int, b: int) -> set[int]:
    """Positions receiving a carry in the schoolbook sum ``a + b``."""
    out = set()
    carry = 0
    pos = 0
    while a or b or carry:
        s = (a & 1) + (b & 1) + carry
        carry = s >> 1
        a >>= 1
        b >>= 1
        pos += 1
        if carry:
            out.add(pos)
    return out


def _lastcolfull(n: int) -> bool:
    p = coords(n)
    return p.r == p.c


def _make():
    C = coords
    o = {
        "max_lt": (1, lambda n: lambda x: x == n),
        "succ_lt": (2, lambda n: lambda x, y: y == x + 1),
        "max_ordc": (1, lambda n: lambda x: not any(ordc_less(x, z) for z in range(n + 1))),
        "succ_ordc": (2, lambda n: _succ_ordc(n)),
        "bot": (1, lambda n: lambda x: C(x).r == 0),
        "samecol": (2, lambda n: lambda x, y: C(x).c == C(y).c),
        "q": (2, lambda n: lambda x, y: C(x).q == y),
        "lastcolfull": (0, lambda n: lambda: _lastcolfull(n)),
        "diag": (1, lambda n: lambda x: C(x).r == C(x).c),
        "samerow": (2, lambda n: lambda x, y: C(x).r == C(y).r),
        "rc": (2, lambda n: lambda x, y: C(x).r == C(y).c),
        "phiQ": (2, lambda n: lambda x, u: bit(C(x).q, C(u).r)),
        "phiR": (2, lambda n: lambda x, u: bit(C(x).r, C(u).r)),
        "carry": (2, lambda n: lambda x, z: C(z).r in carries(C(x).q, C(x).r)),
        "bitR": (2, lambda n: lambda x, z: bit(x, C(z).r)),
        "r": (2, lambda n: lambda x, y: C(x).r == y),
        "bit": (2, lambda n: lambda x, y: bit(x, y)),
        "lt_from_bit": (2, lambda n: lambda x, y: x < y),
    }
    return o


def _succ_ordc(n: int):
    ordered = sorted(range(n + 1), key=lambda x: (coords(x).r, coords(x).c))
    nxt = {a: b for a, b in zip(ordered, ordered[1:])}
    return lambda x, y: nxt.get(x) == y


ORACLES = _make()


def oracle_table(name: str, n: int) -> np.ndarray:
    arity, factory = ORACLES[name]
    return relation(arity, n, factory(n))
