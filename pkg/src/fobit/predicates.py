"""Arithmetic kernel: triangular coordinates and the numerical predicates.

Every natural number ``x`` sits in a lower-triangular matrix: column ``c``
holds the ``c + 1`` consecutive numbers ``tri(c) .. tri(c) + c``, rows are
counted from the bottom.  The orders ``<`` (column-major) and ``<c``
(row-major) and the unary predicates ``C`` and ``Q`` are all defined through
this decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import TYPE_CHECKING

import numpy as np

from .tables import RelationTable

if TYPE_CHECKING:
    from .orderb import OrdBConfig

__all__ = [
    "ARITY",
    "TriCoord",
    "bit",
    "builtin_table",
    "coords",
    "coords_array",
    "in_C",
    "in_Q",
    "in_squares",
    "index_of",
    "ordc_less",
    "tri",
]

ARITY: dict[str, int] = {
    "lt": 2,
    "ordc": 2,
    "C": 1,
    "Q": 1,
    "bit": 2,
    "plus": 3,
    "times": 3,
    "squares": 1,
    "exp": 3,
    "ordb": 2,
    "pi": 2,
}


@dataclass(frozen=True)
class TriCoord:
    x: int
    c: int
    r: int
    q: int

    def __post_init__(self):
        if not (self.x == self.q + self.r and 0 <= self.r <= self.c
                and self.q == tri(self.c)):
            raise ValueError(f"inconsistent coordinates {self}")


def tri(i: int) -> int:
    """The i-th triangular number, i.e. the bottom element of column i."""
    return i * (i + 1) // 2


def _column(x: int) -> int:
    c = (isqrt(8 * x + 1) - 1) // 2
    # isqrt is exact, the loops only guard the boundary algebra
    while tri(c) > x:
        c -= 1
    while tri(c + 1) <= x:
        c += 1
    return c


def coords(x: int) -> TriCoord:
    if x < 0:
        raise ValueError("coordinates are defined for naturals only")
    c = _column(x)
    q = tri(c)
    return TriCoord(x=x, c=c, r=x - q, q=q)


def coords_array(xs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (column, row) for an integer array."""
    xs = np.asarray(xs, dtype=np.int64)
    c = ((np.sqrt(8.0 * xs + 1.0) - 1.0) // 2).astype(np.int64)
    q = c * (c + 1) // 2
    c = np.where(q > xs, c - 1, c)
    q = c * (c + 1) // 2
    nxt = (c + 1) * (c + 2) // 2
    c = np.where(nxt <= xs, c + 1, c)
    q = c * (c + 1) // 2
    return c, xs - q


def index_of(c: int, r: int) -> int:
    if r < 0 or c < 0:
        raise ValueError("negative matrix index")
    if r > c:
        raise ValueError(f"column {c} has no row {r}")
    return tri(c) + r


def ordc_less(x: int, y: int) -> bool:
    a, b = coords(x), coords(y)
    return (a.r, a.c) < (b.r, b.c)


def bit(a: int, i: int) -> bool:
    return (a >> i) & 1 == 1


def in_C(x: int) -> bool:
    p = coords(x)
    return bit(p.c + 1, p.r)


def in_Q(x: int) -> bool:
    p = coords(x)
    return bit(tri(p.c + 1), p.r)


def in_squares(x: int) -> bool:
    return x >= 0 and isqrt(x) ** 2 == x


def builtin_table(name: str, n: int, config: "OrdBConfig | None" = None) -> RelationTable:
    """Restriction of the named numerical predicate to ``[0..n]``."""
    if name not in ARITY:
        raise KeyError(f"unknown built-in predicate {name!r}")
    if n < 0:
        raise ValueError("n must be a natural number")
    if name in ("ordb", "pi"):
        if config is None:
            raise ValueError(f"built-in {name!r} requires an order-b configuration")
        from . import orderb

        order = orderb.build_ordb(config, n)
        return order.graph() if name == "pi" else order.table()

    size = n + 1
    xs = np.arange(size, dtype=np.int64)
    if name == "lt":
        data = xs[:, None] < xs[None, :]
    elif name == "ordc":
        c, r = coords_array(xs)
        key = r * size + c
        data = key[:, None] < key[None, :]
    elif name == "C":
        c, r = coords_array(xs)
        data = ((c + 1) >> np.minimum(r, 62)) & 1 == 1
    elif name == "Q":
        c, r = coords_array(xs)
        data = (((c + 1) * (c + 2) // 2) >> np.minimum(r, 62)) & 1 == 1
    elif name == "bit":
        # shifts past 62 would overflow int64; those bits are zero anyway
        shift = np.minimum(xs, 62)
        data = (xs[:, None] >> shift[None, :]) & 1 == 1
    elif name == "squares":
        data = np.zeros(size, dtype=bool)
        roots = np.arange(isqrt(n) + 1)
        data[roots * roots] = True
    elif name == "plus":
        data = (xs[:, None, None] + xs[None, :, None]) == xs[None, None, :]
    elif name == "times":
        data = (xs[:, None, None] * xs[None, :, None]) == xs[None, None, :]
    else:
        data = np.zeros((size,) * 3, dtype=bool)
        for a in range(size):
            for b in range(size):
                if a >= 2 and b > n.bit_length():
                    break
                v = 1 if b == 0 else a ** b
                if v <= n:
                    data[a, b, v] = True
    return RelationTable(data)
