"""The order ``<b``: ``<c`` and unary predicates folded into one linear order.

Rows whose index is a multiple of ``ell`` form the *backbone*; backbone
elements come first, ordered as in ``<c``.  The ``ell - 1`` non-backbone
elements between two backbone elements of one column form an interval, and
when the interval is complete its internal order is the permutation whose
Lehmer rank is the number spelt by the predicate bits of the window
``u, u+1, ..., u+w-1``.  Everything else falls back to ``<``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable, Iterable, Sequence

import numpy as np

from .predicates import coords, coords_array, in_C, in_Q, in_squares, tri
from .tables import OrderTable, RelationTable

__all__ = [
    "DecodeError", "DecodeResult", "IntervalCode", "OrdBConfig", "OrdBOrder",
    "PREDICATES", "build_ordb", "build_pi", "decode_ordb", "interval_of",
    "is_backbone", "min_ell", "ordb_less", "perm_rank", "perm_unrank",
    "window_bits",
]

PREDICATES: dict[str, Callable[[int], bool]] = {
    "C": in_C,
    "Q": in_Q,
    "squares": in_squares,
}


class FiniteSet:
    """Membership oracle for a finite set of naturals, false elsewhere."""

    def __init__(self, members: Iterable[int]):
        self.members = frozenset(int(m) for m in members)

    @classmethod
    def from_bits(cls, bits: str) -> "FiniteSet":
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit list: {bits!r}")
        return cls(i for i, b in enumerate(bits) if b == "1")

    def __call__(self, x: int) -> bool:
        return x in self.members

    def __repr__(self) -> str:
        return f"FiniteSet({sorted(self.members)})"


def min_ell(k: int, w_rule: str | int = "three_ell") -> int:
    """Smallest ``ell >= 2`` with ``(ell-1)! >= 2**(k*w)``.

    ``w_rule`` is ``"three_ell"`` for ``w = 3*ell`` or a fixed window length.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if w_rule != "three_ell" and (not isinstance(w_rule, int) or w_rule < 1):
        raise ValueError(f"bad window rule {w_rule!r}")
    ell = 2
    fact = 1  # (ell-1)!
    while True:
        w = 3 * ell if w_rule == "three_ell" else w_rule
        if fact >= 1 << (k * w):
            return ell
        fact *= ell
        ell += 1


@dataclass(frozen=True)
class OrdBConfig:
    predicates: tuple[Callable[[int], bool], ...]
    ell: int
    w: int
    sound: bool = False
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "predicates", tuple(self.predicates))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"U{i + 1}" for i in range(self.k)))
        object.__setattr__(self, "names", tuple(self.names))
        if self.k < 1:
            raise ValueError("at least one unary predicate is required")
        if len(self.names) != self.k:
            raise ValueError("one name per predicate")
        if self.ell < 2:
            raise ValueError("ell must be at least 2")
        if self.w < 1:
            raise ValueError("window length must be at least 1")
        if factorial(self.ell - 1) < 1 << (self.k * self.w):
            raise ValueError(f"({self.ell}-1)! < 2^{self.k * self.w}: "
                             "intervals cannot encode the window")
        if self.sound and self.w != 3 * self.ell:
            raise ValueError("sound configurations use w = 3*ell")

    @property
    def k(self) -> int:
        return len(self.predicates)

    @classmethod
    def sound_config(cls, predicates: Sequence[Callable[[int], bool]],
                     names: Sequence[str] = ()) -> "OrdBConfig":
        ell = min_ell(len(predicates))
        return cls(tuple(predicates), ell, 3 * ell, True, tuple(names))

    @classmethod
    def named(cls, names: Sequence[str], ell: int | str = "auto",
              w: int | str = "3l") -> "OrdBConfig":
        preds = []
        for name in names:
            if name in PREDICATES:
                preds.append(PREDICATES[name])
            elif name.startswith("bits:"):
                preds.append(FiniteSet.from_bits(name[5:]))
            else:
                raise ValueError(f"unknown predicate {name!r}")
        k = len(preds)
        if ell == "auto":
            ell = min_ell(k, "three_ell" if w == "3l" else int(w))
        ell = int(ell)
        w = 3 * ell if w == "3l" else int(w)
        return cls(tuple(preds), ell, w, w == 3 * ell, tuple(names))

    def membership(self, upto: int) -> np.ndarray:
        """``(k, upto+1)`` array of predicate values on ``[0..upto]``."""
        out = np.zeros((self.k, upto + 1), dtype=bool)
        for i, p in enumerate(self.predicates):
            out[i] = np.fromiter((p(x) for x in range(upto + 1)), dtype=bool, count=upto + 1)
        return out


# --- permutations in Lehmer order -------------------------------------------

def perm_unrank(m: int, size: int) -> tuple[int, ...]:
    """The ``m``-th permutation of ``1..size`` in lexicographic (Lehmer) order."""
    if size < 0 or not 0 <= m < factorial(size):
        raise ValueError(f"rank {m} out of range for {size} items")
    items = list(range(1, size + 1))
    out = []
    for i in range(size, 0, -1):
        digit, m = divmod(m, factorial(i - 1))
        out.append(items.pop(digit))
    return tuple(out)


def perm_rank(p: Sequence[int]) -> int:
    size = len(p)
    if sorted(p) != list(range(1, size + 1)):
        raise ValueError(f"{tuple(p)} is not a permutation of 1..{size}")
    items = list(range(1, size + 1))
    m = 0
    for i, v in enumerate(p):
        j = items.index(v)
        m += j * factorial(size - 1 - i)
        items.pop(j)
    return m


# --- layout -------------------------------------------------------------------

def is_backbone(x: int, ell: int) -> bool:
    if ell < 2:
        raise ValueError("ell must be at least 2")
    return coords(x).r % ell == 0


def interval_of(x: int, ell: int) -> tuple[int, bool]:
    """Base ``u`` of the interval holding non-backbone ``x`` and whether it is complete."""
    p = coords(x)
    off = p.r % ell
    if off == 0:
        raise ValueError(f"{x} is a backbone element")
    u = x - off
    return u, p.r - off + ell <= p.c


@dataclass(frozen=True)
class IntervalCode:
    u: int
    complete: bool
    complete_within_n: bool | None
    bits: str
    code: int


def window_bits(u: int, config: OrdBConfig, n: int | None = None) -> IntervalCode:
    p = coords(u)
    if p.r % config.ell or p.r + config.ell > p.c:
        raise ValueError(f"{u} is not a complete backbone element")
    chars = []
    for j in range(config.w):
        for pred in config.predicates:
            chars.append("1" if pred(u + j) else "0")
    bits = "".join(chars)
    code = int(bits, 2)
    within = None if n is None else u + config.ell <= n
    return IntervalCode(u, True, within, bits, code)


@dataclass
class OrdBOrder:
    n: int
    rank: np.ndarray
    config: OrdBConfig | None = None

    def less(self, x: int, y: int) -> bool:
        return bool(self.rank[x] < self.rank[y])

    def sequence(self) -> np.ndarray:
        """Domain elements listed from ``<b``-least to greatest."""
        return np.argsort(self.rank, kind="stable")

    def table(self) -> OrderTable:
        return OrderTable(self.rank)

    def graph(self) -> RelationTable:
        """Binary graph ``{(i, pi(i))}`` of the index permutation."""
        data = np.zeros((self.n + 1, self.n + 1), dtype=bool)
        data[np.arange(self.n + 1), self.rank] = True
        return RelationTable(data)


def _interval_positions(config: OrdBConfig, u: int) -> dict[int, int]:
    """offset j in 1..ell-1 -> position of u+j inside its interval."""
    perm = perm_unrank(window_bits(u, config).code, config.ell - 1)
    return {j: pos for pos, j in enumerate(perm)}


def build_ordb(config: OrdBConfig, n: int) -> OrdBOrder:
    if n < 0:
        raise ValueError("n must be a natural number")
    ell = config.ell
    xs = np.arange(n + 1, dtype=np.int64)
    c, r = coords_array(xs)
    off = r % ell
    backbone = off == 0
    base = xs - off
    complete = (r - off + ell <= c) & ~backbone
    t = off.copy()
    for u in np.unique(base[complete]):
        pos = _interval_positions(config, int(u))
        members = np.flatnonzero(complete & (base == u))
        t[members] = [pos[int(x - u)] for x in members]
    group = np.where(backbone, 0, 1)
    major = np.where(backbone, r, base)
    minor = np.where(backbone, c, t)
    order = np.lexsort((minor, major, group))
    rank = np.empty(n + 1, dtype=np.int64)
    rank[order] = np.arange(n + 1)
    return OrdBOrder(n, rank, config)


def build_pi(config: OrdBConfig, n: int) -> RelationTable:
    return build_ordb(config, n).graph()


_coords = lru_cache(maxsize=1 << 16)(coords)


def ordb_less(x: int, y: int, config: OrdBConfig, _cache: dict | None = None) -> bool:
    """Pairwise comparison straight from the layout rules."""
    if x == y:
        return False
    ell = config.ell
    px, py = _coords(x), _coords(y)
    bx, by = px.r % ell == 0, py.r % ell == 0
    if bx and by:
        return (px.r, px.c) < (py.r, py.c)
    if bx != by:
        return bx
    ux, cx = interval_of(x, ell)
    uy, _ = interval_of(y, ell)
    if ux != uy:
        return x < y
    if not cx:
        return x < y
    cache = _cache if _cache is not None else {}
    if ux not in cache:
        cache[ux] = _interval_positions(config, ux)
    pos = cache[ux]
    return pos[x - ux] < pos[y - ux]


# --- decoding -----------------------------------------------------------------

class DecodeError(ValueError):
    pass


@dataclass
class DecodeResult:
    n: int
    ell: int | None
    backbone: np.ndarray
    intervals: list[tuple[int, int]]          # (u, code) per complete-within-n u
    bits: np.ndarray                          # (k, n+1) recovered predicate values
    coverage: np.ndarray                      # certified elements
    row_index: np.ndarray = field(repr=False)  # backbone-row number of each element's base, -1 if unknown
    base: np.ndarray = field(repr=False)
    ordb_rank: np.ndarray = field(repr=False)

    def covered(self) -> np.ndarray:
        return np.flatnonzero(self.coverage)

    def predicate(self, i: int, x: int) -> bool:
        if not self.coverage[x]:
            raise KeyError(f"{x} is not covered by a complete interval")
        return bool(self.bits[i, x])

    def ordc_key(self, x: int) -> tuple[int, int, int]:
        """Sort key realising ``<c`` among covered elements."""
        u = int(self.base[x])
        return int(self.row_index[u]), x - u, int(self.ordb_rank[u])

    def ordc_less(self, x: int, y: int) -> bool:
        return self.ordc_key(x) < self.ordc_key(y)


def _ranks_of(table: RelationTable, n: int) -> np.ndarray:
    if isinstance(table, OrderTable):
        rank = table.rank
        if len(rank) != n + 1 or not np.array_equal(np.sort(rank), np.arange(n + 1)):
            raise DecodeError("inconsistent order (not total)")
        return rank
    data = table.data
    if data.shape != (n + 1, n + 1):
        raise DecodeError("order table does not live on the stated domain")
    rank = data.sum(axis=0).astype(np.int64)
    if (not np.array_equal(np.sort(rank), np.arange(n + 1))
            or not np.array_equal(data, rank[:, None] < rank[None, :])):
        raise DecodeError("inconsistent order (not total)")
    return rank


def decode_ordb(n: int, lt_table: RelationTable, ordb_table: RelationTable,
                k: int, w: int) -> DecodeResult:
    """Recover ``ell``, the predicate bits and ``<c`` from ``<`` and ``<b``."""
    lt_rank = _ranks_of(lt_table, n)
    if not np.array_equal(lt_rank, np.arange(n + 1)):
        raise DecodeError("the '<' table is not the natural order")
    rank = _ranks_of(ordb_table, n)
    size = n + 1
    if n < 2:
        backbone = np.ones(size, dtype=bool)
    else:
        backbone = rank < rank[2]
    seq = [int(x) for x in np.argsort(rank) if backbone[x]]
    if sorted(rank[seq]) != list(range(len(seq))):
        raise DecodeError("backbone is not an initial segment of the order")

    # rows: a backbone element starts a new row when it sits on the diagonal,
    # i.e. its <-successor is a backbone element as well
    row_index = np.full(size, -1, dtype=np.int64)
    rows: list[list[int]] = []
    for x in seq:
        if not rows or (x + 1 <= n and backbone[x + 1]):
            rows.append([])
        rows[-1].append(x)
        row_index[x] = len(rows) - 1
    bottoms = np.array(sorted(rows[0]), dtype=np.int64)

    ell = None
    for m, row in enumerate(rows[1:], start=1):
        d = row[0]
        height = d - int(bottoms[np.searchsorted(bottoms, d, side="right") - 1])
        if height % m:
            raise DecodeError("detected ell non-uniform")
        if ell is None:
            ell = height // m
        elif ell != height // m:
            raise DecodeError("detected ell non-uniform")
    if ell is not None and ell < 2:
        raise DecodeError("detected ell non-uniform")

    # a diagonal n starts a row of its own but has no successor to reveal
    # it; it does sit ell above the <b-preceding backbone element instead
    if ell is not None and n >= ell and backbone[n] and seq[-1] == n:
        p = n - ell
        if (backbone[p] and not backbone[p + 1:n].any() and p != tri(ell - 1)
                and rank[p] == rank[n] - 1 and row_index[p] == row_index[n]):
            row_index[n] += 1

    idx = np.where(backbone, np.arange(size), -1)
    base = np.maximum.accumulate(idx)

    bits = np.zeros((k, size), dtype=bool)
    coverage = np.zeros(size, dtype=bool)
    intervals: list[tuple[int, int]] = []
    if ell is not None:
        limit = 1 << (k * w)
        for u in seq:
            v = u + ell
            if v > n or not backbone[v] or backbone[u + 1:v].any():
                continue
            # u+ell must sit above u in the same column, not at the bottom of
            # the next one; the only same-row case is the column of height ell-1
            if rank[v] < rank[u] or u == tri(ell - 1):
                continue
            inner = np.arange(u + 1, v)
            inner_ranks = rank[inner]
            if inner_ranks.max() - inner_ranks.min() != ell - 2:
                raise DecodeError("interval ordering not a permutation pattern")
            perm = tuple(int(j) for j in inner[np.argsort(inner_ranks)] - u)
            code = perm_rank(perm)
            if code >= limit:
                raise DecodeError("interval ordering not a permutation pattern")
            intervals.append((u, code))
            word = format(code, f"0{k * w}b")
            for j in range(w):
                x = u + j
                if x > n:
                    break
                got = [word[j * k + i] == "1" for i in range(k)]
                if coverage[x] and list(bits[:, x]) != got:
                    raise DecodeError(f"intervals disagree about element {x}")
                bits[:, x] = got
                coverage[x] = True
    return DecodeResult(n, ell, backbone, intervals, bits, coverage, row_index, base, rank)


def coverage_floor(ell: int) -> int:
    """Elements above ``tri(ell+1)`` are certified once far enough from ``n``."""
    return tri(ell + 1)
