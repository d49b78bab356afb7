"""Ehrenfeucht-Fraisse games on finite structures, and the word-in-a-triangle embedding.

The solver works on positions, i.e. sets of pebble pairs ``(a, b)``.  For a
position it computes, for every element of each structure, the *extension
type*: the truth values of all atoms that mention the new element and the
pebbled ones.  Duplicator's legal answers to a move are exactly the elements
of the other structure with the same extension type, which turns the last
round into a set comparison.

The second half lifts plays of a game on two words to plays of the game on
the words written into the last column of a triangle, as in the proof that
``<`` and ``<c`` together cannot see past a neutral letter.
"""
from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .logic.structure import FiniteStructure, word_relations
from .predicates import builtin_table, coords, tri
from .tables import RelationTable

__all__ = [
    "BudgetExceeded", "GameInstance", "Play", "duplicator_wins",
    "duplicator_wins_reference", "embed_triangle", "lift_play",
    "linear_order", "pad_neutral", "partial_iso_check", "replay_spoiler",
    "small_plays", "spoiler_strategy", "sweep_lifting", "word_structure",
]

DEFAULT_BUDGET = 10 ** 8


class BudgetExceeded(RuntimeError):
    pass


def _check_signature(A: FiniteStructure, B: FiniteStructure) -> None:
    if A.signature != B.signature:
        raise ValueError(f"signature mismatch: {A.signature} vs {B.signature}")


@dataclass(frozen=True)
class GameInstance:
    A: FiniteStructure
    B: FiniteStructure
    rounds: int

    def __post_init__(self):
        _check_signature(self.A, self.B)
        if self.rounds < 0:
            raise ValueError("the number of rounds must be a natural number")


@dataclass
class Play:
    """Pebbles ``a`` in A and ``b`` in B; ``sides[i]`` says where spoiler moved in round ``i``."""
    a: tuple[int, ...]
    b: tuple[int, ...]
    sides: tuple[str, ...] = ()

    def __post_init__(self):
        self.a, self.b = tuple(self.a), tuple(self.b)
        if len(self.a) != len(self.b):
            raise ValueError("a play has the same number of pebbles on both sides")
        if not self.sides:
            self.sides = ("A",) * len(self.a)
        self.sides = tuple(self.sides)
        if len(self.sides) != len(self.a) or set(self.sides) - {"A", "B"}:
            raise ValueError("one side marker, A or B, per round")

    @property
    def rounds(self) -> list[tuple[str, int]]:
        """Spoiler's choice per round as ``(structure tag, element)``."""
        return [(s, a if s == "A" else b) for s, a, b in zip(self.sides, self.a, self.b)]

    def to_json(self) -> str:
        return json.dumps({"rounds": [list(r) for r in self.rounds],
                           "a": list(self.a), "b": list(self.b)}, sort_keys=True)


# --- structures ----------------------------------------------------------------

def linear_order(size: int) -> FiniteStructure:
    """``size`` elements ordered by ``<``."""
    if size < 1:
        raise ValueError("structures are non-empty")
    return FiniteStructure(size - 1, {"lt": builtin_table("lt", size - 1)})


def word_structure(word: str, alphabet: Iterable[str] | None = None,
                   with_max: bool = True) -> FiniteStructure:
    """``<``, the letter predicates and (by default) the last position as ``max``."""
    n = len(word) - 1
    rels = dict(word_relations(word, alphabet))
    rels["lt"] = builtin_table("lt", n)
    if with_max:
        top = np.zeros(n + 1, dtype=bool)
        top[n] = True
        rels["max"] = RelationTable(top)
    return FiniteStructure(n, rels)


def pad_neutral(u: str, v: str, e: str, k: int) -> tuple[str, str]:
    """Append ``2**(2k) + |v|`` neutral letters to ``u`` and ``2**(2k) + |u|`` to ``v``."""
    if len(e) != 1:
        raise ValueError("the neutral letter is a single character")
    if k < 0:
        raise ValueError("k must be a natural number")
    pad = 1 << (2 * k)
    pu, pv = u + e * (pad + len(v)), v + e * (pad + len(u))
    assert len(pu) == len(pv)
    return pu, pv


def embed_triangle(w: str, e: str, alphabet: Iterable[str] | None = None) -> FiniteStructure:
    """The word written bottom-up into the last column of ``[0..tri(n)+n]``, neutral elsewhere."""
    if not w:
        raise ValueError("words must be non-empty")
    n = len(w) - 1
    big = tri(n) + n
    letters = [e] * (big + 1)
    letters[tri(n):] = list(w)
    alpha = set(alphabet) if alphabet is not None else set(w)
    alpha.add(e)
    rels = dict(word_relations("".join(letters), alpha))
    rels["lt"] = builtin_table("lt", big)
    rels["ordc"] = builtin_table("ordc", big)
    return FiniteStructure(big, rels)


# --- partial isomorphisms ------------------------------------------------------

def _holds(rel: RelationTable, t: tuple[int, ...]) -> bool:
    return bool(rel.data[t]) if t else bool(rel.data)


def partial_iso_check(A: FiniteStructure, B: FiniteStructure,
                      a: Sequence[int], b: Sequence[int]) -> bool:
    """Whether ``a[i] -> b[i]`` preserves equality and every relation both ways."""
    _check_signature(A, B)
    if len(a) != len(b):
        raise ValueError("tuples of different length")
    m = len(a)
    for i in range(m):
        for j in range(i + 1, m):
            if (a[i] == a[j]) != (b[i] == b[j]):
                return False
    for name, rel in A.relations.items():
        other = B.relations[name]
        for idx in product(range(m), repeat=rel.arity):
            if _holds(rel, tuple(a[i] for i in idx)) != _holds(other, tuple(b[i] for i in idx)):
                return False
    return True


# --- solvers -------------------------------------------------------------------

def _budget(A: FiniteStructure, B: FiniteStructure, k: int, budget: int) -> None:
    if ((A.n + 1) * (B.n + 1)) ** k > budget:
        raise BudgetExceeded(f"({A.n + 1}*{B.n + 1})^{k} positions exceed the budget of {budget}")


@lru_cache(maxsize=None)
def _answer_order(x: int, size_from: int, size_to: int) -> tuple[int, ...]:
    # copy the distance to the nearer end first; any order is correct
    return tuple(sorted(range(size_to),
                        key=lambda y: (min(abs(x - y), abs((size_from - 1 - x) - (size_to - 1 - y))), y)))


class _Solver:
    def __init__(self, A: FiniteStructure, B: FiniteStructure):
        _check_signature(A, B)
        self.A, self.B = A, B
        self.memo: dict[tuple[frozenset, int], bool] = {}
        self.names = sorted(A.relations)
        self.static_ok = all(
            bool(A.relations[nm].data) == bool(B.relations[nm].data)
            for nm in self.names if A.relations[nm].arity == 0)

    def _features(self, S: FiniteStructure, pebbles: Sequence[int]) -> np.ndarray:
        size = S.n + 1
        m = len(pebbles)
        cols = [np.arange(size) == p for p in pebbles]
        every = np.arange(size)
        for nm in self.names:
            rel = S.relations[nm]
            for idx in product(range(m + 1), repeat=rel.arity):
                if m not in idx:
                    continue
                key = tuple(every if i == m else pebbles[i] for i in idx)
                cols.append(np.broadcast_to(rel.data[key], (size,)))
        if not cols:
            return np.zeros((size, 0), dtype=bool)
        return np.stack(cols, axis=1)

    def _types(self, pos: frozenset):
        pairs = sorted(pos)
        pa = [p for p, _ in pairs]
        pb = [q for _, q in pairs]
        fa = self._features(self.A, pa)
        fb = self._features(self.B, pb)
        ka = [r.tobytes() for r in fa]
        kb = [r.tobytes() for r in fb]
        return ka, kb

    def wins(self, pos: frozenset, k: int) -> bool:
        if k == 0:
            return True
        key = (pos, k)
        if key in self.memo:
            return self.memo[key]
        ka, kb = self._types(pos)
        if k == 1:
            result = set(ka) == set(kb)
        else:
            result = (self._side(pos, k, ka, kb, self.A.n + 1, self.B.n + 1, False)
                      and self._side(pos, k, kb, ka, self.B.n + 1, self.A.n + 1, True))
        self.memo[key] = result
        return result

    def _side(self, pos, k, kx, ky, nx, ny, flipped) -> bool:
        for x in range(nx):
            if not any(self.wins(pos | {(y, x) if flipped else (x, y)}, k - 1)
                       for y in _answer_order(x, nx, ny) if ky[y] == kx[x]):
                return False
        return True

    def strategy(self, pos: frozenset, k: int):
        """Spoiler's winning move tree from a lost position, or None."""
        if self.wins(pos, k):
            return None
        ka, kb = self._types(pos)
        for side, kx, ky, nx, ny in (("A", ka, kb, self.A.n + 1, self.B.n + 1),
                                     ("B", kb, ka, self.B.n + 1, self.A.n + 1)):
            for x in range(nx):
                replies = {}
                for y in range(ny):
                    pair = (x, y) if side == "A" else (y, x)
                    if ky[y] != kx[x]:
                        replies[y] = "refuted"
                    elif self.wins(pos | {pair}, k - 1):
                        break
                    else:
                        replies[y] = self.strategy(pos | {pair}, k - 1)
                else:
                    return {"side": side, "element": x, "replies": replies}
        raise AssertionError("lost position without a winning spoiler move")


def duplicator_wins(A: FiniteStructure, B: FiniteStructure, k: int,
                    budget: int = DEFAULT_BUDGET) -> bool:
    """Whether duplicator survives ``k`` rounds from the empty position."""
    g = GameInstance(A, B, k)
    _budget(A, B, k, budget)
    s = _Solver(g.A, g.B)
    return s.static_ok and s.wins(frozenset(), k)


def spoiler_strategy(A: FiniteStructure, B: FiniteStructure, k: int,
                     budget: int = DEFAULT_BUDGET):
    """A winning strategy tree for spoiler, or None when duplicator wins.

    Nodes are ``{"side", "element", "replies"}``; ``replies`` maps every
    duplicator answer to the next node, or to ``"refuted"`` when the answer
    already breaks the partial isomorphism.  A root whose side is ``None``
    means a 0-ary relation already tells the structures apart.
    """
    GameInstance(A, B, k)
    _budget(A, B, k, budget)
    s = _Solver(A, B)
    if not s.static_ok:
        return {"side": None, "element": None, "replies": {}}
    return s.strategy(frozenset(), k)


def replay_spoiler(A: FiniteStructure, B: FiniteStructure, k: int, strategy) -> bool:
    """Play ``strategy`` against every duplicator: does each play end non-isomorphic?"""
    def run(node, a, b, left) -> bool:
        if not partial_iso_check(A, B, a, b):
            return True
        if not isinstance(node, dict) or node["side"] is None or left == 0:
            return False
        side, x = node["side"], node["element"]
        other = B if side == "A" else A
        for y in other.domain:
            if y not in node["replies"]:
                return False
            na, nb = (a + (x,), b + (y,)) if side == "A" else (a + (y,), b + (x,))
            if not run(node["replies"][y], na, nb, left - 1):
                return False
        return True

    if strategy is None:
        return False
    return run(strategy, (), (), k)


def _lookup(data, t):
    for i in t:
        data = data[i]
    return data


def duplicator_wins_reference(A: FiniteStructure, B: FiniteStructure, k: int,
                              budget: int = DEFAULT_BUDGET) -> bool:
    """Plain game-tree search with no memo table; the cross-check for the solver."""
    GameInstance(A, B, k)
    _budget(A, B, k, budget)
    if not partial_iso_check(A, B, (), ()):
        return False
    na, nb = A.n + 1, B.n + 1
    rels = [(rel.arity, rel.data.tolist(), B.relations[name].data.tolist())
            for name, rel in A.relations.items() if rel.arity]

    def extends(a, b, x, y) -> bool:
        m = len(a)
        for i in range(m):
            if (a[i] == x) != (b[i] == y):
                return False
        a2, b2 = a + (x,), b + (y,)
        for arity, da, db in rels:
            for idx in product(range(m + 1), repeat=arity):
                if m in idx and (_lookup(da, [a2[i] for i in idx])
                                 != _lookup(db, [b2[i] for i in idx])):
                    return False
        return True

    def wins(a: tuple, b: tuple, left: int) -> bool:
        if left == 0:
            return True
        for x in range(na):
            if not any(extends(a, b, x, y) and wins(a + (x,), b + (y,), left - 1)
                       for y in _answer_order(x, na, nb)):
                return False
        for y in range(nb):
            if not any(extends(a, b, x, y) and wins(a + (x,), b + (y,), left - 1)
                       for x in _answer_order(y, nb, na)):
                return False
        return True

    return wins((), (), k)


# --- lifting word games to the triangle -----------------------------------------

def _lift(a: Sequence[int], n: int) -> tuple[int, ...]:
    if len(a) % 2:
        raise ValueError("a small play has an even number of rounds")
    out = []
    for c, r in zip(a[0::2], a[1::2]):
        if not (0 <= r <= c <= n):
            raise ValueError(f"({c}, {r}) is not a cell of the triangle over [0..{n}]")
        out.append(tri(c) + r)
    return tuple(out)


def lift_play(small: Play, w_u: str, w_v: str, e: str,
              alphabet: Iterable[str] | None = None) -> tuple[Play, bool]:
    """Big-game pebbles ``q(c) + r`` from small-game pairs ``(c, r)``, and whether they match.

    The check is a partial isomorphism test over ``<``, ``<c`` and the letter
    predicates of the two triangle embeddings.
    """
    if len(w_u) != len(w_v):
        raise ValueError("the words must have equal length")
    n = len(w_u) - 1
    for x in small.a + small.b:
        if not 0 <= x <= n:
            raise ValueError(f"element {x} is outside [0..{n}]")
    big_a, big_b = _lift(small.a, n), _lift(small.b, n)
    alpha = set(alphabet or ()) | set(w_u) | set(w_v) | {e}
    A, B = embed_triangle(w_u, e, alpha), embed_triangle(w_v, e, alpha)
    big = Play(big_a, big_b, small.sides[0::2])
    return big, partial_iso_check(A, B, big_a, big_b)


def small_plays(n: int, k: int, keep_max: bool = True) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Tuple pairs of ``2k`` moves over ``[0..n]`` that respect ``<``, equality and ``max``.

    Moves come in ``(column, row)`` pairs with ``row <= column``, the shape
    produced by a spoiler move in the triangle.  Letters are left out: they
    are checked per word pair by :func:`sweep_lifting`.
    """
    cells = [(c, r) for c in range(n + 1) for r in range(c + 1)]
    out = []
    for ca in product(cells, repeat=k):
        a = tuple(x for cell in ca for x in cell)
        for cb in product(cells, repeat=k):
            b = tuple(x for cell in cb for x in cell)
            if all((a[i] < a[j]) == (b[i] < b[j]) and (a[i] == a[j]) == (b[i] == b[j])
                   for i in range(2 * k) for j in range(2 * k)) \
                    and (not keep_max or all((a[i] == n) == (b[i] == n) for i in range(2 * k))):
                out.append((a, b))
    return out


@dataclass
class SweepResult:
    plays_checked: int = 0
    failures: int = 0
    examples: list = field(default_factory=list)


def sweep_lifting(max_len: int, max_k: int, letters: str = "01", e: str = "e",
                  keep_max: bool = True) -> SweepResult:
    """Every word pair of equal length, every small play: do (1),(2) imply the lifted conditions?

    ``plays_checked`` counts (word pair, play) combinations whose small play
    passes (1) and (2); ``failures`` counts those whose lifted play breaks
    (1'), (2') or (3').
    """
    res = SweepResult()
    alphabet = letters + e
    neutral = alphabet.index(e)
    for length in range(1, max_len + 1):
        n = length - 1
        words = np.array(list(product(range(len(alphabet)), repeat=length)), dtype=np.int8)
        for k in range(1, max_k + 1):
            for a, b in small_plays(n, k, keep_max):
                big_a, big_b = _lift(a, n), _lift(b, n)
                order_ok = all(
                    (big_a[i] < big_a[j]) == (big_b[i] < big_b[j])
                    and (big_a[i] == big_a[j]) == (big_b[i] == big_b[j])
                    and _ordc_lt(big_a[i], big_a[j]) == _ordc_lt(big_b[i], big_b[j])
                    for i in range(k) for j in range(k))
                small_ok = np.ones((len(words), len(words)), dtype=bool)
                for x, y in zip(a, b):
                    small_ok &= words[:, x][:, None] == words[:, y][None, :]
                big_ok = np.full_like(small_ok, order_ok)
                for i in range(k):
                    lu = _triangle_letters(words, a[2 * i], a[2 * i + 1], n, neutral)
                    lv = _triangle_letters(words, b[2 * i], b[2 * i + 1], n, neutral)
                    big_ok &= lu[:, None] == lv[None, :]
                res.plays_checked += int(small_ok.sum())
                bad = small_ok & ~big_ok
                res.failures += int(bad.sum())
                for i, j in np.argwhere(bad)[: max(0, 10 - len(res.examples))]:
                    u = "".join(alphabet[t] for t in words[i])
                    v = "".join(alphabet[t] for t in words[j])
                    res.examples.append((u, v, a, b))
    return res


def _triangle_letters(words: np.ndarray, c: int, r: int, n: int, neutral: int) -> np.ndarray:
    if c == n:
        return words[:, r]
    return np.full(len(words), neutral, dtype=words.dtype)


def _ordc_lt(x: int, y: int) -> bool:
    a, b = coords(x), coords(y)
    return (a.r, a.c) < (b.r, b.c)
