"""Relation tables over a finite prefix ``[0..n]``.

A table is a dense boolean array with one axis per column, so a membership
query is a single index.  Tables produced by formula evaluation carry the
variable names their axes stand for.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np


class RelationTable:
    def __init__(self, data: np.ndarray, vars: Sequence[str] | None = None):
        data = np.asarray(data, dtype=bool)
        if data.ndim and len(set(data.shape)) != 1:
            raise ValueError(f"table axes must share one domain, got shape {data.shape}")
        if vars is not None:
            vars = tuple(vars)
            if len(vars) != data.ndim:
                raise ValueError(f"{len(vars)} variable names for arity {data.ndim}")
        self._data = data
        self.vars = vars

    @classmethod
    def from_tuples(cls, arity: int, n: int, tuples: Iterable[Sequence[int]],
                    vars: Sequence[str] | None = None) -> "RelationTable":
        data = np.zeros((n + 1,) * arity, dtype=bool)
        for t in tuples:
            t = tuple(t)
            if len(t) != arity:
                raise ValueError(f"tuple {t} does not have arity {arity}")
            if any(not 0 <= v <= n for v in t):
                raise ValueError(f"tuple {t} leaves the domain [0..{n}]")
            data[t] = True
        return cls(data, vars)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def arity(self) -> int:
        return self._data.ndim

    @property
    def n(self) -> int | None:
        """Largest domain element, or None for arity 0 tables."""
        return self._data.shape[0] - 1 if self.arity else None

    def __contains__(self, t) -> bool:
        t = tuple(t)
        if len(t) != self.arity:
            return False
        if any(v < 0 or v > self.n for v in t):
            return False
        return bool(self._data[t])

    def __len__(self) -> int:
        return int(np.count_nonzero(self._data))

    def __bool__(self) -> bool:
        return bool(self._data.any())

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        if self.arity == 0:
            if self._data:
                yield ()
            return
        for t in np.argwhere(self._data):
            yield tuple(int(v) for v in t)

    def to_set(self) -> set[tuple[int, ...]]:
        return set(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RelationTable):
            return NotImplemented
        return (self.arity == other.arity
                and self._data.shape == other.data.shape
                and bool(np.array_equal(self._data, other.data)))

    __hash__ = None

    def __repr__(self) -> str:
        return f"RelationTable(arity={self.arity}, n={self.n}, size={len(self)}, vars={self.vars})"


class OrderTable(RelationTable):
    """A strict linear order stored as a rank vector.

    ``(x, y)`` is a member iff ``rank[x] < rank[y]``.  The dense square is
    only built when someone asks for :attr:`data`, which keeps orders on
    tens of thousands of elements cheap.
    """

    def __init__(self, rank: np.ndarray):
        rank = np.asarray(rank, dtype=np.int64)
        if rank.ndim != 1:
            raise ValueError("rank vector must be one-dimensional")
        self.rank = rank
        self.vars = None
        self._dense = None

    @property
    def data(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.rank[:, None] < self.rank[None, :]
        return self._dense

    @property
    def _data(self) -> np.ndarray:
        return self.data

    @property
    def arity(self) -> int:
        return 2

    @property
    def n(self) -> int:
        return len(self.rank) - 1

    def __contains__(self, t) -> bool:
        t = tuple(t)
        if len(t) != 2 or any(v < 0 or v > self.n for v in t):
            return False
        return bool(self.rank[t[0]] < self.rank[t[1]])

    def __len__(self) -> int:
        m = len(self.rank)
        return m * (m - 1) // 2

    def __bool__(self) -> bool:
        return len(self.rank) > 1

    def __repr__(self) -> str:
        return f"OrderTable(n={self.n})"
