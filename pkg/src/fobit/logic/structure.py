from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from ..predicates import builtin_table
from ..tables import RelationTable

__all__ = ["FiniteStructure", "word_relations"]


@dataclass(frozen=True)
class FiniteStructure:
    """Domain ``[0..n]`` with named relations."""
    n: int
    relations: Mapping[str, RelationTable] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be a natural number")
        for name, table in self.relations.items():
            if table.arity and table.n != self.n:
                raise ValueError(f"relation {name!r} lives on [0..{table.n}], not [0..{self.n}]")
        object.__setattr__(self, "relations", dict(self.relations))

    @classmethod
    def with_builtins(cls, n: int, names: Iterable[str], config=None,
                      extra: Mapping[str, RelationTable] | None = None) -> "FiniteStructure":
        rels = {name: builtin_table(name, n, config) for name in names}
        if extra:
            rels.update(extra)
        return cls(n, rels)

    @property
    def domain(self) -> range:
        return range(self.n + 1)

    @property
    def signature(self) -> dict[str, int]:
        return {name: t.arity for name, t in self.relations.items()}

    def extend(self, **relations: RelationTable) -> "FiniteStructure":
        rels = dict(self.relations)
        rels.update(relations)
        return FiniteStructure(self.n, rels)


def word_relations(word: str, alphabet: Iterable[str] | None = None) -> dict[str, RelationTable]:
    """Unary letter relations ``Q_a = {i : word[i] == a}``."""
    if not word:
        raise ValueError("words must be non-empty to have a domain")
    letters = sorted(set(alphabet) if alphabet is not None else set(word))
    missing = set(word) - set(letters)
    if missing:
        raise ValueError(f"letters {sorted(missing)} are not in the alphabet")
    arr = np.array(list(word))
    return {f"Q_{a}": RelationTable(arr == a) for a in letters}
