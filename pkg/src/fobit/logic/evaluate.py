"""Reference (Tarskian) truth checker.

This is deliberately the obvious recursive evaluator.  It is the oracle the
compiling evaluator in :mod:`fobit.logic.compile` is tested against, so it
must not share any of that module's machinery.
"""
from __future__ import annotations

from typing import Mapping

from .structure import FiniteStructure
from .syntax import (And, Atom, ConstEq, Definition, Eq, Exists, Forall,
                     Formula, Iff, Implies, Not, Or, free_vars)

__all__ = [
    "ArityMismatch", "EvaluationError", "NaiveEvaluator", "UnboundVariable",
    "UnknownRelation", "evaluate",
]


class EvaluationError(Exception):
    pass


class UnboundVariable(EvaluationError):
    pass


class UnknownRelation(EvaluationError):
    pass


class ArityMismatch(EvaluationError):
    pass


class NaiveEvaluator:
    """Evaluates formulas in one structure.

    Calls to named definitions are cached on their argument values; the cache
    lives as long as the evaluator, so reuse one instance to sweep many
    valuations.
    """

    def __init__(self, structure: FiniteStructure,
                 defs: Mapping[str, Definition] | None = None):
        self.structure = structure
        self.defs = dict(defs or {})
        self._calls: dict[tuple, bool] = {}

    def holds(self, f: Formula, valuation: Mapping[str, int]) -> bool:
        unbound = free_vars(f) - set(valuation)
        if unbound:
            raise UnboundVariable(f"free variables {sorted(unbound)} have no value")
        for var, value in valuation.items():
            if not 0 <= value <= self.structure.n:
                raise EvaluationError(f"{var} = {value} is outside [0..{self.structure.n}]")
        return self._eval(f, dict(valuation))

    def _lookup(self, v: Mapping[str, int], var: str) -> int:
        try:
            return v[var]
        except KeyError:
            raise UnboundVariable(f"variable {var!r} is not bound") from None

    def _eval(self, f: Formula, v: dict[str, int]) -> bool:
        if isinstance(f, Atom):
            args = tuple(self._lookup(v, a) for a in f.args)
            rel = self.structure.relations.get(f.rel)
            if rel is not None:
                if rel.arity != len(args):
                    raise ArityMismatch(f"{f.rel} has arity {rel.arity}, used with {len(args)}")
                return args in rel
            d = self.defs.get(f.rel)
            if d is None:
                raise UnknownRelation(f"no relation or definition named {f.rel!r}")
            if len(d.params) != len(args):
                raise ArityMismatch(f"{f.rel} takes {len(d.params)} arguments, got {len(args)}")
            key = (f.rel, args)
            if key not in self._calls:
                self._calls[key] = self._eval(d.body, dict(zip(d.params, args)))
            return self._calls[key]
        if isinstance(f, Eq):
            return self._lookup(v, f.left) == self._lookup(v, f.right)
        if isinstance(f, ConstEq):
            return self._lookup(v, f.var) == f.value
        if isinstance(f, Not):
            return not self._eval(f.body, v)
        if isinstance(f, And):
            return self._eval(f.left, v) and self._eval(f.right, v)
        if isinstance(f, Or):
            return self._eval(f.left, v) or self._eval(f.right, v)
        if isinstance(f, Implies):
            return (not self._eval(f.left, v)) or self._eval(f.right, v)
        if isinstance(f, Iff):
            return self._eval(f.left, v) == self._eval(f.right, v)
        if isinstance(f, (Exists, Forall)):
            want = isinstance(f, Exists)
            saved = v.get(f.var)
            try:
                for e in self.structure.domain:
                    v[f.var] = e
                    if self._eval(f.body, v) == want:
                        return want
                return not want
            finally:
                if saved is None:
                    v.pop(f.var, None)
                else:
                    v[f.var] = saved
        raise TypeError(f"not a formula: {f!r}")


def evaluate(structure: FiniteStructure, f: Formula, valuation: Mapping[str, int] | None = None,
             defs: Mapping[str, Definition] | None = None) -> bool:
    return NaiveEvaluator(structure, defs).holds(f, valuation or {})
