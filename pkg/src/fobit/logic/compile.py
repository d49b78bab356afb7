"""Compiling evaluator: one boolean table per subformula, built bottom-up.

A subformula with free variables ``v1 < ... < vm`` (sorted by name) becomes an
``m``-dimensional boolean array over ``[0..n]``.  Connectives broadcast,
quantifiers reduce an axis.  A block of existential quantifiers over a
conjunction is evaluated as a join followed by a projection (``einsum``), so
the joined table is never materialised; universal blocks go through
``forall v. f == !exists v. !f``.  Tables of named definitions are computed
once per structure and reused.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..tables import RelationTable
from .evaluate import ArityMismatch, UnboundVariable, UnknownRelation
from .structure import FiniteStructure
from .syntax import (And, Atom, ConstEq, Definition, Eq, Exists, Forall,
                     Formula, Iff, Implies, Not, Or, free_vars)

__all__ = ["Compiler", "define"]

_LETTERS = string.ascii_letters


@dataclass(frozen=True)
class _T:
    vars: tuple[str, ...]  # sorted
    arr: np.ndarray


def _align(t: _T, target: tuple[str, ...]) -> np.ndarray:
    arr = t.arr
    for i, v in enumerate(target):
        if v not in t.vars:
            arr = np.expand_dims(arr, i)
    return arr


def _combine(a: _T, b: _T, op) -> _T:
    target = tuple(sorted(set(a.vars) | set(b.vars)))
    return _T(target, op(_align(a, target), _align(b, target)))


def _conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    if isinstance(f, Not):
        return _negated_conjuncts(f.body)
    return [f]


def _negated_conjuncts(f: Formula) -> list[Formula]:
    """Conjuncts whose conjunction is equivalent to ``!f``."""
    if isinstance(f, Or):
        return _negated_conjuncts(f.left) + _negated_conjuncts(f.right)
    if isinstance(f, Implies):
        return _conjuncts(f.left) + _negated_conjuncts(f.right)
    if isinstance(f, Not):
        return _conjuncts(f.body)
    return [Not(f)]


class Compiler:
    """Materialises formula tables over one structure."""

    def __init__(self, structure: FiniteStructure,
                 defs: Mapping[str, Definition] | None = None):
        self.structure = structure
        self.defs = dict(defs or {})
        self.size = structure.n + 1
        self._def_tables: dict[str, np.ndarray] = {}
        self._active: set[str] = set()
        self.max_arity = 0

    def _record(self, t: _T) -> _T:
        self.max_arity = max(self.max_arity, t.arr.ndim)
        return t

    def relation_array(self, name: str) -> np.ndarray:
        """Array of a structure relation or a definition, axes in argument order."""
        rel = self.structure.relations.get(name)
        if rel is not None:
            return rel.data
        if name in self._def_tables:
            return self._def_tables[name]
        d = self.defs.get(name)
        if d is None:
            raise UnknownRelation(f"no relation or definition named {name!r}")
        if name in self._active:
            raise ValueError(f"definition {name!r} is recursive")
        self._active.add(name)
        try:
            t = self.table(d.body)
        finally:
            self._active.discard(name)
        ordered = tuple(sorted(d.params))
        arr = np.broadcast_to(_align(t, ordered), (self.size,) * len(ordered))
        perm = [ordered.index(p) for p in d.params]
        arr = np.transpose(arr, perm).copy()
        self._def_tables[name] = arr
        return arr

    def table(self, f: Formula) -> _T:
        return self._record(self._table(f))

    def _table(self, f: Formula) -> _T:
        if isinstance(f, Atom):
            arr = self.relation_array(f.rel)
            if arr.ndim != len(f.args):
                raise ArityMismatch(f"{f.rel} has arity {arr.ndim}, used with {len(f.args)}")
            out = tuple(sorted(set(f.args)))
            if len(out) == len(f.args):
                return _T(out, np.transpose(arr, [f.args.index(v) for v in out]))
            letter = {v: _LETTERS[i] for i, v in enumerate(out)}
            sub = "".join(letter[a] for a in f.args) + "->" + "".join(letter[v] for v in out)
            return _T(out, np.einsum(sub, arr).copy())
        if isinstance(f, Eq):
            if f.left == f.right:
                return _T((f.left,), np.ones(self.size, dtype=bool))
            return _T(tuple(sorted((f.left, f.right))), np.eye(self.size, dtype=bool))
        if isinstance(f, ConstEq):
            arr = np.zeros(self.size, dtype=bool)
            if f.value < self.size:
                arr[f.value] = True
            return _T((f.var,), arr)
        if isinstance(f, Not):
            t = self.table(f.body)
            return _T(t.vars, ~t.arr)
        if isinstance(f, And):
            return _combine(self.table(f.left), self.table(f.right), np.logical_and)
        if isinstance(f, Or):
            return _combine(self.table(f.left), self.table(f.right), np.logical_or)
        if isinstance(f, Implies):
            return _combine(self.table(f.left), self.table(f.right),
                            lambda a, b: ~a | b)
        if isinstance(f, Iff):
            return _combine(self.table(f.left), self.table(f.right), np.equal)
        if isinstance(f, Exists):
            bound, body = self._block(f, Exists)
            return self._project(bound, _conjuncts(body), free_vars(f))
        if isinstance(f, Forall):
            bound, body = self._block(f, Forall)
            t = self._project(bound, _negated_conjuncts(body), free_vars(f))
            return _T(t.vars, ~t.arr)
        raise TypeError(f"not a formula: {f!r}")

    @staticmethod
    def _block(f: Formula, cls) -> tuple[set[str], Formula]:
        bound = set()
        while isinstance(f, cls):
            bound.add(f.var)
            f = f.body
        return bound, f

    def _project(self, bound: set[str], parts: Sequence[Formula], free) -> _T:
        """Table of ``exists bound. (parts[0] & parts[1] & ...)``."""
        out = tuple(sorted(free))
        tables = [self.table(p) for p in parts]
        if len(tables) == 1:
            t = tables[0]
            axes = tuple(i for i, v in enumerate(t.vars) if v in bound)
            arr = t.arr.any(axis=axes) if axes else t.arr
            return _T(tuple(v for v in t.vars if v not in bound), arr)
        names = sorted(set().union(*(t.vars for t in tables)))
        letter = {v: _LETTERS[i] for i, v in enumerate(names)}
        operands = []
        subs = []
        for t in tables:
            operands.append(t.arr.astype(np.float32))
            subs.append("".join(letter[v] for v in t.vars))
        spec = ",".join(subs) + "->" + "".join(letter[v] for v in out)
        # positive sums stay positive in floating point, so > 0 is exact
        arr = np.einsum(spec, *operands, optimize="greedy") > 0
        return _T(out, np.asarray(arr))


def define(structure: FiniteStructure, f: Formula, vars: Sequence[str] = (),
           defs: Mapping[str, Definition] | None = None,
           compiler: Compiler | None = None) -> RelationTable:
    """Table of all assignments to ``vars`` that make ``f`` true."""
    vars = tuple(vars)
    if len(set(vars)) != len(vars):
        raise ValueError("repeated variable in the output signature")
    missing = free_vars(f) - set(vars)
    if missing:
        raise UnboundVariable(f"free variables {sorted(missing)} are not in the output signature")
    comp = compiler or Compiler(structure, defs)
    t = comp.table(f)
    ordered = tuple(sorted(vars))
    arr = np.broadcast_to(_align(t, ordered), (comp.size,) * len(ordered))
    arr = np.transpose(arr, [ordered.index(v) for v in vars])
    return RelationTable(arr.copy(), vars)
