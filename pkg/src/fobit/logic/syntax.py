"""First-order syntax over purely relational signatures.

Formulas are immutable trees.  An :class:`Atom` names either a relation of the
structure or a :class:`Definition` (a named formula with formal parameters);
which one is decided when the formula is evaluated.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

__all__ = [
    "And", "Atom", "ConstEq", "Definition", "Eq", "Exists", "Forall", "Formula",
    "Iff", "Implies", "Not", "Or", "conj", "disj", "exists", "forall",
    "expand_constants", "free_vars", "quantifier_rank", "render", "eq_const_formula",
]

INFIX = {"lt": "<", "ordc": "<c", "ordb": "<b"}


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[str, ...]

    def __init__(self, rel: str, args: Iterable[str] = ()):
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class ConstEq:
    """``var = value`` for a natural-number literal.

    Evaluation treats the literal as a constant.  ``faithful`` controls rank
    accounting only: when set, the atom counts with the quantifier rank of its
    expansion into pure order formulas (see :func:`eq_const_formula`).  It is
    not part of structural equality since both readings have the same truth
    value in every prefix.
    """
    var: str
    value: int
    faithful: bool = field(default=True, compare=False)


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Atom, Eq, ConstEq, Not, And, Or, Implies, Iff, Exists, Forall]
BINARY = (And, Or, Implies, Iff)
QUANT = (Exists, Forall)


@dataclass(frozen=True)
class Definition:
    """A named formula; ``Atom(name, args)`` substitutes args for params."""
    name: str
    params: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"{self.name}: repeated parameter")
        extra = free_vars(self.body) - set(self.params)
        if extra:
            raise ValueError(f"{self.name}: free variables {sorted(extra)} not among parameters")


def conj(*fs: Formula) -> Formula:
    if not fs:
        raise ValueError("empty conjunction")
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        raise ValueError("empty disjunction")
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def exists(vars: Iterable[str] | str, body: Formula) -> Formula:
    if isinstance(vars, str):
        vars = vars.split()
    for v in reversed(list(vars)):
        body = Exists(v, body)
    return body


def forall(vars: Iterable[str] | str, body: Formula) -> Formula:
    if isinstance(vars, str):
        vars = vars.split()
    for v in reversed(list(vars)):
        body = Forall(v, body)
    return body


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, ConstEq):
        return frozenset((f.var,))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, QUANT):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def _const_rank(value: int) -> int:
    # phi_{=0} has rank 1; phi_{=c+1} = exists z (phi_{=c}(z) & succ(z, x))
    return value + 1


def quantifier_rank(f: Formula, defs: Mapping[str, Definition] | None = None) -> int:
    """Maximum quantifier nesting depth.

    Atoms naming a definition in ``defs`` count with the rank of the
    definition's body, so the result is the rank of the fully expanded
    formula.
    """
    memo: dict[str, int] = {}

    def rank(g: Formula) -> int:
        if isinstance(g, Atom):
            if defs is not None and g.rel in defs:
                if g.rel not in memo:
                    memo[g.rel] = rank(defs[g.rel].body)
                return memo[g.rel]
            return 0
        if isinstance(g, Eq):
            return 0
        if isinstance(g, ConstEq):
            return _const_rank(g.value) if g.faithful else 0
        if isinstance(g, Not):
            return rank(g.body)
        if isinstance(g, BINARY):
            return max(rank(g.left), rank(g.right))
        if isinstance(g, QUANT):
            return 1 + rank(g.body)
        raise TypeError(f"not a formula: {g!r}")

    return rank(f)


def _fresh(avoid: set[str], stem: str = "z") -> str:
    for i in itertools.count():
        name = f"{stem}{i}"
        if name not in avoid:
            avoid.add(name)
            return name
    raise AssertionError


def eq_const_formula(var: str, value: int, order: str = "lt",
                     avoid: Iterable[str] = ()) -> Formula:
    """``var = value`` written with the order alone.

    ``x = 0`` becomes ``!exists z. z < x`` and ``x = c+1`` becomes
    ``exists z. (z = c & z is the predecessor of x)``.
    """
    used = set(avoid) | {var}

    def build(v: str, c: int) -> Formula:
        if c == 0:
            w = _fresh(used)
            return Not(Exists(w, Atom(order, (w, v))))
        z = _fresh(used)
        w = _fresh(used)
        succ = And(Atom(order, (z, v)),
                   Not(Exists(w, And(Atom(order, (z, w)), Atom(order, (w, v))))))
        return Exists(z, And(build(z, c - 1), succ))

    return build(var, value)


def expand_constants(f: Formula) -> Formula:
    """Replace every faithful ``ConstEq`` by its order-only expansion."""
    if isinstance(f, ConstEq):
        if not f.faithful:
            return f
        return eq_const_formula(f.var, f.value, avoid=_all_vars(f))
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(expand_constants(f.body))
    if isinstance(f, BINARY):
        return type(f)(expand_constants(f.left), expand_constants(f.right))
    if isinstance(f, QUANT):
        return type(f)(f.var, expand_constants(f.body))
    raise TypeError(f"not a formula: {f!r}")


def _all_vars(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return set(f.args)
    if isinstance(f, Eq):
        return {f.left, f.right}
    if isinstance(f, ConstEq):
        return {f.var}
    if isinstance(f, Not):
        return _all_vars(f.body)
    if isinstance(f, BINARY):
        return _all_vars(f.left) | _all_vars(f.right)
    return {f.var} | _all_vars(f.body)


# precedence: higher binds tighter
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYM = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def _prec(f: Formula) -> int:
    if isinstance(f, QUANT):
        return 0
    return _PREC.get(type(f), 5)


def render(f: Formula) -> str:
    """Concrete syntax accepted by :func:`fobit.logic.parser.parse`."""
    if isinstance(f, Atom):
        if f.rel in INFIX and len(f.args) == 2:
            return f"{f.args[0]} {INFIX[f.rel]} {f.args[1]}"
        return f"{f.rel}({', '.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, ConstEq):
        return f"{f.var} = {f.value}"
    if isinstance(f, Not):
        inner = render(f.body)
        return f"!{inner}" if _prec(f.body) == 5 and not _is_infix_atom(f.body) else f"!({inner})"
    if isinstance(f, BINARY):
        p = _PREC[type(f)]
        left = render(f.left)
        if _prec(f.left) < p:
            left = f"({left})"
        right = render(f.right)
        if _prec(f.right) <= p:
            right = f"({right})"
        return f"{left} {_SYM[type(f)]} {right}"
    if isinstance(f, QUANT):
        word = "exists" if isinstance(f, Exists) else "forall"
        return f"{word} {f.var}. {render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _is_infix_atom(f: Formula) -> bool:
    return isinstance(f, (Eq, ConstEq)) or (
        isinstance(f, Atom) and f.rel in INFIX and len(f.args) == 2)
