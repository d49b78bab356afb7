"""The formula catalog.

Formulas over ``<``, ``<c``, ``C`` and ``Q`` that define the grid geometry,
the bits of ``q(x)`` and ``r(x)``, and finally ``Bit``; formulas over ``<``
and ``<b`` that decode a ``<b`` order; and two small demonstrators.  Entries
refer to each other by name, so each is stored as a :class:`Definition` and
expanded lazily by the evaluators.

Each entry carries a semantic oracle.  A handful of entries are *repaired*
versions of the direct formulas; the direct versions live in
:data:`LITERAL_VARIANTS` together with the prefixes on which they go wrong.
"""
from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .logic.parser import parse
from .logic.syntax import (And, Atom, ConstEq, Definition, Eq, Exists,
                           Forall, Formula, Iff, Implies, Not, Or, conj, disj,
                           eq_const_formula, quantifier_rank)
from .oracles import ORACLES, relation
from .orderb import OrdBConfig, build_ordb, decode_ordb, perm_unrank
from .predicates import coords, in_squares, tri
from .tables import OrderTable

__all__ = [
    "CatalogEntry", "FormulaCatalog", "LITERAL_VARIANTS", "ORDERS",
    "SMALL_PREFIXES", "basic_definitions", "bit_chain_definitions",
    "build_basic", "build_bit_chain", "build_bit_order_demo", "build_grid",
    "build_ordb_formulas", "build_permutation_order", "default_catalog",
    "grid_definitions", "ordb_catalog", "arithmetic_definitions",
]

ORDERS = ("lt", "ordc", "ordb")
_INFIX = {"lt": "<", "ordc": "<c", "ordb": "<b"}


def _order(name: str) -> str:
    if name not in _INFIX:
        raise ValueError(f"unknown order {name!r}; expected one of {ORDERS}")
    return _INFIX[name]


def build_basic(kind: str, arg: int | str | None = None) -> Formula:
    """The order shorthands.

    ``kind`` is one of ``eq_const`` (``arg`` the constant), ``max``, ``succ``
    or ``leq`` (``arg`` the order name).  ``max`` has free variable ``x``;
    ``succ`` and ``leq`` have ``x, y`` with ``y`` the successor/upper end.
    """
    if kind == "eq_const":
        if not isinstance(arg, int) or isinstance(arg, bool) or arg < 0:
            raise ValueError("eq_const needs a natural number")
        return eq_const_formula("x", arg)
    op = _order(arg if arg is not None else "lt")
    if kind == "max":
        return parse(f"!(exists z. x {op} z)")
    if kind == "succ":
        return parse(f"x {op} y & !(exists z. x {op} z & z {op} y)")
    if kind == "leq":
        return parse(f"x {op} y | x = y")
    raise ValueError(f"unknown basic formula kind {kind!r}")


def basic_definitions(orders: Iterable[str] = ("lt", "ordc")) -> dict[str, Definition]:
    defs = {}
    for o in orders:
        defs[f"max_{o}"] = Definition(f"max_{o}", ("x",), build_basic("max", o))
        defs[f"succ_{o}"] = Definition(f"succ_{o}", ("x", "y"), build_basic("succ", o))
    return defs


_GRID = {
    "bot": (("x",), "forall z. (z = 2 -> x <c z)"),
    "samecol": (("x", "y"), "!(exists z. bot(z) & (x < z & (z < y | z = y) | y < z & (z < x | z = x)))"),
    "q": (("x", "y"), "bot(y) & samecol(x, y)"),
    "lastcolfull": ((), "exists z. max_lt(z) & (z = 0 | (exists y. succ_lt(y, z) & succ_ordc(y, z) & !y = 0))"),
    "diag": (("x",), "(exists y. succ_lt(x, y) & bot(y)) | max_lt(x) & lastcolfull()"),
    "samerow": (("x", "y"), "!(exists z. diag(z) & (x <c z & (z <c y | z = y) | y <c z & (z <c x | z = x)))"),
    "rc": (("x", "y"), "exists z. diag(z) & samerow(x, z) & samecol(z, y)"),
}

# Prefixes [0..n] whose rows are too few to hold every bit position of n:
# r and Bit are hard-coded there.  A search up to 2*10**6 finds no others,
# and the row count grows like sqrt(2n) against log2(n).
SMALL_PREFIXES = (4, 8)

_BIT_CHAIN = {
    # Q writes the bits of q(x) = tri(c) into column c-1; reach that whole
    # column through the <-predecessor of x's column bottom
    "phiQ": (("x", "u"), "exists y. exists p. exists z. q(x, y) & succ_lt(p, y) & samecol(z, p)"
                         " & samerow(z, u) & Q(z)"),
    "phiR": (("x", "u"), "exists y. exists z. rc(x, y) & succ_ordc(z, y) & samerow(z, y) & samerow(z, u) & C(z)"),
    "carry": (("x", "z"), "exists u. samecol(u, z) & u < z & phiQ(x, u) & phiR(x, u)"
                          " & (forall v. u < v & v < z -> phiQ(x, v) | phiR(x, v))"),
    "bitR": (("x", "z"), "!carry(x, z) & (phiQ(x, z) <-> !phiR(x, z)) | carry(x, z) & (phiQ(x, z) <-> phiR(x, z))"),
    "small_prefix": ((), "exists z. max_lt(z) & (" + " | ".join(f"z = {m}" for m in SMALL_PREFIXES) + ")"),
    "r": (("x", "y"), "!small_prefix() & (forall u. (phiR(x, u) <-> bitR(y, u)))"
                      " | small_prefix() & r_small(x, y)"),
    "bit": (("x", "y"), "!small_prefix() & (exists u. r(u, y) & bitR(x, u))"
                        " | small_prefix() & bit_small(x, y)"),
}

_LITERAL = {
    "phiQ": (("x", "u"), "exists y. exists z. samecol(x, y) & succ_ordc(z, y) & samerow(z, y) & samerow(z, u) & Q(z)"),
    "r": (("x", "y"), "forall u. (phiR(x, u) <-> bitR(y, u))"),
    "bit": (("x", "y"), "exists u. r(u, y) & bitR(x, u)"),
}


def _pairs_formula(pairs: Iterable[tuple[int, int]], x: str = "x", y: str = "y") -> Formula:
    parts = [And(ConstEq(x, a), ConstEq(y, b)) for a, b in pairs]
    return disj(*parts) if parts else _false(x)


def _false(v: str) -> Formula:
    return Not(Eq(v, v))


def _hardcoded() -> dict[str, Definition]:
    top = max(SMALL_PREFIXES)
    r_pairs = [(a, coords(a).r) for a in range(top + 1)]
    bit_pairs = [(a, b) for a in range(top + 1) for b in range(top + 1) if (a >> b) & 1]
    return {
        "r_small": Definition("r_small", ("x", "y"), _pairs_formula(r_pairs)),
        "bit_small": Definition("bit_small", ("x", "y"), _pairs_formula(bit_pairs)),
    }


def build_grid(name: str) -> Formula:
    if name not in _GRID:
        raise ValueError(f"unknown grid formula {name!r}")
    return parse(_GRID[name][1])


def build_bit_chain(name: str) -> Formula:
    if name not in _BIT_CHAIN:
        raise ValueError(f"unknown bit-chain formula {name!r}")
    return parse(_BIT_CHAIN[name][1])


def grid_definitions() -> dict[str, Definition]:
    return {k: Definition(k, p, parse(t)) for k, (p, t) in _GRID.items()}


def bit_chain_definitions() -> dict[str, Definition]:
    defs = {k: Definition(k, p, parse(t)) for k, (p, t) in _BIT_CHAIN.items()}
    defs.update(_hardcoded())
    return defs


def arithmetic_definitions() -> dict[str, Definition]:
    defs = basic_definitions()
    defs.update(grid_definitions())
    defs.update(bit_chain_definitions())
    return defs


def literal_definitions(name: str) -> dict[str, Definition]:
    """Catalog definitions with entry ``name`` swapped for its direct, unrepaired version."""
    if name not in _LITERAL:
        raise ValueError(f"no literal variant of {name!r}")
    defs = arithmetic_definitions()
    params, text = _LITERAL[name]
    defs[name] = Definition(name, params, parse(text))
    return defs


# Each literal variant with prefixes on which it disagrees with its oracle.
LITERAL_VARIANTS: dict[str, tuple[int, ...]] = {
    "phiQ": (3, 6, 7, 10),
    "r": SMALL_PREFIXES,
    "bit": SMALL_PREFIXES,
}


# --- demonstrators -------------------------------------------------------------

BIT_ORDER_DEPTH = 4


def _bit_less(a: str, b: str, depth: int) -> Formula:
    """``a < b`` from ``bit`` for ``a, b < B(depth)``, ``B(0) = 2``, ``B(d+1) = 2**B(d)``."""
    if depth == 0:
        k = f"k{depth}"
        return And(Not(Exists(k, Atom("bit", (a, k)))), Exists(k, Atom("bit", (b, k))))
    i, j = f"i{depth}", f"j{depth}"
    higher = Implies(_bit_less(i, j, depth - 1), Iff(Atom("bit", (a, j)), Atom("bit", (b, j))))
    return Exists(i, conj(Atom("bit", (b, i)), Not(Atom("bit", (a, i))), Forall(j, higher)))


def build_bit_order_demo(depth: int = BIT_ORDER_DEPTH) -> Formula:
    """``x < y`` from ``bit`` alone: the most significant differing bit.

    Comparing bit positions needs the order again, one level down, so the
    formula nests ``depth`` times; depth 4 is correct for ``n < 2**65536``.
    Bit positions are domain elements, which holds for every ``n >= 1``.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    return _bit_less("x", "y", depth)


def build_permutation_order() -> Formula:
    return parse("exists u. exists v. pi(x, u) & pi(y, v) & u < v")


# --- decoding <b -----------------------------------------------------------------

MAX_FORMULA_ELL = 6


def _plus_name(j: int) -> str:
    return f"plus{j}"


def build_ordb_formulas(config: OrdBConfig) -> list[tuple[str, Formula]]:
    """Formulas over ``<`` and ``<b`` recovering the backbone, the predicates and ``<c``.

    Returns ``(name, formula)`` pairs in dependency order; each formula's
    free variables are its parameters in sorted order except where noted by
    :func:`ordb_definitions`.
    """
    return [(d.name, d.body) for d in ordb_definitions(config).values()]


def ordb_definitions(config: OrdBConfig) -> dict[str, Definition]:
    ell, w, k = config.ell, config.w, config.k
    if ell > MAX_FORMULA_ELL:
        raise ValueError(f"ell = {ell} > {MAX_FORMULA_ELL}: the permutation family "
                         "is too large, use the algorithmic decoder")
    defs: dict[str, Definition] = dict(basic_definitions(("lt",)))

    def add(name: str, params, body: Formula | str):
        if isinstance(body, str):
            body = parse(body)
        defs[name] = Definition(name, tuple(params), body)

    add("backbone", ("x",), "forall y. (y = 2 -> x <b y)")
    add(_plus_name(0), ("x", "y"), "x = y")
    for j in range(1, max(ell, w - 1) + 1):
        if j == 1:
            add(_plus_name(1), ("x", "y"), "succ_lt(x, y)")
        else:
            add(_plus_name(j), ("x", "y"), f"exists z. {_plus_name(j - 1)}(x, z) & succ_lt(z, y)")
    # u + ell sits above u in the same column: it is <b-later, and the one
    # same-row pair at distance ell (columns ell-1 and ell) is excluded
    add("complete", ("u",),
        f"backbone(u) & !u = {tri(ell - 1)} & (exists v. {_plus_name(ell)}(u, v) & backbone(v) & u <b v"
        " & !(exists z. u < z & z < v & backbone(z)))")
    for a in range(1, ell):
        for b in range(1, ell):
            if a != b:
                add(f"before_{a}_{b}", ("u",),
                    f"exists y. exists z. {_plus_name(a)}(u, y) & {_plus_name(b)}(u, z) & y <b z")
    limit = 1 << (k * w)
    perm_names = {}
    for m in range(limit):
        p = perm_unrank(m, ell - 1)
        name = "perm_" + "".join(map(str, p))
        perm_names[m] = name
        parts = [Atom("complete", ("u",))]
        parts += [Atom(f"before_{a}_{b}", ("u",)) for a, b in zip(p, p[1:])]
        defs[name] = Definition(name, ("u",), conj(*parts))
    for j in range(w):
        for i in range(k):
            pos = j * k + i
            hits = [Atom(perm_names[m], ("u",)) for m in range(limit)
                    if (m >> (k * w - 1 - pos)) & 1]
            body = disj(*hits) if hits else _false("u")
            defs[f"codebit_{j}_{i}"] = Definition(f"codebit_{j}_{i}", ("u",), body)
    floor = tri(ell + 1)
    add("small", ("x",), f"!(exists z. z = {floor} & z < x)")
    for i, (pred, pname) in enumerate(zip(config.predicates, config.names)):
        members = [ConstEq("x", a) for a in range(floor + 1) if pred(a)]
        hard = disj(*members) if members else _false("x")
        windows = disj(*[And(Atom(_plus_name(j), ("u", "x")), Atom(f"codebit_{j}_{i}", ("u",)))
                         for j in range(w)])
        body = Or(And(Atom("small", ("x",)), hard),
                  And(Not(Atom("small", ("x",))), Exists("u", windows)))
        defs[f"U_{pname}"] = Definition(f"U_{pname}", ("x",), body)

    # <c: bases, offsets and backbone rows
    add("base", ("x", "u"), "backbone(u) & (u < x | u = x) & !(exists z. u < z & (z < x | z = x) & backbone(z))")
    for i in range(ell):
        add(f"off{i}", ("x",), f"exists u. base(x, u) & {_plus_name(i)}(u, x)")
    add("rowstart", ("d",),
        f"backbone(d) & ((exists e. succ_lt(d, e) & backbone(e))"
        f" | (exists p. {_plus_name(ell)}(p, d) & complete(p) & !(exists z. p <b z & z <b d & backbone(z))))")
    add("rowlt", ("u", "v"), "exists d. rowstart(d) & u <b d & (d <b v | d = v)")
    add("bases_rowle", ("x", "y"), "exists u. exists v. base(x, u) & base(y, v) & !rowlt(v, u)")
    add("bases_rowlt", ("x", "y"), "exists u. exists v. base(x, u) & base(y, v) & rowlt(u, v)")
    add("bases_ordb", ("x", "y"), "exists u. exists v. base(x, u) & base(y, v) & u <b v")
    lo = [And(Atom(f"off{i}", ("x",)), Atom(f"off{j}", ("y",)))
          for i in range(ell) for j in range(ell) if i < j]
    eq = [And(Atom(f"off{i}", ("x",)), Atom(f"off{i}", ("y",))) for i in range(ell)]
    hi = [And(Atom(f"off{i}", ("x",)), Atom(f"off{j}", ("y",)))
          for i in range(ell) for j in range(ell) if i > j]
    defs["offlt"] = Definition("offlt", ("x", "y"), disj(*lo))
    defs["offeq"] = Definition("offeq", ("x", "y"), disj(*eq))
    defs["offgt"] = Definition("offgt", ("x", "y"), disj(*hi))
    add("ordc_b", ("x", "y"),
        "offlt(x, y) & bases_rowle(x, y) | offgt(x, y) & bases_rowlt(x, y) | offeq(x, y) & bases_ordb(x, y)")
    return defs


# --- the catalog ------------------------------------------------------------------

Oracle = Callable[[int, "OrdBConfig | None"], np.ndarray]
Mask = Callable[[int, "OrdBConfig | None"], np.ndarray]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    definition: Definition
    builtins: frozenset[str]
    oracle: Oracle | None
    mask: Mask | None = None  # tuples the oracle speaks about; all when None
    needs_config: bool = False

    @property
    def params(self) -> tuple[str, ...]:
        return self.definition.params


@dataclass
class FormulaCatalog:
    entries: dict[str, CatalogEntry]
    defs: dict[str, Definition] = field(default_factory=dict)

    def __post_init__(self):
        for e in self.entries.values():
            self.defs.setdefault(e.name, e.definition)
        self.order = self.dependency_order()
        for name, entry in self.entries.items():
            used = self.builtins_used(name, entry.builtins)
            if not used <= entry.builtins:
                raise ValueError(f"{name} uses undeclared built-ins {sorted(used - entry.builtins)}")

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __getitem__(self, name: str) -> CatalogEntry:
        try:
            return self.entries[name]
        except KeyError:
            raise KeyError(f"no catalog entry named {name!r}") from None

    def names(self) -> list[str]:
        return list(self.entries)

    def rank(self, name: str) -> int:
        """Quantifier rank of the expanded entry; its built-ins count as atoms."""
        shadow = self.entries[name].builtins
        return quantifier_rank(self.defs[name].body,
                               {k: d for k, d in self.defs.items() if k not in shadow})

    def deps(self, name: str, shadow: frozenset[str] = frozenset()) -> set[str]:
        """Definitions referenced by ``name``; names in ``shadow`` are structure relations."""
        return {a.rel for a in _atoms(self.defs[name].body)
                if a.rel in self.defs and a.rel not in shadow}

    def dependency_order(self) -> list[str]:
        shadows = {e.name: e.builtins for e in self.entries.values()}
        graph = {name: self.deps(name, shadows.get(name, frozenset())) for name in self.defs}
        try:
            return list(graphlib.TopologicalSorter(graph).static_order())
        except graphlib.CycleError as exc:
            raise ValueError(f"catalog definitions are cyclic: {exc.args[1]}") from None

    def builtins_used(self, name: str, shadow: frozenset[str] = frozenset()) -> set[str]:
        out: set[str] = set()
        seen: set[str] = set()
        stack = [name]
        while stack:
            d = stack.pop()
            if d in seen:
                continue
            seen.add(d)
            for a in _atoms(self.defs[d].body):
                if a.rel in self.defs and a.rel not in shadow:
                    stack.append(a.rel)
                else:
                    out.add(a.rel)
        return out


def _atoms(f: Formula):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from _atoms(f.body)
    elif isinstance(f, (And, Or, Implies, Iff)):
        yield from _atoms(f.left)
        yield from _atoms(f.right)
    elif isinstance(f, (Exists, Forall)):
        yield from _atoms(f.body)


def _semantic(name: str) -> Oracle:
    arity, factory = ORACLES[name]
    return lambda n, config=None: relation(arity, n, factory(n))


_ARITH = ("lt", "ordc", "C", "Q")


def default_catalog(config: OrdBConfig | None = None) -> FormulaCatalog:
    """All entries over ``<``, ``<c``, ``C``, ``Q``; ``<b`` entries when a config is given."""
    defs = arithmetic_definitions()
    entries = {}
    for name in ["max_lt", "succ_lt", "max_ordc", "succ_ordc", *_GRID, "phiQ", "phiR",
                 "carry", "bitR", "r", "bit"]:
        entries[name] = CatalogEntry(name, defs[name], frozenset(_ARITH), _semantic(name))
    demo = Definition("lt_from_bit", ("x", "y"), build_bit_order_demo())
    entries["lt_from_bit"] = CatalogEntry("lt_from_bit", demo, frozenset({"bit"}),
                                          _semantic("lt_from_bit"))
    cat_defs = dict(defs)
    cat_defs["lt_from_bit"] = demo
    if config is not None:
        more = ordb_catalog(config)
        entries.update(more.entries)
        cat_defs.update(more.defs)
    return FormulaCatalog(entries, cat_defs)


def _ordb_rank(n: int, config: OrdBConfig) -> np.ndarray:
    return build_ordb(config, n).rank


def _decoded(n: int, config: OrdBConfig):
    rank = _ordb_rank(n, config)
    return decode_ordb(n, OrderTable(np.arange(n + 1)), OrderTable(rank), config.k, config.w)


def ordb_catalog(config: OrdBConfig) -> FormulaCatalog:
    """Entries whose structures carry ``<b`` (or its index permutation) for ``config``."""
    pi_def = Definition("ordb_from_pi", ("x", "y"), build_permutation_order())

    def ordb_oracle(n, cfg):
        rank = _ordb_rank(n, cfg)
        return rank[:, None] < rank[None, :]

    entries = {"ordb_from_pi": CatalogEntry("ordb_from_pi", pi_def, frozenset({"pi", "lt"}),
                                            ordb_oracle, needs_config=True)}
    defs: dict[str, Definition] = {"ordb_from_pi": pi_def}
    if config.ell > MAX_FORMULA_ELL:
        return FormulaCatalog(entries, defs)
    odefs = ordb_definitions(config)
    defs.update(odefs)
    builtins = frozenset({"lt", "ordb"})
    floor = tri(config.ell + 1)

    def backbone_oracle(n, cfg):
        return np.array([coords(x).r % cfg.ell == 0 for x in range(n + 1)], dtype=bool)

    entries["backbone"] = CatalogEntry("backbone", odefs["backbone"], builtins,
                                       backbone_oracle, needs_config=True)

    def complete_oracle(n, cfg):
        out = np.zeros(n + 1, dtype=bool)
        for u in range(n + 1):
            p = coords(u)
            out[u] = p.r % cfg.ell == 0 and p.r + cfg.ell <= p.c and u + cfg.ell <= n
        return out

    entries["complete"] = CatalogEntry("complete", odefs["complete"], builtins,
                                       complete_oracle, needs_config=True)

    def covered(n, cfg):
        mask = _decoded(n, cfg).coverage.copy()
        mask[: floor + 1] = True
        return mask[: n + 1]

    for i, pname in enumerate(config.names):
        def u_oracle(n, cfg, i=i):
            return np.array([cfg.predicates[i](x) for x in range(n + 1)], dtype=bool)

        entries[f"U_{pname}"] = CatalogEntry(f"U_{pname}", odefs[f"U_{pname}"], builtins,
                                             u_oracle, covered, needs_config=True)

    def ordc_oracle(n, cfg):
        key = np.array([(coords(x).r, coords(x).c) for x in range(n + 1)]).reshape(-1, 2)
        r, c = key[:, 0], key[:, 1]
        return (r[:, None] < r[None, :]) | ((r[:, None] == r[None, :]) & (c[:, None] < c[None, :]))

    def ordc_mask(n, cfg):
        cov = _decoded(n, cfg).coverage
        return cov[:, None] & cov[None, :]

    entries["ordc_b"] = CatalogEntry("ordc_b", odefs["ordc_b"], builtins, ordc_oracle,
                                     ordc_mask, needs_config=True)
    return FormulaCatalog(entries, defs)


def toy_config() -> OrdBConfig:
    """``k = 1``, ``ell = 5``, ``w = 4`` with the squares as the only predicate."""
    return OrdBConfig((in_squares,), 5, 4, False, ("squares",))
