import random
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fobit.catalog import build_basic, default_catalog
from fobit.logic.compile import Compiler, define
from fobit.logic.evaluate import (ArityMismatch, NaiveEvaluator, UnboundVariable,
                                  UnknownRelation, evaluate)
from fobit.logic.parser import FormulaSyntaxError, parse
from fobit.logic.structure import FiniteStructure, word_relations
from fobit.logic.syntax import (And, Atom, ConstEq, Definition, Eq, Exists, Forall,
                                Iff, Implies, Not, Or, eq_const_formula,
                                expand_constants, free_vars, quantifier_rank, render)
from fobit.tables import RelationTable

from formulas import formulas, random_formula


def test_parse_shapes():
    f = parse("!(exists z. x <c z)")
    assert f == Not(Exists("z", Atom("ordc", ("x", "z"))))
    g = parse("forall y. (y = 2 -> x <b y)")
    assert g == Forall("y", Implies(ConstEq("y", 2), Atom("ordb", ("x", "y"))))
    assert parse("P()") == Atom("P", ())


@pytest.mark.parametrize("text", ["x <", "exists . P(x)", "(x = y", "x = y)", "P(x,)", "x < 3", ""])
def test_parse_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse(text)


def test_parse_error_position():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("x = y &\n  & z = u")
    assert err.value.line == 2


def test_precedence():
    assert parse("a = b | c = d & e = f") == Or(Eq("a", "b"), And(Eq("c", "d"), Eq("e", "f")))
    assert parse("a = b -> c = d <-> e = f") == Iff(Implies(Eq("a", "b"), Eq("c", "d")), Eq("e", "f"))
    # quantifiers extend as far right as possible
    assert parse("exists x. P(x) & Q(x)") == Exists("x", And(Atom("P", ("x",)), Atom("Q", ("x",))))


def test_render_examples():
    assert render(Eq("x", "y")) == "x = y"
    f = Implies(Iff(Eq("a", "b"), Eq("c", "d")), Eq("e", "f"))
    assert parse(render(f)) == f
    g = Iff(Eq("a", "b"), Iff(Eq("c", "d"), Eq("e", "f")))
    assert parse(render(g)) == g


@given(formulas(depth=5))
def test_render_parse_round_trip(f):
    assert parse(render(f)) == f


def test_render_round_trip_corpus():
    rng = random.Random(7)
    for _ in range(1000):
        f = random_formula(rng, 6)
        assert parse(render(f)) == f


def test_free_vars():
    cat = default_catalog()
    assert free_vars(cat.defs["samecol"].body) == {"x", "y"}
    assert free_vars(parse("exists x. forall y. x < y")) == frozenset()
    assert free_vars(Exists("x", Atom("C", ("x",)))) == frozenset()


def test_quantifier_rank_examples():
    assert quantifier_rank(Atom("C", ("x",))) == 0
    assert quantifier_rank(Exists("x", Forall("y", Atom("lt", ("x", "y"))))) == 2
    assert quantifier_rank(eq_const_formula("x", 2)) == 3
    assert quantifier_rank(ConstEq("x", 2)) == 3
    assert quantifier_rank(ConstEq("x", 2, faithful=False)) == 0


@pytest.mark.parametrize("c", range(6))
def test_const_eq_expansion_is_equivalent(c):
    for n in range(8):
        s = FiniteStructure.with_builtins(n, ["lt"])
        want = define(s, ConstEq("x", c), ["x"])
        got = define(s, eq_const_formula("x", c), ["x"])
        assert got == want
        assert quantifier_rank(eq_const_formula("x", c)) == quantifier_rank(ConstEq("x", c))


def test_expand_constants_removes_faithful_literals():
    f = expand_constants(parse("exists y. y = 3 & x < y"))
    assert " = 3" not in render(f)
    s = FiniteStructure.with_builtins(6, ["lt"])
    assert define(s, f, ["x"]) == define(s, parse("exists y. y = 3 & x < y"), ["x"])


def test_definition_validation():
    with pytest.raises(ValueError):
        Definition("d", ("x", "x"), Eq("x", "x"))
    with pytest.raises(ValueError):
        Definition("d", ("x",), Eq("x", "y"))


def test_evaluate_examples():
    s5 = FiniteStructure.with_builtins(5, ["lt"])
    assert evaluate(s5, parse("exists x. forall y. (x = y | x < y)"))
    cat = default_catalog()
    s27 = FiniteStructure.with_builtins(27, ["lt", "ordc"])
    assert evaluate(s27, Atom("diag", ("x",)), {"x": 5}, cat.defs)
    s0 = FiniteStructure.with_builtins(0, ["lt", "ordc"])
    assert evaluate(s0, Atom("bot", ("x",)), {"x": 0}, cat.defs)


def test_evaluate_errors():
    s = FiniteStructure.with_builtins(3, ["lt"])
    with pytest.raises(UnboundVariable):
        evaluate(s, parse("x < y"), {"x": 1})
    with pytest.raises(UnknownRelation):
        evaluate(s, parse("R(x)"), {"x": 1})
    with pytest.raises(ArityMismatch):
        evaluate(s, parse("lt(x)"), {"x": 1})
    with pytest.raises(UnboundVariable):
        define(s, parse("x < y"), ["x"])
    with pytest.raises(UnknownRelation):
        define(s, parse("R(x)"), ["x"])


def test_define_samecol_and_sentences():
    cat = default_catalog()
    s = FiniteStructure.with_builtins(27, ["lt", "ordc"])
    from fobit.predicates import coords
    want = {(x, y) for x in range(28) for y in range(28) if coords(x).c == coords(y).c}
    assert define(s, Atom("samecol", ("x", "y")), ["x", "y"], cat.defs).to_set() == want
    t = define(s, parse("exists x. forall y. !(x < y) -> x = y"), [])
    assert t.arity == 0 and bool(t)
    assert not define(s, parse("forall x. exists y. x < y"), [])


def test_define_respects_output_order():
    s = FiniteStructure.with_builtins(4, ["lt"])
    assert define(s, parse("x < y"), ["y", "x"]).to_set() == {(b, a) for a in range(5) for b in range(5) if a < b}


def test_structure_validation():
    with pytest.raises(ValueError):
        FiniteStructure(-1)
    with pytest.raises(ValueError):
        FiniteStructure(3, {"R": RelationTable(np.zeros(3, dtype=bool))})
    rels = word_relations("abca")
    assert rels["Q_a"].to_set() == {(0,), (3,)}
    with pytest.raises(ValueError):
        word_relations("")


def _random_structure(rng, n):
    rels = FiniteStructure.with_builtins(n, ["lt", "ordc", "C", "Q"]).relations
    rels["E"] = RelationTable(np.array([[rng.random() < 0.3 for _ in range(n + 1)] for _ in range(n + 1)]))
    rels["P"] = RelationTable(np.array(rng.random() < 0.5))
    return FiniteStructure(n, rels)


def _agree(s, f):
    vars_ = sorted(free_vars(f))
    got = define(s, f, vars_)
    ev = NaiveEvaluator(s)
    for t in product(s.domain, repeat=len(vars_)):
        assert (t in got) == ev.holds(f, dict(zip(vars_, t))), render(f)


@given(formulas(depth=5), st.integers(0, 6), st.integers(0, 100))
def test_compiled_matches_naive(f, n, seed):
    _agree(_random_structure(random.Random(seed), n), f)


def test_basic_shorthands():
    s = FiniteStructure.with_builtins(9, ["lt"])
    assert define(s, build_basic("max", "lt"), ["x"]).to_set() == {(9,)}
    assert build_basic("eq_const", 0) == Not(Exists("z0", Atom("lt", ("z0", "x"))))
    with pytest.raises(ValueError):
        build_basic("eq_const", -1)
    with pytest.raises(ValueError):
        build_basic("succ", "nope")


def test_compiler_tables_stay_small():
    cat = default_catalog()
    comp = Compiler(FiniteStructure.with_builtins(20, ["lt", "ordc", "C", "Q"]), cat.defs)
    comp.relation_array("bit")
    assert comp.max_arity <= 4
