"""Acceptance suite: one test per criterion, run at full size."""
import random
import time
from itertools import product
from math import factorial

import numpy as np

from fobit.catalog import default_catalog, toy_config
from fobit.efgames import (duplicator_wins, duplicator_wins_reference, linear_order,
                           sweep_lifting)
from fobit.logic.compile import Compiler, define
from fobit.logic.evaluate import NaiveEvaluator
from fobit.logic.structure import FiniteStructure
from fobit.logic.syntax import Atom, free_vars
from fobit.orderb import OrdBConfig, build_ordb, build_pi, decode_ordb, min_ell, ordb_less
from fobit.predicates import coords, in_C, in_Q, tri
from fobit.tables import OrderTable, RelationTable
from fobit.verify import verify_many

from formulas import random_formula
from test_efgames import _random_structure

SIZES = list(range(65)) + [128]
GRID_AND_BITS = ["bot", "samecol", "q", "lastcolfull", "diag", "samerow", "rc",
                 "phiQ", "phiR", "carry", "bitR", "r"]


def test_criterion_1_bit_from_orders_and_columns():
    start = time.perf_counter()
    reports = verify_many(["bit"], SIZES)
    elapsed = time.perf_counter() - start
    assert [r.n for r in reports] == SIZES
    assert reports[-1].checked == 129 ** 2
    assert sum(r.mismatches for r in reports) == 0
    assert elapsed < 300


def test_criterion_2_grid_and_arithmetic_formulas():
    reports = verify_many(GRID_AND_BITS, SIZES)
    assert len(reports) == len(GRID_AND_BITS) * len(SIZES)
    assert {r.n for r in reports} >= {0, 1, 2}
    bad = [(r.entry, r.n, r.witness) for r in reports if not r.ok]
    assert bad == []


def test_criterion_3_order_b_round_trip_real_parameters():
    cfg = OrdBConfig((in_C, in_Q), min_ell(2), 3 * min_ell(2), True, ("C", "Q"))
    n = 30000
    start = time.perf_counter()
    order = build_ordb(cfg, n)
    res = decode_ordb(n, OrderTable(np.arange(n + 1)), order.table(), 2, cfg.w)
    elapsed = time.perf_counter() - start
    assert res.ell == cfg.ell == 176
    covered = [int(x) for x in res.covered()]
    lo, hi = tri(cfg.ell + 1) + 1, n - 3 * cfg.ell
    assert set(range(lo, hi + 1)) <= set(covered)
    wrong = [x for x in covered if res.predicate(0, x) != in_C(x) or res.predicate(1, x) != in_Q(x)]
    assert wrong == []
    decoded = sorted(covered, key=res.ordc_key)
    assert decoded == sorted(covered, key=lambda x: (coords(x).r, coords(x).c))
    assert elapsed < 60


def test_criterion_4_order_b_formulas_toy():
    cfg = toy_config()
    reports = verify_many(["U_squares", "ordc_b"], [300], cfg)
    for r in reports:
        assert r.ok, r
        assert r.checked > 0
    res = decode_ordb(300, OrderTable(np.arange(301)), build_ordb(cfg, 300).table(), 1, 4)
    assert reports[1].checked == int(res.coverage.sum()) ** 2


def _pi_agrees(cfg, n):
    pi = build_pi(cfg, n)
    pairs = sorted(pi)
    assert [a for a, _ in pairs] == list(range(n + 1))
    values = [b for _, b in pairs]
    assert sorted(values) == list(range(n + 1))
    cache = {}
    violations = sum(ordb_less(i, j, cfg, cache) != (values[i] < values[j])
                     for i in range(n + 1) for j in range(n + 1))
    return violations


def test_criterion_5_index_permutation():
    assert _pi_agrees(toy_config(), 300) == 0
    assert _pi_agrees(OrdBConfig.named(["C", "Q"]), 2000) == 0
    r = verify_many(["ordb_from_pi"], [300], toy_config())[0]
    assert r.ok and r.checked == 301 ** 2


def test_criterion_6_min_ell_single_predicate():
    assert min_ell(1, "three_ell") == 23
    assert factorial(22) >= 2 ** 69
    assert factorial(21) < 2 ** 66


def test_criterion_7_ef_solver():
    rng = random.Random(2024)
    for _ in range(50):
        arities = rng.choice([(1,), (2,), (1, 2), (0, 2)])
        A = _random_structure(rng, rng.randint(1, 5), arities)
        assert all(duplicator_wins(A, A, k) for k in range(4))
    disagreements, off_pattern = [], []
    for a, b, k in product(range(1, 21), range(1, 21), range(1, 4)):
        La, Lb = linear_order(a), linear_order(b)
        memo = duplicator_wins(La, Lb, k)
        if memo != duplicator_wins_reference(La, Lb, k):
            disagreements.append((a, b, k))
        if memo != (a == b or min(a, b) >= 2 ** k - 1):
            off_pattern.append((a, b, k))
    assert disagreements == []
    assert off_pattern == []


def test_criterion_8_strategy_lifting():
    res = sweep_lifting(6, 2, letters="01", e="e")
    assert res.plays_checked > 10 ** 8
    assert res.failures == 0, res.examples[:3]


def test_criterion_9_evaluator_cross_validation():
    cfg = toy_config()
    catalog = default_catalog(cfg)
    for n in range(13):
        for name in catalog.names():
            entry = catalog[name]
            s = FiniteStructure.with_builtins(n, sorted(entry.builtins), cfg)
            table = Compiler(s, catalog.defs).relation_array(name)
            naive = NaiveEvaluator(s, catalog.defs)
            f = Atom(name, entry.params)
            for t in product(range(n + 1), repeat=len(entry.params)):
                assert naive.holds(f, dict(zip(entry.params, t))) == bool(table[t]), (name, n, t)
    rng = random.Random(99)
    for _ in range(1000):
        n = rng.randint(0, 8)
        rels = FiniteStructure.with_builtins(n, ["lt", "ordc", "C", "Q"]).relations
        rels["E"] = RelationTable(np.array([[rng.random() < 0.3 for _ in range(n + 1)]
                                            for _ in range(n + 1)]))
        rels["P"] = RelationTable(np.array(rng.random() < 0.5))
        s = FiniteStructure(n, rels)
        f = random_formula(rng, 5)
        vars_ = sorted(free_vars(f))
        got = define(s, f, vars_)
        naive = NaiveEvaluator(s)
        for t in product(range(n + 1), repeat=len(vars_)):
            assert (t in got) == naive.holds(f, dict(zip(vars_, t)))
