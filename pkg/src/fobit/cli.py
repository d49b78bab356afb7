"""Command-line front end.

Exit codes: 0 on success, 1 when a verification or round trip finds a
discrepancy, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import efgames as ef
from .catalog import build_permutation_order, default_catalog
from .logic.compile import define
from .logic.evaluate import EvaluationError, NaiveEvaluator
from .logic.parser import FormulaSyntaxError, parse
from .logic.structure import FiniteStructure
from .logic.syntax import Atom, free_vars
from .orderb import (DecodeError, OrdBConfig, build_ordb, decode_ordb,
                     min_ell)
from .predicates import ARITY, builtin_table, coords, in_C, in_Q, tri
from .tables import OrderTable, RelationTable
from .verify import reports_to_csv, reports_to_json, verify_many

MAX_TRIANGLE = 10_000


class UsageError(Exception):
    pass


# --- file formats --------------------------------------------------------------

def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def parse_config(text: str) -> tuple[OrdBConfig, int | None]:
    """``k``, ``ell`` (or ``auto``), ``w`` (or ``3l``), ``predicates`` and optionally ``n``."""
    fields: dict[str, list[str]] = {}
    for line in _lines(text):
        key, *vals = line.split()
        if key not in {"k", "ell", "w", "predicates", "n"}:
            raise UsageError(f"unknown config key {key!r}")
        if not vals:
            raise UsageError(f"config key {key!r} has no value")
        fields[key] = vals
    if "predicates" not in fields:
        raise UsageError("config needs a 'predicates' line")
    names = fields["predicates"]
    k = int(fields.get("k", [len(names)])[0])
    if k != len(names):
        raise UsageError(f"k = {k} but {len(names)} predicates are listed")
    ell = fields.get("ell", ["auto"])[0]
    w = fields.get("w", ["3l"])[0]
    try:
        cfg = OrdBConfig.named(names, ell if ell == "auto" else int(ell), w if w == "3l" else int(w))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = int(fields["n"][0]) if "n" in fields else None
    return cfg, n


def parse_structure(text: str, config: OrdBConfig | None = None) -> FiniteStructure:
    """``n N``, ``builtins NAME ...`` and ``relation NAME ARITY: a b; c d; ...`` lines."""
    n = None
    builtins: list[str] = []
    rels: dict[str, tuple[int, list[tuple[int, ...]]]] = {}
    for line in _lines(text):
        key, _, rest = line.partition(" ")
        if key == "n":
            n = int(rest)
        elif key == "builtins":
            builtins += rest.split()
        elif key == "relation":
            head, _, body = rest.partition(":")
            name, arity = head.split()
            tuples = [tuple(int(v) for v in t.split()) for t in body.split(";") if t.strip()]
            rels[name] = (int(arity), tuples)
        else:
            raise UsageError(f"unknown structure line {line!r}")
    if n is None:
        raise UsageError("structure file needs an 'n' line")
    extra = {}
    for name, (arity, tuples) in rels.items():
        for t in tuples:
            if len(t) != arity:
                raise UsageError(f"tuple {t} of {name} does not have arity {arity}")
        extra[name] = RelationTable.from_tuples(arity, n, tuples)
    try:
        return FiniteStructure.with_builtins(n, builtins, config, extra)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def parse_n_list(text: str) -> list[int]:
    """``0-64,128`` style lists."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 0:
        raise UsageError(f"bad list of sizes {text!r}")
    return out


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args) -> tuple[OrdBConfig | None, int | None]:
    if not getattr(args, "config", None):
        return None, None
    return parse_config(_read(args.config))


# --- rendering -------------------------------------------------------------------

def show_triangle(n: int, annotate: str = "values", word: str | None = None, e: str = "e") -> str:
    """The triangle over ``[0..n]``, top row first, with row and column indices framed."""
    if n > MAX_TRIANGLE:
        raise UsageError(f"n = {n} is too large to draw (limit {MAX_TRIANGLE})")
    letters = None
    if annotate == "word":
        if not word:
            raise UsageError("annotate=word needs a word")
        m = len(word) - 1
        n = tri(m) + m
        letters = [e] * (n + 1)
        letters[tri(m):] = list(word)
    last = coords(n)
    width = max(len(str(n)), len(f"[{last.c}]")) + 1
    cells: dict[tuple[int, int], str] = {}
    for x in range(n + 1):
        p = coords(x)
        if annotate == "values":
            s = str(x)
        elif annotate in ("C", "Q"):
            member = in_C(x) if annotate == "C" else in_Q(x)
            s = f"{x}*" if member else str(x)
        elif annotate == "word":
            s = letters[x]
        else:
            raise UsageError(f"unknown annotation {annotate!r}")
        cells[(p.c, p.r)] = s
    width = max(width, max(len(s) for s in cells.values()) + 1)
    top = max(r for _, r in cells)
    lines = []
    for r in range(top, -1, -1):
        row = [cells.get((c, r), "").rjust(width) for c in range(last.c + 1)]
        lines.append(f"[{r}]".rjust(width + 2) + " |" + "".join(row).rstrip())
    lines.append(" " * (width + 2) + " +" + "-" * (width * (last.c + 1)))
    lines.append(" " * (width + 4) + "".join(f"[{c}]".rjust(width) for c in range(last.c + 1)))
    return "\n".join(lines) + "\n"


def _table_text(table: RelationTable, fmt: str, header: Sequence[str]) -> str:
    rows = sorted(table)
    if fmt == "json":
        if table.arity == 0:
            return json.dumps(bool(table)) + "\n"
        return json.dumps([list(map(int, r)) for r in rows]) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if table.arity == 0:
        return ("true" if table else "false") + "\n"
    return "".join(" ".join(map(str, r)) + "\n" for r in rows)


# --- commands --------------------------------------------------------------------

def cmd_show_triangle(args) -> int:
    _emit(show_triangle(args.n if args.n is not None else 27, args.annotate, args.word, args.e), args.out)
    return 0


def cmd_table(args) -> int:
    if args.builtin not in ARITY:
        raise UsageError(f"unknown built-in {args.builtin!r}; choose from {sorted(ARITY)}")
    if args.n is None:
        raise UsageError("--n is required")
    config, _ = _config(args)
    try:
        table = builtin_table(args.builtin, args.n, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    header = [f"x{i}" for i in range(ARITY[args.builtin])]
    _emit(_table_text(table, args.format, header), args.out)
    return 0


def cmd_eval(args) -> int:
    config, _ = _config(args)
    catalog = default_catalog(config)
    if args.structure:
        structure = parse_structure(_read(args.structure), config)
    else:
        if args.n is None:
            raise UsageError("give --structure or --n")
        names = args.builtins.split(",") if args.builtins else ["lt", "ordc", "C", "Q"]
        if args.formula in catalog:
            names = sorted(set(names) | catalog[args.formula].builtins)
        try:
            structure = FiniteStructure.with_builtins(args.n, names, config)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    if args.formula in catalog:
        entry = catalog[args.formula]
        formula = Atom(entry.name, entry.params)
    else:
        try:
            formula = parse(args.formula)
        except FormulaSyntaxError as exc:
            raise UsageError(f"syntax error at line {exc.line}, column {exc.column}: {exc}") from None
    valuation = {}
    if args.valuation:
        for item in args.valuation.split(","):
            var, _, val = item.partition("=")
            valuation[var.strip()] = int(val)
    defs = catalog.defs
    try:
        if set(free_vars(formula)) <= set(valuation):
            value = NaiveEvaluator(structure, defs).holds(formula, valuation)
            _emit(("true" if value else "false") + "\n", args.out)
        else:
            vars_ = sorted(free_vars(formula) - set(valuation))
            if valuation:
                raise UsageError(f"variables {vars_} have no value")
            table = define(structure, formula, vars_, defs)
            _emit(_table_text(table, args.format, vars_), args.out)
    except EvaluationError as exc:
        raise UsageError(str(exc)) from None
    return 0


def cmd_verify(args) -> int:
    config, _ = _config(args)
    catalog = default_catalog(config)
    if args.entry == "all":
        names = [n for n in catalog.names() if config is not None or not catalog[n].needs_config]
    else:
        names = args.entry.split(",")
        for name in names:
            if name not in catalog:
                raise UsageError(f"no catalog entry named {name!r}")
    ns = parse_n_list(args.n or "0-64,128")
    reports = verify_many(names, ns, config, catalog)
    timing = not args.no_timing
    text = reports_to_json(reports, timing) if args.format == "json" else reports_to_csv(reports, timing)
    _emit(text, args.out)
    return 0 if all(r.ok for r in reports) else 1


def _rank_csv(rank: np.ndarray, label: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["element", label])
    for x, r in enumerate(rank):
        w.writerow([x, int(r)])
    return buf.getvalue()


def _need_config(args) -> tuple[OrdBConfig, int]:
    config, n = _config(args)
    if config is None:
        raise UsageError("--config is required")
    n = args.n if args.n is not None else n
    if n is None:
        raise UsageError("give --n or an 'n' line in the config")
    return config, n


def cmd_build_ordb(args) -> int:
    config, n = _need_config(args)
    _emit(_rank_csv(build_ordb(config, n).rank, "rank"), args.out)
    return 0


def _read_ranks(path: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(_read(path))))
    if not rows or rows[0][:2] != ["element", "rank"]:
        raise UsageError("order file needs the header 'element,rank'")
    try:
        pairs = sorted((int(a), int(b)) for a, b in rows[1:])
    except ValueError:
        raise UsageError("order file rows are 'element,rank' integer pairs") from None
    if [a for a, _ in pairs] != list(range(len(pairs))):
        raise UsageError("order file must list every element 0..n once")
    return np.array([b for _, b in pairs], dtype=np.int64)


def decode_report(result, config: OrdBConfig | None) -> dict:
    n = result.n
    cov = result.coverage
    covered = np.flatnonzero(cov)
    uncovered = np.flatnonzero(~cov)
    report = {
        "n": n,
        "ell": result.ell,
        "backbone": int(result.backbone.sum()),
        "intervals": len(result.intervals),
        "covered": int(cov.sum()),
        "uncovered_prefix_max": int(covered.min() - 1) if len(covered) else n,
        "uncovered_tail_min": int(covered.max() + 1) if len(covered) else None,
        "uncovered_inside": [int(x) for x in uncovered
                             if len(covered) and covered.min() < x < covered.max()],
    }
    if config is not None:
        disc = []
        for x in covered:
            for i, pred in enumerate(config.predicates):
                if bool(result.bits[i, x]) != bool(pred(int(x))):
                    disc.append({"kind": config.names[i], "element": int(x)})
        by_decoder = sorted(covered, key=result.ordc_key)
        truth = sorted(covered, key=lambda x: (coords(int(x)).r, coords(int(x)).c))
        for pos, (a, b) in enumerate(zip(by_decoder, truth)):
            if a != b:
                disc.append({"kind": "ordc", "position": pos, "decoded": int(a), "expected": int(b)})
        report["discrepancies"] = disc
        report["expected_coverage_from"] = tri(config.ell + 1) + 1
        report["expected_coverage_to"] = n - config.w
    return report


def cmd_decode_ordb(args) -> int:
    config, n_cfg = _config(args)
    if args.order:
        rank = _read_ranks(args.order)
        n = len(rank) - 1
    else:
        if config is None:
            raise UsageError("give --order, or --config to build the order first")
        n = args.n if args.n is not None else n_cfg
        if n is None:
            raise UsageError("give --n or an 'n' line in the config")
        rank = build_ordb(config, n).rank
    k = args.k if args.k is not None else (config.k if config else None)
    w = args.w if args.w is not None else (config.w if config else None)
    if k is None or w is None:
        raise UsageError("--k and --w are required without a config")
    try:
        result = decode_ordb(n, OrderTable(np.arange(n + 1)), OrderTable(rank), k, w)
    except DecodeError as exc:
        _emit(json.dumps({"error": str(exc)}) + "\n", args.out)
        return 1
    report = decode_report(result, config)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return 1 if report.get("discrepancies") else 0


def cmd_pi(args) -> int:
    config, n = _need_config(args)
    order = build_ordb(config, n)
    _emit(_rank_csv(order.rank, "pi"), args.out)
    if args.verify:
        s = FiniteStructure.with_builtins(n, ["lt"], extra={"pi": order.graph()})
        got = define(s, build_permutation_order(), ("x", "y"))
        want = order.rank[:, None] < order.rank[None, :]
        bad = int((got.data != want).sum())
        sys.stderr.write(f"permutation order: {bad} mismatches over {(n + 1) ** 2} pairs\n")
        return 1 if bad else 0
    return 0


def cmd_min_ell(args) -> int:
    ks = parse_n_list(args.k)
    if 0 in ks:
        raise UsageError("k starts at 1")
    rule = "three_ell" if args.w == "3l" else int(args.w)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "ell", "w"])
    for k in ks:
        ell = min_ell(k, rule)
        w.writerow([k, ell, 3 * ell if rule == "three_ell" else rule])
    _emit(buf.getvalue(), args.out)
    return 0


def _game_structure(desc: str) -> FiniteStructure:
    kind, _, val = desc.partition(":")
    if kind == "order":
        return ef.linear_order(int(val))
    if kind == "word":
        return ef.word_structure(val)
    raise UsageError(f"structure {desc!r} is neither order:N nor word:W")


def cmd_ef(args) -> int:
    if args.ef_cmd == "solve":
        A, B = _game_structure(args.left), _game_structure(args.right)
        if args.left.startswith("word:") and args.right.startswith("word:"):
            alpha = set(args.left[5:]) | set(args.right[5:])
            A = ef.word_structure(args.left[5:], alpha)
            B = ef.word_structure(args.right[5:], alpha)
        try:
            wins = ef.duplicator_wins(A, B, args.k)
        except (ValueError, ef.BudgetExceeded) as exc:
            raise UsageError(str(exc)) from None
        out = {"duplicator_wins": wins, "rounds": args.k}
        if not wins and args.strategy:
            out["spoiler_strategy"] = ef.spoiler_strategy(A, B, args.k)
        _emit(json.dumps(out, sort_keys=True) + "\n", args.out)
        return 0
    if args.ef_cmd == "pad":
        pu, pv = ef.pad_neutral(args.u, args.v, args.e, args.k)
        _emit(json.dumps({"u": pu, "v": pv}) + "\n", args.out)
        return 0
    if args.ef_cmd == "lift":
        a = [int(t) for t in args.a.split(",")]
        b = [int(t) for t in args.b.split(",")]
        try:
            big, ok = ef.lift_play(ef.Play(a, b), args.u, args.v, args.e)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _emit(json.dumps({"big_play": json.loads(big.to_json()), "conditions_hold": ok},
                         sort_keys=True) + "\n", args.out)
        return 0 if ok else 1
    if args.ef_cmd == "sweep":
        res = ef.sweep_lifting(args.max_len, args.k)
        _emit(json.dumps({"plays_checked": res.plays_checked, "failures": res.failures,
                          "examples": [list(map(str, e)) for e in res.examples]}) + "\n", args.out)
        return 1 if res.failures else 0
    if args.ef_cmd == "reflexive":
        rng = random.Random(args.seed)
        failures = 0
        for _ in range(args.count):
            size = rng.randint(1, 4)
            arity = rng.randint(1, 2)
            tuples = [t for t in np.ndindex(*(size,) * arity) if rng.random() < 0.4]
            S = FiniteStructure(size - 1, {"R": RelationTable.from_tuples(arity, size - 1, tuples)})
            k = rng.randint(1, 3)
            failures += not ef.duplicator_wins(S, S, k)
        _emit(json.dumps({"structures": args.count, "failures": failures, "seed": args.seed}) + "\n",
              args.out)
        return 1 if failures else 0
    raise UsageError("missing ef subcommand")


# --- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fobit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("text", "csv", "json"), default="text"):
        sp.add_argument("--n", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=fmt, default=default)
        return sp

    s = common(sub.add_parser("show-triangle", help="draw the triangular matrix"))
    s.add_argument("--annotate", choices=("values", "C", "Q", "word"), default="values")
    s.add_argument("--word")
    s.add_argument("--e", default="e")
    s.set_defaults(func=cmd_show_triangle)

    s = common(sub.add_parser("table", help="print a built-in predicate"))
    s.add_argument("builtin")
    s.add_argument("--config")
    s.set_defaults(func=cmd_table)

    s = common(sub.add_parser("eval", help="evaluate a formula or catalog entry"))
    s.add_argument("formula")
    s.add_argument("--structure")
    s.add_argument("--builtins", help="comma-separated; default lt,ordc,C,Q")
    s.add_argument("--valuation")
    s.add_argument("--config")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("verify", help="compare catalog entries with their oracles")
    s.add_argument("--entry", default="all")
    s.add_argument("--n")
    s.add_argument("--config")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = common(sub.add_parser("build-ordb", help="write the <b ranks as CSV"), ("csv",), "csv")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_build_ordb)

    s = common(sub.add_parser("decode-ordb", help="decode a <b order"), ("json",), "json")
    s.add_argument("--order")
    s.add_argument("--config")
    s.add_argument("--k", type=int)
    s.add_argument("--w", type=int)
    s.set_defaults(func=cmd_decode_ordb)

    s = common(sub.add_parser("pi", help="write the index permutation as CSV"), ("csv",), "csv")
    s.add_argument("--config", required=True)
    s.add_argument("--verify", action="store_true")
    s.set_defaults(func=cmd_pi)

    s = sub.add_parser("min-ell", help="smallest usable backbone spacing")
    s.add_argument("--k", default="1-3")
    s.add_argument("--w", default="3l")
    s.add_argument("--out")
    s.set_defaults(func=cmd_min_ell)

    s = sub.add_parser("ef", help="Ehrenfeucht-Fraisse experiments")
    s.set_defaults(func=cmd_ef)
    efs = s.add_subparsers(dest="ef_cmd", required=True)
    t = efs.add_parser("solve")
    t.add_argument("--left", required=True)
    t.add_argument("--right", required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--strategy", action="store_true")
    t.add_argument("--out")
    t = efs.add_parser("pad")
    for name in ("u", "v"):
        t.add_argument(f"--{name}", required=True)
    t.add_argument("--e", default="e")
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--out")
    t = efs.add_parser("lift")
    for name in ("u", "v", "a", "b"):
        t.add_argument(f"--{name}", required=True)
    t.add_argument("--e", default="e")
    t.add_argument("--out")
    t = efs.add_parser("sweep")
    t.add_argument("--max-len", type=int, default=4)
    t.add_argument("--k", type=int, default=2)
    t.add_argument("--out")
    t = efs.add_parser("reflexive")
    t.add_argument("--count", type=int, default=50)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"fobit: {msg}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
