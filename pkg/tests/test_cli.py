import csv
import json

import pytest

from fobit.cli import main, parse_config, parse_n_list, show_triangle, UsageError
from fobit.predicates import coords, tri

TOY = "k 1\nell 5\nw 4\npredicates squares\nn 300\n"


@pytest.fixture
def toy(tmp_path):
    p = tmp_path / "toy.cfg"
    p.write_text(TOY)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _positions(line):
    """token -> column where it ends"""
    out, i = {}, 0
    for tok in line.split():
        i = line.index(tok, i) + len(tok)
        out.setdefault(tok, []).append(i)
    return out


def test_show_triangle_values():
    text = show_triangle(27)
    lines = text.splitlines()
    label_end = {int(t[1:-1]): e[0] for t, e in _positions(lines[-1]).items()}
    seen = []
    for line in lines[:-2]:
        _, _, rest = line.partition("|")
        offset = len(line) - len(rest)
        for tok, ends in _positions(rest).items():
            x = int(tok)
            seen.append(x)
            assert ends == [label_end[coords(x).c] - offset]
    assert sorted(seen) == list(range(28))
    # the row labelled [r] lists exactly the elements of row r in column order
    for line in text.splitlines()[:-2]:
        label, _, rest = line.partition("|")
        r = int(label.strip()[1:-1])
        assert [int(t) for t in rest.split()] == [x for x in range(28) if coords(x).r == r]
    assert text.splitlines()[-1].split() == [f"[{c}]" for c in range(7)]


def test_show_triangle_C_column_three():
    text = show_triangle(9, "C")
    marked = {int(t[:-1]) for t in text.split() if t.endswith("*")}
    assert {x for x in marked if tri(3) <= x < tri(4)} == {8}


def test_show_triangle_trivial_and_oversize():
    text = show_triangle(0)
    assert [t for t in text.split() if t.isdigit()] == ["0"]
    assert len(text.splitlines()) == 3
    with pytest.raises(UsageError):
        show_triangle(10_001)


def test_show_triangle_word():
    text = show_triangle(0, "word", "abba", "e")
    bottom = [l for l in text.splitlines() if l.strip().startswith("[0]")][0]
    assert bottom.split("|")[1].split() == ["e", "e", "e", "a"]


def test_show_triangle_cli(capsys):
    code, out, _ = run(capsys, "show-triangle", "--n", "5", "--annotate", "Q")
    assert code == 0 and "[2]" in out
    assert run(capsys, "show-triangle", "--n", "20000")[0] == 2


def test_table(capsys):
    code, out, _ = run(capsys, "table", "lt", "--n", "2", "--format", "csv")
    assert code == 0 and out == "x0,x1\n0,1\n0,2\n1,2\n"
    code, out, _ = run(capsys, "table", "squares", "--n", "10", "--format", "json")
    assert json.loads(out) == [[0], [1], [4], [9]]
    assert run(capsys, "table", "nope", "--n", "2")[0] == 2
    assert run(capsys, "table", "ordb", "--n", "2")[0] == 2


def test_eval(capsys, tmp_path):
    s = tmp_path / "s.txt"
    s.write_text("# a path\nn 4\nbuiltins lt\nrelation E 2: 0 1; 1 2\n")
    code, out, _ = run(capsys, "eval", "exists y. E(x, y)", "--structure", str(s))
    assert code == 0 and out.split() == ["0", "1"]
    code, out, _ = run(capsys, "eval", "E(x, y) & x < y", "--structure", str(s), "--valuation", "x=0,y=1")
    assert out == "true\n"
    code, out, _ = run(capsys, "eval", "q", "--n", "27", "--valuation", "x=13,y=10")
    assert out == "true\n"
    code, out, _ = run(capsys, "eval", "succ_ordc", "--n", "27", "--format", "json")
    assert [21, 2] in json.loads(out)
    assert run(capsys, "eval", "x <", "--n", "3")[0] == 2
    assert run(capsys, "eval", "R(x)", "--n", "3")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("builtins lt\n")
    assert run(capsys, "eval", "x < y", "--structure", str(bad))[0] == 2


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--entry", "bit", "--n", "128", "--no-timing")
    assert code == 0 and out.splitlines()[1] == "bit,128,16641,0,"
    assert run(capsys, "verify", "--entry", "nope")[0] == 2
    report = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--entry", "samecol,q", "--n", "0-3", "--format", "json",
                     "--out", str(report))
    rows = json.loads(report.read_text())
    assert code == 0 and len(rows) == 8
    assert set(rows[0]) == {"entry", "n", "checked", "mismatches", "witness", "millis"}


def test_verify_is_deterministic_without_timing(capsys):
    first = run(capsys, "verify", "--entry", "samerow", "--n", "0-10", "--no-timing")[1]
    second = run(capsys, "verify", "--entry", "samerow", "--n", "0-10", "--no-timing")[1]
    assert first == second


def test_verify_all_with_config(capsys, toy):
    code, out, _ = run(capsys, "verify", "--config", toy, "--n", "60", "--no-timing")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == 0
    assert {"bit", "lt_from_bit", "ordb_from_pi", "U_squares", "ordc_b"} <= {r["entry"] for r in rows}


def test_build_and_decode(capsys, toy, tmp_path):
    order = tmp_path / "order.csv"
    assert run(capsys, "build-ordb", "--config", toy, "--out", str(order))[0] == 0
    lines = order.read_text().splitlines()
    assert lines[0] == "element,rank" and len(lines) == 302
    code, out, _ = run(capsys, "decode-ordb", "--order", str(order), "--config", toy)
    report = json.loads(out)
    assert code == 0 and report["discrepancies"] == [] and report["ell"] == 5
    code, out, _ = run(capsys, "decode-ordb", "--order", str(order), "--k", "1", "--w", "4")
    assert code == 0 and "discrepancies" not in json.loads(out)
    # swap two interval members: the decoder must refuse
    rows = [l.split(",") for l in lines[1:]]
    rows[16][1], rows[22][1] = rows[22][1], rows[16][1]
    order.write_text("element,rank\n" + "\n".join(",".join(r) for r in rows) + "\n")
    code, out, _ = run(capsys, "decode-ordb", "--order", str(order), "--config", toy)
    assert code == 1 and "permutation pattern" in json.loads(out)["error"]


def test_decode_usage_errors(capsys, tmp_path):
    assert run(capsys, "decode-ordb")[0] == 2
    bad = tmp_path / "o.csv"
    bad.write_text("x,y\n0,0\n")
    assert run(capsys, "decode-ordb", "--order", str(bad), "--k", "1", "--w", "4")[0] == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("k 2\npredicates C\n")
    assert run(capsys, "build-ordb", "--config", str(cfg), "--n", "5")[0] == 2
    cfg.write_text("predicates squares\nell 5\nw 5\n")
    assert run(capsys, "build-ordb", "--config", str(cfg), "--n", "5")[0] == 2


def test_pi(capsys, toy, tmp_path):
    out = tmp_path / "pi.csv"
    code, _, err = run(capsys, "pi", "--config", toy, "--out", str(out), "--verify")
    assert code == 0 and "0 mismatches" in err
    assert out.read_text().splitlines()[:2] == ["element,pi", "0,0"]


def test_min_ell(capsys):
    code, out, _ = run(capsys, "min-ell", "--k", "1-2")
    assert out == "k,ell,w\n1,23,69\n2,176,528\n"
    code, out, _ = run(capsys, "min-ell", "--k", "1", "--w", "4")
    assert out == "k,ell,w\n1,5,4\n"
    assert run(capsys, "min-ell", "--k", "0")[0] == 2


def test_ef(capsys):
    code, out, _ = run(capsys, "ef", "solve", "--left", "order:2", "--right", "order:3", "--k", "2",
                       "--strategy")
    res = json.loads(out)
    assert code == 0 and res["duplicator_wins"] is False and "spoiler_strategy" in res
    code, out, _ = run(capsys, "ef", "solve", "--left", "word:0e1", "--right", "word:0ee1", "--k", "1")
    assert json.loads(out)["duplicator_wins"] is True
    code, out, _ = run(capsys, "ef", "pad", "--u", "abc", "--v", "abcde", "--e", "e", "--k", "1")
    assert {len(w) for w in json.loads(out).values()} == {12}
    code, out, _ = run(capsys, "ef", "lift", "--u", "01e01", "--v", "01e01", "--a", "4,3", "--b", "4,3")
    assert code == 0 and json.loads(out)["big_play"]["a"] == [13]
    code, _, _ = run(capsys, "ef", "lift", "--u", "01e01", "--v", "01e01", "--a", "4,3", "--b", "4,1")
    assert code == 1
    code, out, _ = run(capsys, "ef", "sweep", "--max-len", "3", "--k", "1")
    assert code == 0 and json.loads(out)["failures"] == 0
    code, out, _ = run(capsys, "ef", "reflexive", "--count", "10", "--seed", "4")
    assert code == 0 and json.loads(out)["failures"] == 0
    assert run(capsys, "ef", "solve", "--left", "tree:3", "--right", "order:3", "--k", "1")[0] == 2


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == 2
    assert run(capsys, "verify", "--entry", "bit", "--n", "x")[0] == 2


def test_parsers():
    assert parse_n_list("0-3,7") == [0, 1, 2, 3, 7]
    cfg, n = parse_config(TOY)
    assert (cfg.k, cfg.ell, cfg.w, n) == (1, 5, 4, 300)
    cfg, n = parse_config("predicates bits:0101 C\n")
    assert cfg.k == 2 and n is None and cfg.w == 3 * cfg.ell
    with pytest.raises(UsageError):
        parse_config("predicates C\ncolour red\n")
