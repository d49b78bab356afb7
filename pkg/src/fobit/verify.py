"""Exhaustive comparison of catalog formulas with their semantic oracles."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .catalog import FormulaCatalog, default_catalog
from .logic.compile import Compiler
from .logic.structure import FiniteStructure
from .orderb import OrdBConfig

__all__ = ["OracleUnavailable", "VerifyReport", "reports_to_csv", "reports_to_json",
           "verify_against_oracle", "verify_many"]

FIELDS = ("entry", "n", "checked", "mismatches", "witness", "millis")


class OracleUnavailable(LookupError):
    pass


@dataclass
class VerifyReport:
    entry: str
    n: int
    checked: int
    mismatches: int
    witness: tuple[int, ...] | None
    millis: float

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["witness"] = list(self.witness) if self.witness is not None else None
        return d




def _compare(catalog, name, n, config, compiler) -> VerifyReport:
    entry = catalog[name]
    if entry.oracle is None:
        raise OracleUnavailable(f"entry {name!r} has no oracle")
    if entry.needs_config and config is None:
        raise OracleUnavailable(f"entry {name!r} needs an order-b configuration")
    start = time.perf_counter()
    got = compiler.relation_array(name)
    want = np.asarray(entry.oracle(n, config), dtype=bool)
    mask = np.ones_like(want) if entry.mask is None else np.asarray(entry.mask(n, config), dtype=bool)
    bad = (got != want) & mask
    count = int(bad.sum())
    witness = None
    if count:
        witness = tuple(int(i) for i in np.argwhere(bad)[0])
    millis = (time.perf_counter() - start) * 1000
    return VerifyReport(name, n, int(mask.sum()), count, witness, round(millis, 3))


def verify_against_oracle(name: str, n: int, config: OrdBConfig | None = None,
                          catalog: FormulaCatalog | None = None) -> VerifyReport:
    """Compare ``define(entry)`` with the entry's oracle on all tuples over ``[0..n]``."""
    catalog = catalog or default_catalog(config)
    if name not in catalog:
        raise KeyError(f"no catalog entry named {name!r}")
    return verify_many([name], [n], config, catalog)[0]


def verify_many(names: Iterable[str], ns: Iterable[int], config: OrdBConfig | None = None,
                catalog: FormulaCatalog | None = None) -> list[VerifyReport]:
    """One report per ``(name, n)``.

    Entries declaring the same built-ins share one compiler per ``n``.  They
    must not share more: a built-in shadows a definition of the same name, so
    an entry over ``bit`` would otherwise hide the ``bit`` formula.
    """
    catalog = catalog or default_catalog(config)
    names = list(names)
    groups: dict[frozenset, list[str]] = {}
    for name in names:
        if catalog[name].needs_config and config is None:
            raise OracleUnavailable(f"entry {name!r} needs an order-b configuration")
        groups.setdefault(catalog[name].builtins, []).append(name)
    out = []
    for n in ns:
        compilers = {b: Compiler(FiniteStructure.with_builtins(n, sorted(b), config), catalog.defs)
                     for b in groups}
        for name in names:
            out.append(_compare(catalog, name, n, config, compilers[catalog[name].builtins]))
    return out


def reports_to_csv(reports: Iterable[VerifyReport], timing: bool = True) -> str:
    buf = io.StringIO()
    fields = FIELDS if timing else FIELDS[:-1]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in reports:
        d = r.as_dict()
        w = d["witness"]
        d["witness"] = " ".join(map(str, w)) if w is not None else ""
        writer.writerow([d[f] for f in fields])
    return buf.getvalue()


def reports_to_json(reports: Iterable[VerifyReport], timing: bool = True) -> str:
    rows = []
    for r in reports:
        d = r.as_dict()
        if not timing:
            d.pop("millis")
        rows.append(d)
    return json.dumps(rows, indent=2) + "\n"
