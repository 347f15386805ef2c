"""Library of canonical penalty cells and Boolean matching against it.

Cells are stored under the input-permutation/negation canonical form of their
table.  Output negation is not applied: complementing a constraint does not
map a penalty to a penalty.  For relation tables y <-> f(x) the output
variable y is an ordinary input of the table, so NPN classes of f still
collapse onto one cell.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .boolfn import (
    NPNTransform, TruthTable, clause, exactly, at_most, np_canonical, parse_tt, relation,
)
from .errors import CapacityError, DomainError, Infeasible, NotFound
from .ising_core import (
    IsingModel, PenaltyFunction, as_fraction, edge_key, fraction_str, reverse_qubit, verify_penalty,
)
from .penalty_synth import FOOTPRINT_SIZES, default_h, footprint_graph, synthesize

log = logging.getLogger(__name__)

DEFAULT_LIBRARY = Path(__file__).with_name("data") / "default_library.json"
FOOTPRINT_ORDER = ("qubit", "half-tile", "tile", "2-tile")


@dataclass(frozen=True, eq=False)
class GateCell:
    canonical_tt: TruthTable
    footprint: str
    penalty: PenaltyFunction  # local footprint coordinates, inputs in table order
    gap: Fraction
    exact: bool

    @property
    def qubit_cost(self) -> int:
        return self.penalty.n + self.penalty.h

    @property
    def arity(self) -> int:
        return self.canonical_tt.arity

    def to_dict(self) -> dict:
        m = self.penalty.model
        return {
            "tt": self.canonical_tt.literal(),
            "footprint": self.footprint,
            "placement": list(self.penalty.inputs),
            "ancillas": list(self.penalty.ancillas),
            "offset": fraction_str(m.offset),
            "linear": {str(q): fraction_str(v) for q, v in sorted(m.biases.items())},
            "quadratic": [[i, j, fraction_str(v)] for (i, j), v in sorted(m.couplings.items())],
            "gap": fraction_str(self.gap),
            "exact": self.exact,
        }

    @classmethod
    def from_dict(cls, d) -> "GateCell":
        graph = footprint_graph(d["footprint"])
        model = IsingModel(
            graph,
            as_fraction(d["offset"]),
            {int(q): as_fraction(v) for q, v in d["linear"].items()},
            {edge_key(int(i), int(j)): as_fraction(v) for i, j, v in d["quadratic"]},
        )
        gap = as_fraction(d["gap"])
        pf = PenaltyFunction(model, d["placement"], d.get("ancillas", ()), gap, bool(d["exact"]))
        return cls(parse_tt(d["tt"]), d["footprint"], pf, gap, bool(d["exact"]))

    def __eq__(self, other):
        if not isinstance(other, GateCell):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass
class GateLibrary:
    cells: dict = field(default_factory=dict)  # canonical literal -> list[GateCell]
    metadata: dict = field(default_factory=dict)

    def add(self, cell: GateCell):
        canon, _ = np_canonical(cell.canonical_tt)
        if canon != cell.canonical_tt:
            raise DomainError(f"{cell.canonical_tt.literal()} is not in canonical form")
        bucket = self.cells.setdefault(cell.canonical_tt.literal(), [])
        bucket[:] = [c for c in bucket if not (c.footprint == cell.footprint and c.exact == cell.exact)]
        bucket.append(cell)
        bucket.sort(key=lambda c: (FOOTPRINT_ORDER.index(c.footprint), c.exact))

    def __len__(self):
        return sum(len(v) for v in self.cells.values())

    def __iter__(self):
        for key in sorted(self.cells):
            yield from self.cells[key]

    @property
    def max_arity(self) -> int:
        return max((c.arity for c in self), default=0)

    def merge(self, other: "GateLibrary") -> "GateLibrary":
        out = GateLibrary({}, {**self.metadata, **other.metadata})
        for c in list(self) + list(other):
            out.add(c)
        return out

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "cells": [c.to_dict() for c in self]}

    @classmethod
    def from_dict(cls, d) -> "GateLibrary":
        if isinstance(d, list):
            d = {"cells": d}
        lib = cls({}, dict(d.get("metadata", {})))
        for cd in d["cells"]:
            lib.add(GateCell.from_dict(cd))
        return lib

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "GateLibrary":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def load_default_library() -> GateLibrary:
    path = os.environ.get("QUBOFORGE_LIB") or DEFAULT_LIBRARY
    return GateLibrary.load(path)


# ---------------------------------------------------------------------------
# matching


def _cell_order(cell: GateCell):
    # least qubits first, then the gap closest to the chain gap of 2, then footprint
    return (cell.qubit_cost, abs(cell.gap - 2), FOOTPRINT_ORDER.index(cell.footprint))


def match(lib: GateLibrary, tt: TruthTable, footprint=None, require_exact: bool = False):
    """(cell, transform) with transform(tt) == cell.canonical_tt; NotFound on a miss."""
    if tt.arity > 6:
        raise NotFound(f"arity {tt.arity} exceeds the matching range")
    canon, transform = np_canonical(tt)
    cells = lib.cells.get(canon.literal(), [])
    if footprint is not None:
        allowed = {footprint} if isinstance(footprint, str) else set(footprint)
        cells = [c for c in cells if c.footprint in allowed]
    if require_exact:
        cells = [c for c in cells if c.exact]
    if not cells:
        raise NotFound(f"no library cell for {tt.literal()} (class {canon.literal()})")
    return min(cells, key=_cell_order), transform


def has_match(lib: GateLibrary, tt: TruthTable, require_exact: bool = False) -> bool:
    try:
        match(lib, tt, require_exact=require_exact)
    except NotFound:
        return False
    return True


def instantiate(cell: GateCell, transform: NPNTransform) -> PenaltyFunction:
    """Penalty for the table T^-1(canonical) in the cell's local coordinates.

    Cell input i carries variable perm[i] of the requested table, spin-reversed
    when bit i of the transform's input negations is set.
    """
    pf = cell.penalty
    if transform.output_negation:
        raise DomainError("output negation cannot be realised on a penalty")
    if transform.arity != pf.n:
        raise DomainError("transform arity differs from the cell")
    model = pf.model
    inputs = [None] * pf.n
    for i, p in enumerate(transform.permutation):
        q = pf.inputs[i]
        inputs[p] = q
        if (transform.input_negations >> i) & 1:
            model = reverse_qubit(model, q)
    return PenaltyFunction(model, inputs, pf.ancillas, pf.gap, pf.exact)


def lookup(lib: GateLibrary, tt: TruthTable, footprint=None, require_exact: bool = False):
    """Convenience: (cell, instantiated local penalty)."""
    cell, transform = match(lib, tt, footprint, require_exact)
    return cell, instantiate(cell, transform)


# ---------------------------------------------------------------------------
# building


@dataclass(frozen=True)
class FunctionRequest:
    tt: TruthTable
    footprints: tuple = ("tile",)
    exact: bool = False
    max_h: int | None = None
    name: str = ""


def _full_support_functions(k: int):
    """One representative per NPN class of k-input functions depending on every input."""
    seen = set()
    out = []
    for bits in range(1 << (1 << k)):
        f = TruthTable(k, bits)
        if not all(_depends_on(f, i) for i in range(k)):
            continue
        rel, _ = np_canonical(relation(f))
        if rel.literal() in seen:
            continue
        seen.add(rel.literal())
        out.append(f)
    return out


def _depends_on(f: TruthTable, i: int) -> bool:
    return any(f.value(x) != f.value(x ^ (1 << i)) for x in range(1 << f.arity))


def preset(name: str) -> list[FunctionRequest]:
    """Named function sets used by `genlib`."""
    if name == "relations2":
        return [FunctionRequest(relation(f), ("half-tile", "tile"), name=f"rel2:{f.literal()}")
                for f in _full_support_functions(2)]
    if name == "relations3":
        return [FunctionRequest(relation(f), ("tile",), name=f"rel3:{f.literal()}")
                for f in _full_support_functions(3)]
    if name == "clauses":
        return [
            FunctionRequest(clause([True]), ("qubit",), exact=True, name="or1"),
            FunctionRequest(clause([True] * 2), ("half-tile",), name="or2"),
            FunctionRequest(clause([True] * 3), ("tile",), name="or3"),
            FunctionRequest(clause([True] * 4), ("tile",), name="or4"),
            FunctionRequest(clause([True] * 5), ("tile",), name="or5"),
        ]
    if name == "cardinality":
        return [
            FunctionRequest(exactly(2, 4), ("tile",), name="2in4"),
            FunctionRequest(exactly(2, 4), ("tile",), exact=True, name="2in4-exact"),
            FunctionRequest(exactly(1, 4), ("tile",), exact=True, name="1in4-exact"),
            FunctionRequest(at_most(1, 5), ("tile",), name="atmost1of5"),
            FunctionRequest(exactly(1, 5), ("tile",), name="1in5"),
        ]
    if name == "default":
        return preset("relations2") + preset("relations3") + preset("clauses") + preset("cardinality")
    raise DomainError(f"unknown preset {name!r}")


def load_function_set(spec: str) -> list[FunctionRequest]:
    """Preset name, JSON list of {tt, footprints, exact, max_h}, or a text file of tt literals."""
    if not os.path.exists(spec):
        return preset(spec)
    text = Path(spec).read_text()
    try:
        items = json.loads(text)
    except json.JSONDecodeError:
        items = [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    out = []
    for it in items:
        if isinstance(it, str):
            out.append(FunctionRequest(parse_tt(it)))
        else:
            out.append(FunctionRequest(parse_tt(it["tt"]), tuple(it.get("footprints", ["tile"])),
                                       bool(it.get("exact", False)), it.get("max_h"), it.get("name", "")))
    return out


def _synthesize_cell(canon: TruthTable, footprint: str, exact: bool, max_h, budget):
    """Smallest h whose optimum reaches gap 2; otherwise the best gap found."""
    n = canon.arity
    top = default_h(footprint, n)
    if max_h is not None:
        top = min(top, max_h)
    best = None
    for h in range(0, top + 1):
        try:
            res = synthesize(canon, footprint, h=h, require_exact=exact, time_budget=budget)
        except Infeasible:
            continue
        if best is None or res.gap > best.gap:
            best = res
        if res.gap >= 2:
            break
    if best is None:
        return None
    pf = best.penalty
    report = verify_penalty(pf, canon)
    if not report.passed:
        raise RuntimeError(f"cell for {canon.literal()} failed verification")
    return GateCell(canon, footprint, pf, pf.gap, pf.exact)


def _job(args):
    literal, footprint, exact, max_h, budget = args
    t = time.monotonic()
    try:
        cell = _synthesize_cell(parse_tt(literal), footprint, exact, max_h, budget)
    except CapacityError:
        cell = None
    return args, cell.to_dict() if cell else None, time.monotonic() - t


def build_library(functions, footprints=None, synth_budget: float | None = None, jobs: int = 1) -> GateLibrary:
    """Synthesize one cell per (canonical class, footprint).  Classes that are
    infeasible within the budget are listed in the metadata, not raised."""
    tasks = []
    seen = set()
    for req in functions:
        if not isinstance(req, FunctionRequest):
            req = FunctionRequest(req)
        canon, _ = np_canonical(req.tt)
        for fp in (footprints or req.footprints):
            if fp not in FOOTPRINT_SIZES:
                raise DomainError(f"unknown footprint {fp!r}")
            if canon.arity > FOOTPRINT_SIZES[fp]:
                continue
            key = (canon.literal(), fp, req.exact, req.max_h, synth_budget)
            if key not in seen:
                seen.add(key)
                tasks.append(key)
    lib = GateLibrary({}, {"footprints": sorted({t[1] for t in tasks}), "synth_budget": synth_budget,
                           "skipped": [], "timings": {}})
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    for (literal, fp, exact, _, _), cell, seconds in results:
        tag = f"{literal}@{fp}{'/exact' if exact else ''}"
        lib.metadata["timings"][tag] = round(seconds, 3)
        if cell is None:
            lib.metadata["skipped"].append(tag)
            log.info("no cell for %s", tag)
            continue
        lib.add(GateCell.from_dict(cell))
    return lib


def relation_tables(k: int):
    """Every relation y <-> f(x1..xk) for k-input f (used by tests and the mapper)."""
    return [relation(TruthTable(k, bits)) for bits in range(1 << (1 << k))]


def check_library(lib: GateLibrary) -> list[str]:
    """Re-verify every cell by brute force; returns failure messages."""
    failures = []
    for cell in lib:
        rep = verify_penalty(cell.penalty, cell.canonical_tt)
        if not rep.passed:
            failures.append(f"{cell.canonical_tt.literal()}@{cell.footprint}: {rep.failures}")
        if cell.exact and not rep.exact:
            failures.append(f"{cell.canonical_tt.literal()}@{cell.footprint}: declared exact but is not")
    return failures
