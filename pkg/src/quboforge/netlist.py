"""Mapped netlists: library cells bound to logical variables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .boolfn import TruthTable
from .errors import DomainError
from .gatelib import GateCell
from .ising_core import PenaltyFunction, as_fraction, fraction_str


@dataclass(eq=False)
class NetCell:
    name: str
    tt: TruthTable  # constraint over `variables`, bit i <-> variables[i]
    cell: GateCell
    penalty: PenaltyFunction  # local footprint coordinates; inputs[i] carries variables[i]
    variables: tuple
    weight: Fraction = Fraction(1)  # violation energy scale (MaxSAT)
    soft: bool = False

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.weight = as_fraction(self.weight)
        if len(self.variables) != self.tt.arity or self.penalty.n != self.tt.arity:
            raise DomainError(f"cell {self.name}: variables, table and penalty disagree in arity")
        if len(set(self.variables)) != len(self.variables):
            raise DomainError(f"cell {self.name}: repeated variable")

    @property
    def footprint(self) -> str:
        return self.cell.footprint

    def satisfied(self, assignment: dict) -> bool:
        k = 0
        for i, v in enumerate(self.variables):
            if assignment[v]:
                k |= 1 << i
        return self.tt.value(k)


@dataclass
class Netlist:
    cells: list = field(default_factory=list)
    source_vars: dict = field(default_factory=dict)  # CNF variable -> logical variable
    exact_required: bool = False
    notes: dict = field(default_factory=dict)

    @property
    def nets(self) -> dict:
        out: dict = {}
        for ci, c in enumerate(self.cells):
            for pin, v in enumerate(c.variables):
                out.setdefault(v, []).append((ci, pin))
        return out

    @property
    def variables(self) -> list:
        seen = []
        known = set()
        for c in self.cells:
            for v in c.variables:
                if v not in known:
                    known.add(v)
                    seen.append(v)
        return seen

    def qubit_cost(self) -> int:
        return sum(c.cell.qubit_cost for c in self.cells)

    def satisfied(self, assignment: dict) -> bool:
        return all(c.satisfied(assignment) for c in self.cells)

    def violated_weight(self, assignment: dict) -> Fraction:
        return sum((c.weight for c in self.cells if not c.satisfied(assignment)), Fraction(0))

    def brute_force_models(self, limit: int = 20):
        """Every assignment of the netlist variables satisfying all cells (small netlists)."""
        vs = self.variables
        if len(vs) > limit:
            raise DomainError(f"{len(vs)} variables exceed the enumeration limit {limit}")
        for bits in product((False, True), repeat=len(vs)):
            a = dict(zip(vs, bits))
            if self.satisfied(a):
                yield a

    def to_dict(self) -> dict:
        return {
            "cells": [
                {"name": c.name, "tt": c.tt.literal(), "class": c.cell.canonical_tt.literal(),
                 "footprint": c.footprint, "variables": list(c.variables),
                 "weight": fraction_str(c.weight), "soft": c.soft, "qubits": c.cell.qubit_cost}
                for c in self.cells
            ],
            "source_vars": {str(k): v for k, v in self.source_vars.items()},
            "notes": self.notes,
        }

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
