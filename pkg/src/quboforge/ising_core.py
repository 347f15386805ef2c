"""Chimera hardware graphs, exact Ising models and penalty-function algebra.

All coefficients are `fractions.Fraction`.  Brute-force evaluation scales a
model to integers by the common denominator and enumerates with numpy int64,
so results stay exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, DomainError, RangeError

BIAS_BOUND = Fraction(2)
COUPLING_BOUND = Fraction(1)
MAX_ENUMERATION = 26

SpinVector = Mapping[int, int]


def as_fraction(value) -> Fraction:
    """Accept int, Fraction, "p/q" or decimal strings. Floats go through repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("boolean is not a coefficient")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"bad rational {value!r}") from exc
    raise DomainError(f"cannot convert {value!r} to a rational")


def fraction_str(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def edge_key(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise DomainError(f"self loop on qubit {i}")
    return (i, j) if i < j else (j, i)


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class ChimeraGraph:
    rows: int
    cols: int
    shore: int = 4
    disabled: frozenset = frozenset()

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.shore < 1:
            raise DomainError("rows, cols and shore must be >= 1")
        object.__setattr__(self, "disabled", frozenset(int(q) for q in self.disabled))
        bad = [q for q in self.disabled if not 0 <= q < self.num_qubits]
        if bad:
            raise DomainError(f"disabled qubits out of range: {sorted(bad)[:5]}")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols * 2 * self.shore

    def qubit(self, row: int, col: int, side: int, k: int) -> int:
        """side 0 = vertical shore, 1 = horizontal shore."""
        return ((row * self.cols + col) * 2 + side) * self.shore + k

    def coords(self, q: int) -> tuple[int, int, int, int]:
        k = q % self.shore
        rest = q // self.shore
        side = rest % 2
        tile = rest // 2
        return tile // self.cols, tile % self.cols, side, k

    def tile_qubits(self, row: int, col: int) -> list[int]:
        base = (row * self.cols + col) * 2 * self.shore
        return [q for q in range(base, base + 2 * self.shore) if q not in self.disabled]

    def _raw_edges(self):
        L = self.shore
        for r in range(self.rows):
            for c in range(self.cols):
                for i in range(L):
                    v = self.qubit(r, c, 0, i)
                    for j in range(L):
                        yield v, self.qubit(r, c, 1, j)
                    if r + 1 < self.rows:
                        yield v, self.qubit(r + 1, c, 0, i)
                    if c + 1 < self.cols:
                        h = self.qubit(r, c, 1, i)
                        yield h, self.qubit(r, c + 1, 1, i)

    @cached_property
    def nodes(self) -> frozenset:
        return frozenset(q for q in range(self.num_qubits) if q not in self.disabled)

    @cached_property
    def edges(self) -> frozenset:
        off = self.disabled
        return frozenset(edge_key(u, v) for u, v in self._raw_edges() if u not in off and v not in off)

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {q: [] for q in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {q: tuple(sorted(ns)) for q, ns in adj.items()}

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and edge_key(i, j) in self.edges

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self.adjacency.get(q, ())

    def to_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "shore": self.shore, "disabled": sorted(self.disabled)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ChimeraGraph":
        return cls(int(d["rows"]), int(d["cols"]), int(d.get("shore", 4)), frozenset(d.get("disabled", ())))


def build_chimera(rows: int, cols: int, shore: int = 4, disabled: Iterable[int] = ()) -> ChimeraGraph:
    return ChimeraGraph(rows, cols, shore, frozenset(disabled))


@dataclass(frozen=True)
class GenericGraph:
    """Plain undirected graph, used for synthesis on non-Chimera subgraphs such as K3."""

    node_set: frozenset
    edge_set: frozenset

    def __post_init__(self):
        object.__setattr__(self, "node_set", frozenset(self.node_set))
        object.__setattr__(self, "edge_set", frozenset(edge_key(u, v) for u, v in self.edge_set))
        for u, v in self.edge_set:
            if u not in self.node_set or v not in self.node_set:
                raise DomainError(f"edge ({u},{v}) leaves the node set")

    @property
    def nodes(self) -> frozenset:
        return self.node_set

    @property
    def edges(self) -> frozenset:
        return self.edge_set

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {q: [] for q in self.node_set}
        for u, v in self.edge_set:
            adj[u].append(v)
            adj[v].append(u)
        return {q: tuple(sorted(ns)) for q, ns in adj.items()}

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and edge_key(i, j) in self.edge_set

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self.adjacency.get(q, ())

    def to_dict(self) -> dict:
        return {"nodes": sorted(self.node_set), "edges": sorted([list(e) for e in self.edge_set])}

    @classmethod
    def from_dict(cls, d: Mapping) -> "GenericGraph":
        return cls(frozenset(d["nodes"]), frozenset(tuple(e) for e in d["edges"]))


def complete_graph(nodes: Iterable[int]) -> GenericGraph:
    ns = sorted(nodes)
    return GenericGraph(frozenset(ns), frozenset((u, v) for i, u in enumerate(ns) for v in ns[i + 1:]))


def induced_subgraph(graph, nodes: Iterable[int]) -> GenericGraph:
    ns = frozenset(nodes)
    return GenericGraph(ns, frozenset(e for e in graph.edges if e[0] in ns and e[1] in ns))


def graph_to_dict(graph) -> dict:
    return graph.to_dict()


def graph_from_dict(d: Mapping):
    if "rows" in d:
        return ChimeraGraph.from_dict(d)
    return GenericGraph.from_dict(d)


# ---------------------------------------------------------------------------
# Ising models


@dataclass(frozen=True, eq=False)
class IsingModel:
    graph: object
    offset: Fraction = Fraction(0)
    biases: Mapping[int, Fraction] = field(default_factory=dict)
    couplings: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        nodes = self.graph.nodes
        b = {}
        for q, v in self.biases.items():
            v = as_fraction(v)
            q = int(q)
            if q not in nodes:
                raise DomainError(f"bias on qubit {q} outside the graph")
            if v:
                b[q] = v
        c = {}
        for (i, j), v in self.couplings.items():
            v = as_fraction(v)
            key = edge_key(int(i), int(j))
            if not self.graph.has_edge(*key):
                raise DomainError(f"coupling {key} is not an edge of the graph")
            if v:
                c[key] = c.get(key, Fraction(0)) + v
        object.__setattr__(self, "offset", as_fraction(self.offset))
        object.__setattr__(self, "biases", dict(sorted(b.items())))
        object.__setattr__(self, "couplings", dict(sorted((k, v) for k, v in c.items() if v)))

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (self.offset, self.biases, self.couplings) == (other.offset, other.biases, other.couplings)

    @property
    def qubits(self) -> list[int]:
        """Qubits carrying at least one nonzero term."""
        qs = set(self.biases)
        for i, j in self.couplings:
            qs.add(i)
            qs.add(j)
        return sorted(qs)

    def in_range(self) -> bool:
        return all(abs(v) <= BIAS_BOUND for v in self.biases.values()) and all(
            abs(v) <= COUPLING_BOUND for v in self.couplings.values()
        )

    def range_violations(self) -> list:
        bad = [q for q, v in self.biases.items() if abs(v) > BIAS_BOUND]
        bad += [e for e, v in self.couplings.items() if abs(v) > COUPLING_BOUND]
        return bad

    def scaled(self, c) -> "IsingModel":
        c = as_fraction(c)
        return IsingModel(
            self.graph,
            self.offset * c,
            {q: v * c for q, v in self.biases.items()},
            {e: v * c for e, v in self.couplings.items()},
        )

    def is_zero(self) -> bool:
        return not self.biases and not self.couplings

    def relabeled(self, mapping: Mapping[int, int], graph=None) -> "IsingModel":
        graph = self.graph if graph is None else graph
        return IsingModel(
            graph,
            self.offset,
            {mapping[q]: v for q, v in self.biases.items()},
            {edge_key(mapping[i], mapping[j]): v for (i, j), v in self.couplings.items()},
        )

    def energy(self, spins: SpinVector) -> Fraction:
        return energy(self, spins)


def energy(model: IsingModel, spins: SpinVector) -> Fraction:
    total = model.offset
    try:
        for q, v in model.biases.items():
            total += v * spins[q]
        for (i, j), v in model.couplings.items():
            total += v * spins[i] * spins[j]
    except KeyError as exc:
        raise DomainError(f"no spin value for qubit {exc.args[0]}") from None
    return total


def flip_delta(model: IsingModel, spins: SpinVector, q: int) -> Fraction:
    """H(z) - H(z with z_q flipped) = 2 z_q (theta_q + sum_j theta_qj z_j)."""
    local = model.biases.get(q, Fraction(0))
    for (i, j), v in model.couplings.items():
        if i == q:
            local += v * spins[j]
        elif j == q:
            local += v * spins[i]
    return 2 * spins[q] * local


def normalize(model: IsingModel) -> tuple[IsingModel, Fraction]:
    if model.is_zero():
        raise DomainError("cannot normalize a model without biases or couplings")
    scales = [BIAS_BOUND / abs(v) for v in model.biases.values()]
    scales += [COUPLING_BOUND / abs(v) for v in model.couplings.values()]
    c = min(scales)
    return model.scaled(c), c


# ---------------------------------------------------------------------------
# penalty functions


@dataclass(frozen=True, eq=False)
class PenaltyFunction:
    model: IsingModel
    inputs: tuple
    ancillas: tuple = ()
    gap: Fraction = Fraction(0)
    exact: bool = False
    copy_groups: tuple = ()

    def __post_init__(self):
        inputs = tuple(int(q) for q in self.inputs)
        ancillas = tuple(int(q) for q in self.ancillas)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "ancillas", ancillas)
        object.__setattr__(self, "gap", as_fraction(self.gap))
        allq = inputs + ancillas
        if len(set(allq)) != len(allq):
            raise DomainError("inputs and ancillas must be distinct qubits")
        nodes = self.model.graph.nodes
        missing = [q for q in allq if q not in nodes]
        if missing:
            raise DomainError(f"qubits {missing} are not enabled in the graph")
        stray = set(self.model.qubits) - set(allq)
        if stray:
            raise DomainError(f"model uses qubits {sorted(stray)} that are neither inputs nor ancillas")

    @property
    def variables(self) -> tuple:
        return self.inputs + self.ancillas

    @property
    def n(self) -> int:
        return len(self.inputs)

    @property
    def h(self) -> int:
        return len(self.ancillas)

    def with_model(self, model: IsingModel, gap=None) -> "PenaltyFunction":
        return PenaltyFunction(model, self.inputs, self.ancillas, self.gap if gap is None else gap, self.exact,
                               self.copy_groups)

    def __eq__(self, other):
        if not isinstance(other, PenaltyFunction):
            return NotImplemented
        return (self.model, self.inputs, self.ancillas, self.gap, self.exact) == (
            other.model, other.inputs, other.ancillas, other.gap, other.exact)


def reverse_qubit(model: IsingModel, q: int) -> IsingModel:
    return IsingModel(
        model.graph,
        model.offset,
        {i: (-v if i == q else v) for i, v in model.biases.items()},
        {e: (-v if q in e else v) for e, v in model.couplings.items()},
    )


def spin_reversal(pf: PenaltyFunction, r: int) -> PenaltyFunction:
    """Negate variable r (index into inputs followed by ancillas)."""
    variables = pf.variables
    if not 0 <= r < len(variables):
        raise DomainError(f"variable index {r} out of range (0..{len(variables) - 1})")
    return pf.with_model(reverse_qubit(pf.model, variables[r]))


def _sum_models(graph, parts) -> tuple[Fraction, dict, dict]:
    offset = Fraction(0)
    biases: dict[int, Fraction] = {}
    couplings: dict[tuple[int, int], Fraction] = {}
    for model, w in parts:
        offset += w * model.offset
        for q, v in model.biases.items():
            biases[q] = biases.get(q, Fraction(0)) + w * v
        for e, v in model.couplings.items():
            couplings[e] = couplings.get(e, Fraction(0)) + w * v
    return offset, biases, couplings


def combine_weighted(parts, inputs=None) -> PenaltyFunction:
    """Weighted sum of penalty functions that may share qubits.

    `inputs` selects which qubits are inputs of the result; by default the
    ordered union of the parts' inputs.  All other qubits become ancillas.
    """
    parts = [(pf, as_fraction(w)) for pf, w in parts]
    if not parts:
        raise DomainError("nothing to combine")
    graph = parts[0][0].model.graph
    seen_anc: set[int] = set()
    for pf, w in parts:
        if w <= 0:
            raise DomainError("weights must be positive")
        if pf.model.graph != graph:
            raise DomainError("parts live on different graphs")
        if seen_anc & set(pf.ancillas):
            raise DomainError("ancilla sets must be pairwise disjoint")
        seen_anc |= set(pf.ancillas)
    offset, biases, couplings = _sum_models(graph, [(pf.model, w) for pf, w in parts])
    for q, v in biases.items():
        if abs(v) > BIAS_BOUND:
            raise RangeError(f"summed bias {v} on qubit {q} is out of range", q)
    for e, v in couplings.items():
        if abs(v) > COUPLING_BOUND:
            raise RangeError(f"summed coupling {v} on edge {e} is out of range", e)
    if inputs is None:
        inputs = []
        for pf, _ in parts:
            inputs += [q for q in pf.inputs if q not in inputs]
    inputs = tuple(inputs)
    allq: list[int] = []
    for pf, _ in parts:
        allq += [q for q in pf.variables if q not in allq]
    ancillas = tuple(q for q in allq if q not in inputs)
    gap = min(w * pf.gap for pf, w in parts)
    exact = len(parts) == 1 and parts[0][0].exact
    model = IsingModel(graph, offset, biases, couplings)
    return PenaltyFunction(model, inputs, ancillas, gap, exact)


def chain_penalty(graph, q1: int, q2: int, sign: int = 1) -> PenaltyFunction:
    """1 - z1 z2 (sign=+1) or 1 + z1 z2 (sign=-1); gap 2, exact."""
    if not graph.has_edge(q1, q2):
        raise DomainError(f"({q1},{q2}) is not an edge")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    model = IsingModel(graph, Fraction(1), {}, {edge_key(q1, q2): Fraction(-sign)})
    return PenaltyFunction(model, (q1, q2), (), Fraction(2), True)


def compose_with_chains(parts, chain_edges, chain_weight=1) -> PenaltyFunction:
    """Disjoint parts joined by weighted chain penalties.

    The result's inputs are the parts' inputs with every copy group collapsed
    to its first qubit; the other copies become ancillas.  `copy_groups`
    records the groups for decoding.
    """
    chain_weight = as_fraction(chain_weight)
    if chain_weight < 1:
        raise DomainError("chain weight must be >= 1")
    if not parts:
        raise DomainError("nothing to compose")
    graph = parts[0].model.graph
    used: set[int] = set()
    for pf in parts:
        qs = set(pf.variables)
        if qs & used:
            raise DomainError(f"parts overlap on qubits {sorted(qs & used)}")
        used |= qs
    # union-find over chain edges
    parent: dict[int, int] = {}

    def find(q):
        parent.setdefault(q, q)
        while parent[q] != q:
            parent[q] = parent[parent[q]]
            q = parent[q]
        return q

    chain_models = []
    for q1, q2, sign in chain_edges:
        if not graph.has_edge(q1, q2):
            raise DomainError(f"chain edge ({q1},{q2}) is not in the graph")
        chain_models.append((chain_penalty(graph, q1, q2, sign).model, chain_weight))
        a, b = find(q1), find(q2)
        if a != b:
            parent[max(a, b)] = min(a, b)
    offset, biases, couplings = _sum_models(graph, [(pf.model, Fraction(1)) for pf in parts] + chain_models)
    groups: dict[int, list[int]] = {}
    for q in parent:
        groups.setdefault(find(q), []).append(q)
    copy_groups = tuple(tuple(sorted(g)) for _, g in sorted(groups.items()) if len(g) > 1)
    rep = {q: g[0] for g in copy_groups for q in g}
    inputs: list[int] = []
    for pf in parts:
        for q in pf.inputs:
            r = rep.get(q, q)
            if r not in inputs:
                inputs.append(r)
    allq: list[int] = []
    for pf in parts:
        allq += list(pf.variables)
    allq += [q for g in copy_groups for q in g if q not in allq]
    ancillas = tuple(q for q in allq if q not in inputs)
    gaps = [pf.gap for pf in parts]
    gap = min(gaps) if not chain_models else min(gaps + [2 * chain_weight])
    model = IsingModel(graph, offset, biases, couplings)
    return PenaltyFunction(model, tuple(inputs), ancillas, gap, False, copy_groups)


# ---------------------------------------------------------------------------
# exhaustive evaluation


def _integer_terms(model: IsingModel, qubits: list[int]):
    """Scale to integers: returns (denominator, offset, biases array, couplings list)."""
    index = {q: i for i, q in enumerate(qubits)}
    coeffs = [model.offset, *model.biases.values(), *model.couplings.values()]
    den = lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    bound = sum(abs(c) for c in coeffs) * den
    if bound >= 2**62:
        raise CapacityError("coefficients too large for exact int64 enumeration")
    h = np.zeros(len(qubits), dtype=np.int64)
    for q, v in model.biases.items():
        h[index[q]] = int(v * den)
    J = [(index[i], index[j], int(v * den)) for (i, j), v in model.couplings.items()]
    return den, int(model.offset * den), h, J


def _spin_columns(idx: np.ndarray, nbits: int, shift: int = 0) -> np.ndarray:
    return (((idx[:, None] >> (np.arange(nbits) + shift)) & 1) * 2 - 1).astype(np.int64)


def _block_energies(terms, low: int, high_values: np.ndarray) -> np.ndarray:
    """Integer energies for all low assignments x each high value; shape (len(high), 2^low)."""
    den, off, h, J = terms
    nlow = 1 << low
    nhigh_bits = len(h) - low
    lo = _spin_columns(np.arange(nlow, dtype=np.int64), low)  # (2^low, low)
    hi = _spin_columns(high_values.astype(np.int64), nhigh_bits)  # (B, nhigh)
    e = np.full((len(high_values), nlow), off, dtype=np.int64)
    e += (lo @ h[:low])[None, :]
    if nhigh_bits:
        e += (hi @ h[low:])[:, None]

    def col(i):
        if i < low:
            return lo[:, i][None, :]
        return hi[:, i - low][:, None]

    for i, j, v in J:
        e += v * (col(i) * col(j))
    return e


def min_over_high(model: IsingModel, low_qubits: list[int], high_qubits: list[int]):
    """For each assignment of low_qubits, min over high_qubits of the energy (exact)."""
    qubits = list(low_qubits) + list(high_qubits)
    if len(qubits) > MAX_ENUMERATION:
        raise CapacityError(f"{len(qubits)} qubits exceed the enumeration bound {MAX_ENUMERATION}")
    terms = _integer_terms(model, qubits)
    low, nh = len(low_qubits), len(high_qubits)
    best = np.full(1 << low, np.iinfo(np.int64).max, dtype=np.int64)
    block = max(1, (1 << 22) >> low)
    for start in range(0, 1 << nh, block):
        hv = np.arange(start, min(1 << nh, start + block), dtype=np.int64)
        e = _block_energies(terms, low, hv)
        np.minimum(best, e.min(axis=0), out=best)
    den = terms[0]
    return [Fraction(int(v), den) for v in best]


def exact_ground_states(model: IsingModel, qubits=None) -> tuple[Fraction, list[dict]]:
    qubits = sorted(model.qubits if qubits is None else qubits)
    missing = set(model.qubits) - set(qubits)
    if missing:
        raise DomainError(f"qubits {sorted(missing)} carry terms but were not enumerated")
    k = len(qubits)
    if k > MAX_ENUMERATION:
        raise CapacityError(f"{k} active qubits exceed the enumeration bound {MAX_ENUMERATION}")
    terms = _integer_terms(model, qubits)
    low = min(k, 20)
    best = None
    winners: list[int] = []
    block = max(1, (1 << 22) >> low)
    for start in range(0, 1 << (k - low), block):
        hv = np.arange(start, min(1 << (k - low), start + block), dtype=np.int64)
        e = _block_energies(terms, low, hv)
        m = int(e.min())
        if best is None or m < best:
            best, winners = m, []
        if m == best:
            hi_idx, lo_idx = np.nonzero(e == m)
            winners += [int(hv[a]) << low | int(b) for a, b in zip(hi_idx, lo_idx)]
    states = [{q: (1 if (w >> i) & 1 else -1) for i, q in enumerate(qubits)} for w in sorted(winners)]
    return Fraction(best, terms[0]), states


@dataclass
class VerificationReport:
    minima: list  # min over ancillas per input assignment index
    true_gap: Fraction | None
    models_zero: bool
    exact: bool
    declared_gap: Fraction
    declared_exact: bool
    passed: bool
    failures: list = field(default_factory=list)


def verify_penalty(pf: PenaltyFunction, tt) -> VerificationReport:
    if tt.arity != pf.n:
        raise DomainError(f"truth table arity {tt.arity} != {pf.n} inputs")
    minima = min_over_high(pf.model, list(pf.inputs), list(pf.ancillas))
    failures = []
    models_zero = True
    counter_vals = []
    for k, m in enumerate(minima):
        if tt.value(k):
            if m != 0:
                models_zero = False
                failures.append(f"model {k}: min energy {m} != 0")
        else:
            counter_vals.append(m)
    true_gap = min(counter_vals) if counter_vals and models_zero else None
    exact = bool(counter_vals) and models_zero and all(v == true_gap for v in counter_vals)
    passed = models_zero
    if counter_vals:
        if true_gap is None or true_gap < pf.gap or true_gap <= 0:
            passed = False
            failures.append(f"true gap {true_gap} below declared {pf.gap}")
        if pf.exact and not (exact and true_gap == pf.gap):
            passed = False
            failures.append("declared exact but countermodel minima differ from the gap")
    return VerificationReport(minima, true_gap, models_zero, exact, pf.gap, pf.exact, passed, failures)


# ---------------------------------------------------------------------------
# JSON


def model_to_dict(model: IsingModel) -> dict:
    return {
        "graph": model.graph.to_dict(),
        "offset": fraction_str(model.offset),
        "linear": {str(q): fraction_str(v) for q, v in model.biases.items()},
        "quadratic": [[str(i), str(j), fraction_str(v)] for (i, j), v in model.couplings.items()],
    }


def model_from_dict(d: Mapping, graph=None) -> IsingModel:
    graph = graph_from_dict(d["graph"]) if graph is None else graph
    return IsingModel(
        graph,
        as_fraction(d.get("offset", "0")),
        {int(q): as_fraction(v) for q, v in d.get("linear", {}).items()},
        {edge_key(int(i), int(j)): as_fraction(v) for i, j, v in d.get("quadratic", [])},
    )


def save_model(model: IsingModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)


def load_model(path) -> IsingModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def penalty_to_dict(pf: PenaltyFunction) -> dict:
    d = model_to_dict(pf.model)
    d.update(inputs=list(pf.inputs), ancillas=list(pf.ancillas), gap=fraction_str(pf.gap), exact=pf.exact)
    return d


def penalty_from_dict(d: Mapping) -> PenaltyFunction:
    model = model_from_dict(d)
    inputs = [int(q) for q in d["inputs"]]
    ancillas = [int(q) for q in d.get("ancillas", [q for q in model.qubits if q not in inputs])]
    return PenaltyFunction(model, inputs, ancillas, as_fraction(d.get("gap", "0")), bool(d.get("exact", False)))
