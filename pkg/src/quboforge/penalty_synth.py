"""Maximum-gap penalty synthesis on a fixed small subgraph.

A penalty P(x, a) must have min_a P = 0 on models and min_a P >= g on
countermodels.  Expanding the quantifier over ancillas gives linear rows in
(offset, biases, couplings, g); the "exists a with P = 0" part becomes one
equality per model whose ancilla assignment (the witness) is chosen by
branch-and-bound.  Each node is a floating LP used for bounding; every
incumbent is re-solved with the exact rational simplex, and the returned
penalty is checked by brute force.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .boolfn import TruthTable, npn_symmetry_classes, parse_tt
from .errors import CapacityError, DomainError, Infeasible
from .exact_lp import IncrementalLP, LinearProgram, solve_exact
from .ising_core import (
    BIAS_BOUND, COUPLING_BOUND, GenericGraph, IsingModel, PenaltyFunction, build_chimera, edge_key,
    induced_subgraph, normalize, verify_penalty,
)

SHANNON_ROW_BUDGET = 12
VE_MESSAGE_BUDGET = 4096
FLOAT_TOL = 1e-6

FOOTPRINT_SIZES = {"qubit": 1, "half-tile": 4, "tile": 8, "2-tile": 16}


# ---------------------------------------------------------------------------
# footprints


@lru_cache(maxsize=None)
def footprint_graph(footprint: str):
    """Local graph of a footprint in the qubit numbering of a small Chimera block."""
    if footprint == "qubit":
        return GenericGraph(frozenset([0]), frozenset())
    if footprint == "half-tile":
        return induced_subgraph(build_chimera(1, 1, 4), [0, 1, 4, 5])
    if footprint == "tile":
        return build_chimera(1, 1, 4)
    if footprint == "2-tile":
        return build_chimera(2, 1, 4)
    raise DomainError(f"unknown footprint {footprint!r}")


def default_h(footprint: str, n: int) -> int:
    h = FOOTPRINT_SIZES[footprint] - n
    if h < 0:
        raise CapacityError(f"{n} inputs do not fit a {footprint}")
    return h


# ---------------------------------------------------------------------------
# specs and systems


@dataclass(frozen=True)
class SynthesisSpec:
    function: TruthTable
    subgraph: object
    placement: tuple  # input index -> qubit
    ancillas: tuple = None  # ancilla qubits; default: all remaining qubits
    require_exact: bool = False
    countermodel_filter: int | None = None

    def __post_init__(self):
        placement = tuple(int(q) for q in self.placement)
        object.__setattr__(self, "placement", placement)
        if len(placement) != self.function.arity:
            raise DomainError("placement must map every input")
        if len(set(placement)) != len(placement):
            raise DomainError("placement is not injective")
        nodes = self.subgraph.nodes
        if not set(placement) <= nodes:
            raise DomainError("placement leaves the subgraph")
        if self.ancillas is None:
            anc = tuple(sorted(nodes - set(placement)))
        else:
            anc = tuple(int(q) for q in self.ancillas)
        if set(anc) & set(placement) or not set(anc) <= nodes or len(set(anc)) != len(anc):
            raise DomainError("ancillas must be distinct subgraph qubits not used by inputs")
        object.__setattr__(self, "ancillas", anc)

    @property
    def n(self):
        return self.function.arity

    @property
    def h(self):
        return len(self.ancillas)

    @property
    def qubits(self):
        return self.placement + self.ancillas

    @property
    def edges(self):
        qs = set(self.qubits)
        return sorted(e for e in self.subgraph.edges if e[0] in qs and e[1] in qs)


@dataclass
class WitnessSlot:
    kind: str  # "model" or "countermodel"
    x: int
    candidates: list


@dataclass
class ConstraintSystem:
    spec: SynthesisSpec
    lp: LinearProgram  # base rows; objective is g
    theta_columns: int  # offset + biases + couplings come first
    g_column: int
    slots: list
    countermodels: list  # countermodels carrying rows (after filtering)
    witness_rows: dict = field(default_factory=dict)  # (slot, candidate) -> (rows, rhs)
    kind: str = "shannon"

    def equalities(self, slot: int, cand: int):
        return self.witness_rows[(slot, cand)]


def _spins(k: int, nbits: int) -> np.ndarray:
    return np.array([1 if (k >> i) & 1 else -1 for i in range(nbits)], dtype=np.int64)


def _theta_layout(spec: SynthesisSpec):
    qubits = spec.qubits
    index = {q: i for i, q in enumerate(qubits)}
    edges = [(index[u], index[v]) for u, v in spec.edges]
    return qubits, edges


def _energy_coefficients(z: np.ndarray, edges) -> np.ndarray:
    """Row of dP/dtheta for a full spin vector z: [1, z_i..., z_u z_v...]."""
    return np.concatenate(([1], z, [z[u] * z[v] for u, v in edges]))


def _bounds(nvars, nedges, extra):
    lower = [None] + [-BIAS_BOUND] * nvars + [-COUPLING_BOUND] * nedges + [None] * extra
    upper = [None] + [BIAS_BOUND] * nvars + [COUPLING_BOUND] * nedges + [None] * extra
    return lower, upper


def _surviving_countermodels(tt: TruthTable, radius):
    cms = tt.countermodel_indices()
    if radius is None:
        return cms
    ms = tt.model_indices()
    return [x for x in cms if any(bin(x ^ m).count("1") <= radius for m in ms)]


def _check_function(tt: TruthTable):
    if not tt.model_indices():
        raise DomainError("function has no models; no penalty exists")
    if not tt.countermodel_indices():
        raise DomainError("function has no countermodels; the gap is unbounded")


def build_shannon_system(spec: SynthesisSpec) -> ConstraintSystem:
    _check_function(spec.function)
    n, h = spec.n, spec.h
    if n + h > SHANNON_ROW_BUDGET:
        raise CapacityError(f"n+h = {n + h} exceeds the Shannon row budget {SHANNON_ROW_BUDGET}")
    qubits, edges = _theta_layout(spec)
    nv, ne = len(qubits), len(edges)
    ncols = 1 + nv + ne + 1
    g = ncols - 1
    tt = spec.function
    cms = _surviving_countermodels(tt, spec.countermodel_filter)
    coef = {}
    for k in range(1 << (n + h)):
        coef[k] = _energy_coefficients(_spins(k, n + h), edges)
    A_ub, b_ub = [], []
    for x in tt.model_indices():
        for a in range(1 << h):
            A_ub.append(np.concatenate((-coef[x | a << n], [0])))
            b_ub.append(0)
    for x in cms:
        for a in range(1 << h):
            A_ub.append(np.concatenate((-coef[x | a << n], [1])))
            b_ub.append(0)
    objective = [0] * (ncols - 1) + [1]
    lower, upper = _bounds(nv, ne, 1)
    lp = LinearProgram(ncols, objective, np.array(A_ub, dtype=np.int64), b_ub, [], [], lower, upper)
    slots = [WitnessSlot("model", x, list(range(1 << h))) for x in tt.model_indices()]
    if spec.require_exact:
        slots += [WitnessSlot("countermodel", x, list(range(1 << h))) for x in cms]
    system = ConstraintSystem(spec, lp, ncols - 1, g, slots, cms)
    for s, slot in enumerate(slots):
        tail = [0] if slot.kind == "model" else [-1]
        for a in slot.candidates:
            system.witness_rows[(s, a)] = ([np.concatenate((coef[slot.x | a << n], tail))], [0])
    return system


# ---------------------------------------------------------------------------
# variable elimination


@dataclass
class MessageSystem(ConstraintSystem):
    order: list = field(default_factory=list)  # ancilla local indices, first eliminated first
    scopes: dict = field(default_factory=dict)  # ancilla -> V_i (tuple of ancillas)
    buckets: dict = field(default_factory=dict)  # ancilla -> list of factor descriptions
    message_columns: dict = field(default_factory=dict)  # (i, a_V, x) -> column
    messages_per_x: int = 0


def _min_degree_order(h, anc_edges):
    adj = {i: set() for i in range(h)}
    for u, v in anc_edges:
        adj[u].add(v)
        adj[v].add(u)
    order = []
    remaining = set(range(h))
    while remaining:
        i = min(remaining, key=lambda v: (len(adj[v] & remaining), v))
        nb = adj[i] & remaining
        for u in nb:
            adj[u] |= nb - {u}
        order.append(i)
        remaining.remove(i)
    return order


def build_ve_system(spec: SynthesisSpec, elimination_order=None) -> MessageSystem:
    """Variable-elimination reformulation.

    Ancilla i is eliminated through a message m_i(a_V | x) bounded above by
    the bucket sum for both values of a_i; messages with identical bound rows
    share one column.
    """
    _check_function(spec.function)
    tt = spec.function
    n, h = spec.n, spec.h
    qubits, edges = _theta_layout(spec)
    nv, ne = len(qubits), len(edges)
    col_offset = 0
    col_bias = {i: 1 + i for i in range(nv)}
    col_edge = {e: 1 + nv + k for k, e in enumerate(edges)}
    anc_edges = [(u - n, v - n) for u, v in edges if u >= n and v >= n]
    in_anc = {}  # ancilla -> list of (input index, edge column)
    for (u, v), c in col_edge.items():
        if u < n <= v:
            in_anc.setdefault(v - n, []).append((u, c))
        elif v < n <= u:
            in_anc.setdefault(u - n, []).append((v, c))
    order = list(elimination_order) if elimination_order is not None else _min_degree_order(h, anc_edges)
    if sorted(order) != list(range(h)):
        raise DomainError("elimination order must list every ancilla once")
    position = {a: p for p, a in enumerate(order)}

    # symbolic bucket structure (independent of x)
    buckets = {i: [] for i in range(h)}
    for u, v in anc_edges:
        first = u if position[u] < position[v] else v
        buckets[first].append(("edge", (u, v)))
    scopes = {}
    for i in order:
        scope = set()
        for kind, data in buckets[i]:
            if kind == "edge":
                scope |= set(data)
            else:
                scope |= set(scopes[data])
        scope.discard(i)
        scopes[i] = tuple(sorted(scope, key=lambda a: position[a]))
        if scope:
            target = min(scope, key=lambda a: position[a])
            buckets[target].append(("message", i))
    per_x = sum(1 << len(scopes[i]) for i in range(h))
    if per_x > VE_MESSAGE_BUDGET:
        raise CapacityError(f"{per_x} messages per assignment exceed the budget {VE_MESSAGE_BUDGET}")

    ncols = 1 + nv + ne
    columns: dict = {}  # dedup key -> column
    message_columns = {}
    ub_rows: list[dict] = []

    def theta_const(x):
        form = {col_offset: 1}
        xs = _spins(x, n)
        for j in range(n):
            form[col_bias[j]] = int(xs[j])
        for (u, v), c in col_edge.items():
            if u < n and v < n:
                form[c] = int(xs[u] * xs[v])
        return form

    def add(form, other, sign=1):
        for c, v in other.items():
            form[c] = form.get(c, 0) + sign * v

    def build_messages(x):
        """Columns m_i(a_V|x) for all i, a_V; returns lookup (i, a_V tuple) -> column."""
        nonlocal ncols
        xs = _spins(x, n)
        lookup = {}
        for i in order:
            V = scopes[i]
            for aV in product((-1, 1), repeat=len(V)):
                env = dict(zip(V, aV))
                rhs = []
                for ai in (-1, 1):
                    env[i] = ai
                    form = {col_bias[n + i]: ai}
                    for j, c in in_anc.get(i, []):
                        form[c] = form.get(c, 0) + ai * int(xs[j])
                    for kind, data in buckets[i]:
                        if kind == "edge":
                            u, v = data
                            c = col_edge[(n + u, n + v)] if (n + u, n + v) in col_edge else col_edge[(n + v, n + u)]
                            form[c] = form.get(c, 0) + env[u] * env[v]
                        else:
                            j = data
                            key = tuple(env[a] for a in scopes[j])
                            c = lookup[(j, key)]
                            form[c] = form.get(c, 0) + 1
                    rhs.append(frozenset((c, v) for c, v in form.items() if v))
                key = (i, aV, rhs[0], rhs[1])
                if key not in columns:
                    columns[key] = ncols
                    ncols += 1
                    for r in rhs:
                        ub_rows.append((columns[key], dict(r)))
                lookup[(i, aV)] = columns[key]
                message_columns[(i, aV, x)] = columns[key]
        return lookup

    cms = _surviving_countermodels(tt, spec.countermodel_filter)
    lookups = {}
    for x in tt.model_indices() + cms:
        lookups[x] = build_messages(x)
    g = ncols
    ncols += 1

    def dense(form, gcoef=0):
        row = [0] * ncols
        for c, v in form.items():
            row[c] += v
        row[g] += gcoef
        return row

    roots = [i for i in order if not scopes[i]]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for mcol, rhs in ub_rows:  # m - rhs <= 0
        form = {mcol: 1}
        add(form, rhs, -1)
        A_ub.append(dense(form))
        b_ub.append(0)

    def root_sum(x):
        form = theta_const(x)
        for i in roots:
            c = lookups[x][(i, ())]
            form[c] = form.get(c, 0) + 1
        return form

    for x in cms:  # c(x) + sum m_root >= g
        form = root_sum(x)
        A_ub.append(dense({c: -v for c, v in form.items()}, 1))
        b_ub.append(0)
    for x in tt.model_indices():  # c(x) + sum m_root = 0
        A_eq.append(dense(root_sum(x)))
        b_eq.append(0)
    lower, upper = _bounds(nv, ne, ncols - (1 + nv + ne))
    objective = [0] * ncols
    objective[g] = 1
    lp = LinearProgram(ncols, objective, np.array(A_ub, dtype=np.int64).reshape(-1, ncols), b_ub,
                       np.array(A_eq, dtype=np.int64).reshape(-1, ncols), b_eq, lower, upper)
    slots = [WitnessSlot("model", x, list(range(1 << h))) for x in tt.model_indices()]
    if spec.require_exact:
        slots += [WitnessSlot("countermodel", x, list(range(1 << h))) for x in cms]
    system = MessageSystem(spec, lp, 1 + nv + ne, g, slots, cms, kind="ve", order=order, scopes=scopes,
                           buckets=buckets, message_columns=message_columns, messages_per_x=per_x)
    for s, slot in enumerate(slots):
        x = slot.x
        for a in slot.candidates:
            beta = {i: (1 if (a >> i) & 1 else -1) for i in range(h)}
            rows, rhs = [], []
            for i in order:
                aV = tuple(beta[v] for v in scopes[i])
                mcol = lookups[x][(i, aV)]
                # tie: m_i(beta_V|x) equals the bucket sum at a_i = beta_i
                form = {mcol: 1}
                add(form, _bucket_form(i, beta, x, n, col_bias, in_anc, buckets, col_edge, scopes, lookups), -1)
                rows.append(dense(form))
                rhs.append(0)
            if slot.kind == "countermodel":
                form = root_sum(x)
                rows.append(dense(form, -1))
                rhs.append(0)
            system.witness_rows[(s, a)] = (rows, rhs)
    return system


def _bucket_form(i, beta, x, n, col_bias, in_anc, buckets, col_edge, scopes, lookups):
    xs = _spins(x, n)
    ai = beta[i]
    form = {col_bias[n + i]: ai}
    for j, c in in_anc.get(i, []):
        form[c] = form.get(c, 0) + ai * int(xs[j])
    for kind, data in buckets[i]:
        if kind == "edge":
            u, v = data
            c = col_edge.get((n + u, n + v), col_edge.get((n + v, n + u)))
            form[c] = form.get(c, 0) + beta[u] * beta[v]
        else:
            c = lookups[x][(data, tuple(beta[a] for a in scopes[data]))]
            form[c] = form.get(c, 0) + 1
    return form


# ---------------------------------------------------------------------------
# witness branch-and-bound


@dataclass
class GapResult:
    penalty: PenaltyFunction
    gap: Fraction
    witnesses: dict  # slot index -> ancilla assignment
    nodes: int = 0
    lp_solves: int = 0
    complete: bool = True


class _Search:
    def __init__(self, system: ConstraintSystem, lower_bound, deadline, node_limit):
        self.system = system
        self.lp = system.lp
        self.float_lp = IncrementalLP(system.lp, system.witness_rows)
        self.eq_float = {k: (np.asarray(r, dtype=float).reshape(len(r), system.lp.n), np.asarray(b, dtype=float))
                         for k, (r, b) in system.witness_rows.items()}
        self.incumbent = Fraction(lower_bound)
        self.best = None
        self.deadline = deadline
        self.node_limit = node_limit
        self.nodes = 0
        self.lp_solves = 0
        self.complete = True

    def push(self, s, a):
        self.float_lp.enable((s, a))

    def pop(self, s, a):
        self.float_lp.disable((s, a))

    def solve(self):
        self.lp_solves += 1
        res = self.float_lp.solve()
        return res if res.status == "optimal" else None

    def trial(self, s, a):
        self.push(s, a)
        res = self.solve()
        self.pop(s, a)
        return res

    def residual(self, slot: int, cand: int, x) -> float:
        rows, rhs = self.eq_float[(slot, cand)]
        if not len(rhs):
            return 0.0
        return float(np.max(np.abs(rows @ x - rhs)))

    def certify(self, fixed: dict, hint):
        eq_rows, eq_rhs = [], []
        for s, a in sorted(fixed.items()):
            r, b = self.system.witness_rows[(s, a)]
            eq_rows += [[int(v) for v in row] for row in r]
            eq_rhs += list(b)
        base = self.lp
        lp = LinearProgram(base.n, base.objective, [[int(v) for v in r] for r in base.A_ub], list(base.b_ub),
                           [[int(v) for v in r] for r in base.A_eq] + eq_rows, list(base.b_eq) + eq_rhs,
                           base.lower, base.upper)
        res = solve_exact(lp, feasible_point=[0] * lp.n, float_hint=hint)
        if res.status != "optimal":
            return
        if res.value > self.incumbent or (self.best is None and res.value > 0 and res.value >= self.incumbent):
            self.incumbent = res.value
            self.best = (res.value, dict(fixed), res.x)

    def out_of_budget(self):
        if self.node_limit is not None and self.nodes >= self.node_limit:
            return True
        return self.deadline is not None and time.monotonic() > self.deadline

    def better(self, value: float) -> bool:
        return value > float(self.incumbent) + FLOAT_TOL

    def run(self, root_fixed: dict):
        alive = {s: list(slot.candidates) for s, slot in enumerate(self.system.slots) if s not in root_fixed}
        for s, a in root_fixed.items():
            self.push(s, a)
        root = self.solve()
        if root is not None:
            self._node(dict(root_fixed), alive, root)

    def _node(self, fixed, alive, res):
        if self.out_of_budget():
            self.complete = False
            return
        self.nodes += 1
        if not self.better(res.value):
            return
        x = np.asarray(res.x)
        # slots already satisfied by this solution
        open_slots = []
        completion = dict(fixed)
        for s, cands in alive.items():
            resid = [(self.residual(s, a, x), a) for a in cands]
            r, a = min(resid)
            if r <= FLOAT_TOL:
                completion[s] = a
            else:
                open_slots.append(s)
        if not open_slots:
            self.certify(completion, res.x)
            return
        # strong branching on the open slots: fewest surviving candidates first
        best_slot = None
        for s in sorted(open_slots, key=lambda s: self.system.slots[s].x):
            children = []
            for a in alive[s]:
                child = self.trial(s, a)
                if child is not None and self.better(child.value):
                    children.append((child.value, a, child))
            if best_slot is None or len(children) < len(best_slot[1]):
                best_slot = (s, children)
            if len(children) <= 1:
                break
        s, children = best_slot
        if not children:
            return
        children.sort(key=lambda t: (-t[0], t[1]))
        rest = {k: v for k, v in alive.items() if k != s}
        for value, a, child in children:
            if not self.better(value):
                continue
            self.push(s, a)
            self._node({**fixed, s: a}, rest, child)
            self.pop(s, a)


def _gauge_slot(system: ConstraintSystem):
    """Flipping an ancilla maps penalties to penalties, so the first model's
    witness can be fixed to all +1."""
    if not system.slots:
        return {}
    return {0: (1 << system.spec.h) - 1}


def penalty_from_solution(system: ConstraintSystem, x, gap, exact) -> PenaltyFunction:
    spec = system.spec
    qubits, edges = _theta_layout(spec)
    nv = len(qubits)
    offset = x[0]
    biases = {qubits[i]: x[1 + i] for i in range(nv)}
    couplings = {edge_key(qubits[u], qubits[v]): x[1 + nv + k] for k, (u, v) in enumerate(edges)}
    model = IsingModel(spec.subgraph, offset, biases, couplings)
    return PenaltyFunction(model, spec.placement, spec.ancillas, gap, exact)


def maximize_gap(system: ConstraintSystem, lower_bound=0, time_budget=None, node_limit=None) -> GapResult:
    """Maximum g over witness profiles.  Raises Infeasible when no profile
    beats `lower_bound` (0 by default, i.e. no penalty exists)."""
    deadline = None if time_budget is None else time.monotonic() + time_budget
    search = _Search(system, lower_bound, deadline, node_limit)
    search.run(_gauge_slot(system))
    if search.best is None:
        raise Infeasible("no witness profile admits a positive gap" if lower_bound == 0
                         else f"no witness profile beats gap {lower_bound}")
    value, fixed, x = search.best
    pf = penalty_from_solution(system, x, value, system.spec.require_exact)
    return GapResult(pf, value, fixed, search.nodes, search.lp_solves, search.complete)


def maximize_gap_exhaustive(system: ConstraintSystem) -> Fraction | None:
    """Enumerate every witness profile with exact LPs (small systems only).
    Returns the best gap, or None when no profile gives g > 0."""
    slots = system.slots
    if len(slots) * system.spec.h > 16:
        raise CapacityError("too many witness profiles for exhaustive enumeration")
    base = system.lp
    best = None
    for profile in product(*[slot.candidates for slot in slots]):
        rows, rhs = [], []
        for s, a in enumerate(profile):
            r, b = system.witness_rows[(s, a)]
            rows += [[int(v) for v in row] for row in r]
            rhs += list(b)
        lp = LinearProgram(base.n, base.objective, [[int(v) for v in r] for r in base.A_ub], list(base.b_ub),
                           [[int(v) for v in r] for r in base.A_eq] + rows, list(base.b_eq) + rhs,
                           base.lower, base.upper)
        res = solve_exact(lp, feasible_point=[0] * lp.n)
        if res.status == "optimal" and res.value > 0 and (best is None or res.value > best):
            best = res.value
    return best


# ---------------------------------------------------------------------------
# placements


@lru_cache(maxsize=None)
def _automorphisms(graph) -> np.ndarray:
    import networkx as nx
    from networkx.algorithms.isomorphism import GraphMatcher

    nodes = sorted(graph.nodes)
    if len(nodes) > 16:
        raise DomainError("placement enumeration supports subgraphs of at most 16 qubits")
    g = nx.Graph()
    g.add_nodes_from(nodes)
    g.add_edges_from(graph.edges)
    index = {q: i for i, q in enumerate(nodes)}
    auts = [[index[m[q]] for q in nodes] for m in GraphMatcher(g, g).isomorphisms_iter()]
    return np.array(auts, dtype=np.int64)


def canonical_coloring(graph, colors) -> tuple:
    """Smallest color vector (in sorted-node order) over the graph's automorphisms."""
    auts = _automorphisms(graph)
    col = np.asarray(colors)
    images = np.empty_like(auts)
    images[np.arange(len(auts))[:, None], auts] = col[None, :]
    k = np.lexsort(images.T[::-1])[0]
    return tuple(int(v) for v in images[k])


def enumerate_placements(subgraph, n: int, symmetry_classes=None, h: int | None = None) -> list:
    """One (placement, ancillas) pair per inequivalent placement.

    Vertices are colored 0 (unused), 1 (ancilla) or 2 + class id (input);
    two placements are equivalent when an automorphism maps one coloring to
    the other.  Inputs in one NPN-symmetry class share a color.
    """
    nodes = sorted(subgraph.nodes)
    N = len(nodes)
    if h is None:
        h = N - n
    if n + h > N:
        raise CapacityError(f"{n}+{h} variables do not fit {N} qubits")
    classes = symmetry_classes or [[i] for i in range(n)]
    if sorted(v for c in classes for v in c) != list(range(n)):
        raise DomainError("symmetry classes must partition the inputs")
    class_of = {v: k for k, c in enumerate(classes) for v in c}
    default = 1 if h == N - n else 0
    reps = {canonical_coloring(subgraph, [default] * N)}
    steps = [2 + class_of[v] for v in range(n)]
    if default == 0:
        steps += [1] * h
    for color in steps:
        nxt = set()
        for rep in reps:
            for v in range(N):
                if rep[v] == default:
                    new = list(rep)
                    new[v] = color
                    nxt.add(canonical_coloring(subgraph, new))
        reps = nxt
    out = []
    for rep in sorted(reps):
        placement = [None] * n
        for k, members in enumerate(classes):
            verts = [nodes[v] for v in range(N) if rep[v] == 2 + k]
            for var, q in zip(sorted(members), verts):
                placement[var] = q
        ancillas = tuple(nodes[v] for v in range(N) if rep[v] == 1)
        out.append((tuple(placement), ancillas))
    return out


# ---------------------------------------------------------------------------
# driver


@dataclass
class SynthesisResult:
    penalty: PenaltyFunction
    gap: Fraction
    placement: tuple
    placements_tried: int
    complete: bool
    fallback_used: bool = False
    method: str = "shannon"


def _resolve_subgraph(subgraph):
    if isinstance(subgraph, str):
        return footprint_graph(subgraph)
    return subgraph


def synthesize(function: TruthTable, subgraph, h: int | None = None, require_exact: bool = False,
               countermodel_filter: int | None = 3, method: str = "shannon", use_symmetry: bool = True,
               time_budget: float | None = None, placements=None) -> SynthesisResult:
    """Best penalty over all inequivalent placements, normalized and brute-force verified."""
    graph = _resolve_subgraph(subgraph)
    n = function.arity
    if h is None:
        h = len(graph.nodes) - n
    if placements is None:
        classes = npn_symmetry_classes(function) if use_symmetry and n <= 6 else None
        placements = enumerate_placements(graph, n, classes, h)
    deadline = None if time_budget is None else time.monotonic() + time_budget
    builder = build_ve_system if method == "ve" else build_shannon_system
    best = None
    complete = True
    fallback = False
    for placement, ancillas in placements:
        remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
        lb = best.gap if best is not None else 0
        spec = SynthesisSpec(function, graph, placement, ancillas, require_exact, countermodel_filter)
        try:
            res = maximize_gap(builder(spec), lb, remaining)
        except Infeasible:
            continue
        complete &= res.complete
        report = verify_penalty(res.penalty, function)
        if not report.passed and countermodel_filter is not None:
            fallback = True
            spec = SynthesisSpec(function, graph, placement, ancillas, require_exact, None)
            try:
                res = maximize_gap(builder(spec), lb, remaining)
            except Infeasible:
                continue
            complete &= res.complete
            report = verify_penalty(res.penalty, function)
        if not report.passed:
            raise RuntimeError(f"synthesized penalty failed verification: {report.failures}")
        if best is None or res.gap > best.gap:
            best = SynthesisResult(res.penalty, res.gap, placement, 0, True, method=method)
        if deadline is not None and time.monotonic() > deadline:
            complete = False
            break
    if best is None:
        raise Infeasible(f"no placement admits a penalty for {function.literal()} with h={h}")
    model, c = normalize(best.penalty.model)
    pf = PenaltyFunction(model, best.penalty.inputs, best.penalty.ancillas, best.gap * c, require_exact)
    report = verify_penalty(pf, function)
    if not report.passed:
        raise RuntimeError(f"normalized penalty failed verification: {report.failures}")
    return SynthesisResult(pf, pf.gap, best.placement, len(placements), complete, fallback, method)


# ---------------------------------------------------------------------------
# job files


def load_job(path) -> dict:
    with open(path) as fh:
        job = json.load(fh)
    return {
        "function": parse_tt(job["function"]),
        "footprint": job.get("footprint", "tile"),
        "h": job.get("h"),
        "exact": bool(job.get("exact", False)),
        "filter": job.get("filter", 3),
        "budget": job.get("budget"),
    }


def run_job(job: dict) -> SynthesisResult:
    return synthesize(job["function"], job["footprint"], job["h"], job["exact"], job["filter"],
                      time_budget=job["budget"])
