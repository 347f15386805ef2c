"""CNF/WCNF parsing, and-inverter graphs, cuts and technology mapping."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .boolfn import TruthTable, clause as clause_table, relation
from .errors import ConfigurationError, DomainError, NotFound, ParseError
from .gatelib import GateLibrary, instantiate, match
from .netlist import NetCell, Netlist

# ---------------------------------------------------------------------------
# CNF


@dataclass
class CNFProblem:
    n_vars: int
    clauses: list  # tuples of nonzero ints
    weights: list | None = None  # WCNF only
    top: int | None = None

    def __post_init__(self):
        self.clauses = [tuple(int(l) for l in c) for c in self.clauses]
        for c in self.clauses:
            if not c:
                raise DomainError("empty clause")
            if any(l == 0 or abs(l) > self.n_vars for l in c):
                raise DomainError(f"literal out of range in clause {c}")
        if self.weights is not None:
            self.weights = [int(w) for w in self.weights]
            if len(self.weights) != len(self.clauses) or any(w <= 0 for w in self.weights):
                raise DomainError("weights must be positive, one per clause")

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    def is_hard(self, k: int) -> bool:
        return not self.weighted or (self.top is not None and self.weights[k] >= self.top)

    @property
    def hard_clauses(self) -> list:
        return [c for k, c in enumerate(self.clauses) if self.is_hard(k)]

    @property
    def soft_clauses(self) -> list:
        return [(c, self.weights[k]) for k, c in enumerate(self.clauses) if not self.is_hard(k)]


def _tokens(text: str, kind: str):
    header = None
    body = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError("second header", lineno)
            parts = line.split()
            want = 4 if kind == "cnf" else 5
            if len(parts) != want or parts[1] != kind:
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                header = [int(p) for p in parts[2:]]
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if any(v < 0 for v in header):
                raise ParseError("negative header field", lineno)
            continue
        if header is None:
            raise ParseError("clause before header", lineno)
        for tok in line.split():
            try:
                body.append((int(tok), lineno))
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
    if header is None:
        raise ParseError("missing header")
    return header, body


def parse_dimacs(text: str) -> CNFProblem:
    (n, m), body = _tokens(text, "cnf")
    clauses, cur = [], []
    for v, lineno in body:
        if v == 0:
            if not cur:
                raise ParseError("empty clause", lineno)
            clauses.append(tuple(cur))
            cur = []
        elif abs(v) > n:
            raise ParseError(f"literal {v} exceeds {n} variables", lineno)
        else:
            cur.append(v)
    if cur:
        raise ParseError("last clause is not terminated by 0")
    if len(clauses) != m:
        raise ParseError(f"header announces {m} clauses, found {len(clauses)}")
    return CNFProblem(n, clauses)


def parse_wcnf(text: str) -> CNFProblem:
    (n, m, top), body = _tokens(text, "wcnf")
    clauses, weights, cur = [], [], None
    for v, lineno in body:
        if cur is None:
            if v <= 0:
                raise ParseError(f"weight must be positive, got {v}", lineno)
            weights.append(v)
            cur = []
        elif v == 0:
            if not cur:
                raise ParseError("empty clause", lineno)
            clauses.append(tuple(cur))
            cur = None
        elif abs(v) > n:
            raise ParseError(f"literal {v} exceeds {n} variables", lineno)
        else:
            cur.append(v)
    if cur is not None:
        raise ParseError("last clause is not terminated by 0")
    if len(clauses) != m:
        raise ParseError(f"header announces {m} clauses, found {len(clauses)}")
    return CNFProblem(n, clauses, weights, top)


def write_dimacs(problem: CNFProblem) -> str:
    lines = [f"p cnf {problem.n_vars} {len(problem.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in problem.clauses]
    return "\n".join(lines) + "\n"


def write_wcnf(problem: CNFProblem) -> str:
    lines = [f"p wcnf {problem.n_vars} {len(problem.clauses)} {problem.top}"]
    lines += [f"{w} " + " ".join(map(str, c)) + " 0" for c, w in zip(problem.clauses, problem.weights)]
    return "\n".join(lines) + "\n"


def read_problem(path) -> CNFProblem:
    with open(path) as fh:
        text = fh.read()
    for line in text.splitlines():
        if line.startswith("p"):
            return parse_wcnf(text) if line.split()[1:2] == ["wcnf"] else parse_dimacs(text)
    raise ParseError("missing header")


# ---------------------------------------------------------------------------
# and-inverter graphs
#
# Literals follow the AIGER convention: 2*id + complement.  id 0 is constant
# false (so literal 1 is true), ids 1..n are inputs and and-nodes follow in
# topological order.

FALSE, TRUE = 0, 1


def lit_id(lit: int) -> int:
    return lit >> 1


def lit_neg(lit: int) -> bool:
    return bool(lit & 1)


@dataclass
class AIG:
    n_inputs: int
    nodes: list = field(default_factory=list)  # and-node fan-in literal pairs
    output: int = TRUE
    fold: bool = False  # apply trivial rules while building
    _hash: dict = field(default_factory=dict, repr=False)

    def input(self, i: int, neg: bool = False) -> int:
        if not 1 <= i <= self.n_inputs:
            raise DomainError(f"input {i} out of range")
        return 2 * i + int(neg)

    def node_id(self, k: int) -> int:
        return self.n_inputs + 1 + k

    def fanins(self, nid: int) -> tuple:
        return self.nodes[nid - self.n_inputs - 1]

    def is_and(self, nid: int) -> bool:
        return nid > self.n_inputs

    @property
    def num_ands(self) -> int:
        return len(self.nodes)

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if self.fold:
            if a == FALSE or a == b ^ 1:
                return FALSE
            if a == TRUE or a == b:
                return b
        key = (a, b)
        if key in self._hash:
            return 2 * self._hash[key]
        self.nodes.append(key)
        nid = self.n_inputs + len(self.nodes)
        self._hash[key] = nid
        return 2 * nid

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def and_many(self, lits) -> int:
        """Balanced tree of 2-input ANDs."""
        lits = list(lits)
        if not lits:
            return TRUE
        while len(lits) > 1:
            nxt = [self.and_(lits[i], lits[i + 1]) for i in range(0, len(lits) - 1, 2)]
            if len(lits) % 2:
                nxt.append(lits[-1])
            lits = nxt
        return lits[0]

    def simulate(self, patterns: np.ndarray) -> np.ndarray:
        """Value of every node id for boolean input patterns of shape (n_inputs, m)."""
        m = patterns.shape[1]
        vals = np.zeros((self.n_inputs + 1 + len(self.nodes), m), dtype=bool)
        vals[1:self.n_inputs + 1] = patterns
        for k, (a, b) in enumerate(self.nodes):
            va = vals[a >> 1] ^ bool(a & 1)
            vb = vals[b >> 1] ^ bool(b & 1)
            vals[self.n_inputs + 1 + k] = va & vb
        return vals

    def truth_table(self) -> np.ndarray:
        """Output over all 2^n input assignments (input i is bit i-1 of the index)."""
        n = self.n_inputs
        if n > 22:
            raise DomainError("exhaustive simulation limited to 22 inputs")
        idx = np.arange(1 << n)
        pats = np.array([(idx >> i) & 1 for i in range(n)], dtype=bool).reshape(n, -1)
        vals = self.simulate(pats)
        return vals[self.output >> 1] ^ bool(self.output & 1)

    def evaluate(self, assignment) -> bool:
        """assignment: sequence of n booleans for inputs 1..n."""
        pats = np.array(assignment, dtype=bool).reshape(self.n_inputs, 1)
        vals = self.simulate(pats)
        return bool(vals[self.output >> 1, 0] ^ bool(self.output & 1))

    def check(self):
        for k, (a, b) in enumerate(self.nodes):
            nid = self.n_inputs + 1 + k
            if not (a >> 1 < nid and b >> 1 < nid):
                raise DomainError("and-node fan-in is not earlier in topological order")
        if len(set(self.nodes)) != len(self.nodes):
            raise DomainError("structural hashing violated")


def cnf_to_aig(problem: CNFProblem) -> AIG:
    """Conjunction of the hard clauses; each clause is NOT(AND of negated literals)."""
    aig = AIG(problem.n_vars)
    outs = []
    for c in problem.hard_clauses:
        lits = [aig.input(abs(l), l < 0) for l in c]
        outs.append(aig.and_many([l ^ 1 for l in lits]) ^ 1)
    aig.output = aig.and_many(outs)
    return aig


def _rewrite_and(aig: AIG, a: int, b: int) -> int:
    """One-level rewrites using the fan-ins of and-node children."""
    for x, y in ((a, b), (b, a)):
        if aig.is_and(y >> 1):
            c, d = aig.fanins(y >> 1)
            if not (y & 1):
                if x in (c, d):  # x & (x & d) = x & d
                    return y
                if x ^ 1 in (c, d):  # x & (!x & d) = 0
                    return FALSE
            else:
                if x ^ 1 in (c, d):  # x & !(!x & d) = x
                    return x
                if x == c:  # x & !(x & d) = x & !d
                    return aig.and_(x, d ^ 1)
                if x == d:
                    return aig.and_(x, c ^ 1)
    if aig.is_and(a >> 1) and aig.is_and(b >> 1) and not (a & 1) and not (b & 1):
        fa = set(aig.fanins(a >> 1))
        fb = set(aig.fanins(b >> 1))
        if any(l ^ 1 in fb for l in fa):
            return FALSE
    return aig.and_(a, b)


def simplify_aig(aig: AIG) -> AIG:
    """Structural hashing, constant propagation, one-level rewrites and
    removal of nodes the output does not depend on.  The result computes the
    same function and never has more and-nodes."""
    work = AIG(aig.n_inputs, fold=True)
    remap = {0: FALSE}
    for i in range(1, aig.n_inputs + 1):
        remap[i] = 2 * i

    def tr(lit):
        return remap[lit >> 1] ^ (lit & 1)

    for k, (a, b) in enumerate(aig.nodes):
        nid = aig.n_inputs + 1 + k
        remap[nid] = _rewrite_and(work, tr(a), tr(b))
    out_lit = tr(aig.output)
    result = _compact(work, out_lit)
    if result.num_ands > aig.num_ands:  # rewrites never pay off here; keep the original shape
        return _compact(aig, aig.output)
    return result


def _compact(aig: AIG, out_lit: int) -> AIG:
    """Copy of the output cone only, renumbered topologically."""
    keep = set()
    stack = [out_lit >> 1]
    while stack:
        nid = stack.pop()
        if nid in keep or not aig.is_and(nid):
            continue
        keep.add(nid)
        a, b = aig.fanins(nid)
        stack += [a >> 1, b >> 1]
    new = AIG(aig.n_inputs)
    remap = {i: 2 * i for i in range(aig.n_inputs + 1)}
    for k, (a, b) in enumerate(aig.nodes):
        nid = aig.n_inputs + 1 + k
        if nid in keep:
            na = remap[a >> 1] ^ (a & 1)
            nb = remap[b >> 1] ^ (b & 1)
            remap[nid] = new.and_(na, nb)
    new.output = remap[out_lit >> 1] ^ (out_lit & 1)
    return new


# ---------------------------------------------------------------------------
# cuts


def enumerate_cuts(aig: AIG, k: int) -> dict:
    """All minimal k-feasible cuts per node id, trivial cut {v} included.

    Cuts of an and-node are unions of one cut from each fan-in, filtered so
    that no stored cut contains another.
    """
    if not 1 <= k <= 6:
        raise DomainError("cut size must be between 1 and 6")
    cuts = {0: [frozenset()]}
    for i in range(1, aig.n_inputs + 1):
        cuts[i] = [frozenset([i])]
    for idx, (a, b) in enumerate(aig.nodes):
        nid = aig.n_inputs + 1 + idx
        merged = set()
        for ca in cuts[a >> 1]:
            for cb in cuts[b >> 1]:
                u = ca | cb
                if len(u) <= k:
                    merged.add(u)
        minimal = [c for c in merged if not any(o < c for o in merged)]
        minimal.sort(key=lambda c: (len(c), sorted(c)))
        cuts[nid] = [frozenset([nid])] + [c for c in minimal if c != frozenset([nid])]
    return cuts


def nontrivial_cuts(cuts: dict, nid: int) -> list:
    return [c for c in cuts[nid] if c != frozenset([nid])]


def cut_function(aig: AIG, nid: int, cut) -> TruthTable:
    """Function of node `nid` in terms of the cut leaves in ascending id order."""
    leaves = sorted(cut)
    m = 1 << len(leaves)
    idx = np.arange(m)
    known = {0: np.zeros(m, dtype=bool)}
    for i, leaf in enumerate(leaves):
        known[leaf] = ((idx >> i) & 1).astype(bool)

    def value(x):
        if x in known:
            return known[x]
        if not aig.is_and(x):
            raise DomainError(f"{sorted(cut)} is not a cut of node {nid}")
        a, b = aig.fanins(x)
        v = (value(a >> 1) ^ bool(a & 1)) & (value(b >> 1) ^ bool(b & 1))
        known[x] = v
        return v

    bits = value(nid)
    return TruthTable(len(leaves), int(sum(1 << int(j) for j in np.flatnonzero(bits))))


# ---------------------------------------------------------------------------
# technology mapping


@dataclass
class Mapping:
    aig: AIG
    active: set
    cut: dict  # node id -> frozenset of leaf ids
    cost: dict  # node id -> qubit cost of its cell
    k: int = 3
    history: list = field(default_factory=list)  # total cost after each pass

    @property
    def total_cost(self) -> int:
        return sum(self.cost[v] for v in self.active)

    def is_proper(self) -> bool:
        out = self.aig.output >> 1
        if self.aig.is_and(out) and out not in self.active:
            return False
        used = set()
        for v in self.active:
            for leaf in self.cut[v]:
                if self.aig.is_and(leaf):
                    if leaf not in self.active:
                        return False
                    used.add(leaf)
        return all(v == out or v in used for v in self.active)


class _Mapper:
    def __init__(self, aig: AIG, lib: GateLibrary, k: int):
        self.aig = aig
        self.lib = lib
        self.k = k
        self.cuts = enumerate_cuts(aig, k)
        self._cost_cache: dict = {}
        self.choice = {}
        self.refs = {v: 0 for v in range(aig.n_inputs + 1, aig.n_inputs + 1 + aig.num_ands)}
        for v in self.refs:
            a, b = aig.fanins(v)
            self.choice[v] = frozenset([a >> 1, b >> 1])
            if self.cell_cost(v, self.choice[v]) is None:
                raise ConfigurationError(f"library has no cell for the 2-input AND at node {v}")

    def cell_cost(self, v, cut):
        key = (v, cut)
        if key not in self._cost_cache:
            f = cut_function(self.aig, v, cut)
            cost = None
            if all(_depends(f, i) for i in range(f.arity)):
                try:
                    cell, _ = match(self.lib, relation(f))
                    cost = cell.qubit_cost
                except NotFound:
                    pass
            self._cost_cache[key] = cost
        return self._cost_cache[key]

    def leaves(self, cut):
        return [u for u in cut if self.aig.is_and(u)]

    def ref(self, v, cut) -> int:
        cost = self.cell_cost(v, cut)
        for u in self.leaves(cut):
            self.refs[u] += 1
            if self.refs[u] == 1:
                cost += self.ref(u, self.choice[u])
        return cost

    def deref(self, v, cut) -> int:
        cost = self.cell_cost(v, cut)
        for u in self.leaves(cut):
            self.refs[u] -= 1
            if self.refs[u] == 0:
                cost += self.deref(u, self.choice[u])
        return cost

    def active(self):
        return {v for v, r in self.refs.items() if r > 0}


def _depends(f: TruthTable, i: int) -> bool:
    return any(f.value(x) != f.value(x ^ (1 << i)) for x in range(1 << f.arity))


def tech_map(aig: AIG, lib: GateLibrary, k: int = 3, passes: int = 3) -> Mapping:
    """Start from the trivial mapping (one AND cell per node) and refine each
    active node's cut by exact area: the qubits of the cells a cut newly
    activates.  A pass only accepts cuts that do not raise that area, so the
    total never increases."""
    mp = _Mapper(aig, lib, k)
    out = aig.output >> 1
    history = []
    if aig.is_and(out):
        mp.refs[out] += 1  # the output is referenced by the pin
        mp.ref(out, mp.choice[out])
        history.append(sum(mp.cell_cost(v, mp.choice[v]) for v in mp.active()))
        for _ in range(passes):
            for v in sorted(mp.refs):
                if mp.refs[v] == 0:
                    continue
                cur = mp.choice[v]
                base = mp.deref(v, cur)
                best, best_cost = cur, base
                for c in nontrivial_cuts(mp.cuts, v):
                    if c == cur or mp.cell_cost(v, c) is None:
                        continue
                    a = mp.ref(v, c)
                    mp.deref(v, c)
                    if a < best_cost:
                        best, best_cost = c, a
                mp.choice[v] = best
                mp.ref(v, best)
            history.append(sum(mp.cell_cost(v, mp.choice[v]) for v in mp.active()))
    active = mp.active()
    return Mapping(aig, active, {v: mp.choice[v] for v in active},
                   {v: mp.cell_cost(v, mp.choice[v]) for v in active}, k, history)


# ---------------------------------------------------------------------------
# netlists


def _var(nid: int, aig: AIG) -> str:
    return f"x{nid}" if nid <= aig.n_inputs else f"n{nid}"


def _add_cell(netlist: Netlist, lib, name, tt, variables, weight=1, soft=False, exact=False):
    cell, transform = match(lib, tt, require_exact=exact)
    pf = instantiate(cell, transform)
    netlist.cells.append(NetCell(name, tt, cell, pf, tuple(variables), Fraction(weight), soft))


def mapping_netlist(mapping: Mapping, lib: GateLibrary) -> Netlist:
    """Cells y <-> f(cut) for every active node, plus the output pinned to true.

    The pin is folded into the output node's cell when the restricted table is
    in the library; otherwise a one-qubit unit cell pins the output variable.
    """
    aig = mapping.aig
    nl = Netlist(source_vars={i: f"x{i}" for i in range(1, aig.n_inputs + 1)})
    out_id, out_neg = aig.output >> 1, bool(aig.output & 1)
    if out_id == 0:
        if out_neg:  # constant true: nothing to encode
            return nl
        # constant false: a variable forced both ways keeps the energy above the gap
        _add_cell(nl, lib, "false+", clause_table([True]), ["const"])
        _add_cell(nl, lib, "false-", clause_table([False]), ["const"])
        return nl
    if not aig.is_and(out_id):
        _add_cell(nl, lib, "pin", clause_table([not out_neg]), [_var(out_id, aig)])
        return nl
    for v in sorted(mapping.active):
        leaves = sorted(mapping.cut[v])
        f = cut_function(aig, v, mapping.cut[v])
        variables = [_var(u, aig) for u in leaves]
        if v == out_id:
            # restrict y to the pinned value: the constraint is f (or not f) over the leaves
            pinned = f if not out_neg else f.complement()
            try:
                _add_cell(nl, lib, f"n{v}", pinned, variables)
                continue
            except NotFound:
                pass
        _add_cell(nl, lib, f"n{v}", relation(f), variables + [_var(v, aig)])
        if v == out_id:
            _add_cell(nl, lib, "pin", clause_table([not out_neg]), [_var(v, aig)])
    return nl


def _clause_tt(lits) -> TruthTable:
    return clause_table([l > 0 for l in lits])


def _normalize_clause(c):
    """Sorted distinct literals; None for a tautology."""
    s = set(c)
    if any(-l in s for l in s):
        return None
    return tuple(sorted(s, key=abs))


def group_clauses(clauses, max_vars: int = 5) -> list:
    """Group clauses over the same variable set; groups whose set is contained
    in a larger group's set are absorbed into it."""
    groups: dict = {}
    for c in clauses:
        nc = _normalize_clause(c)
        if nc is None:
            continue
        key = frozenset(abs(l) for l in nc)
        groups.setdefault(key, [])
        if nc not in groups[key]:
            groups[key].append(nc)
    keys = sorted(groups, key=lambda s: (-len(s), sorted(s)))
    out = []
    for key in keys:
        host = next((g for g in out if key <= g[0] and len(g[0]) <= max_vars), None)
        if host is not None:
            host[1].extend(groups[key])
        else:
            out.append([key, list(groups[key])])
    return [(tuple(sorted(k)), cl) for k, cl in out]


def conjunction_table(variables, clauses) -> TruthTable:
    pos = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    bits = 0
    for x in range(1 << n):
        if all(any(((x >> pos[abs(l)]) & 1) == (l > 0) for l in c) for c in clauses):
            bits |= 1 << x
    return TruthTable(n, bits)


def clause_netlist(problem: CNFProblem, lib: GateLibrary, max_group: int = 5) -> Netlist | None:
    """Map each clause group directly to a library constraint; groups without
    a match fall back to one cell per clause.  Returns None if some clause has
    no cell at all."""
    nl = Netlist(source_vars={i: f"x{i}" for i in range(1, problem.n_vars + 1)})
    for gi, (vs, cls) in enumerate(group_clauses(problem.hard_clauses, max_group)):
        names = [f"x{v}" for v in vs]
        tt = conjunction_table(vs, cls)
        if tt.bits == 0:
            _add_cell(nl, lib, f"g{gi}+", clause_table([True]), [names[0]])
            _add_cell(nl, lib, f"g{gi}-", clause_table([False]), [names[0]])
            continue
        if len(vs) <= 6:
            try:
                _add_cell(nl, lib, f"g{gi}", tt, names)
                continue
            except NotFound:
                pass
        for ci, c in enumerate(cls):
            try:
                _add_cell(nl, lib, f"g{gi}.{ci}", _clause_tt(c), [f"x{abs(l)}" for l in c])
            except NotFound:
                return None
    return nl


def maxsat_netlist(problem: CNFProblem, lib: GateLibrary) -> Netlist:
    """Weighted clause netlist.  Hard clauses use ordinary cells with a weight
    exceeding the total soft weight; soft unit clauses use exact unit cells and
    longer soft clauses get a relaxation variable r: hard (r or C), soft (not r)."""
    nl = Netlist(source_vars={i: f"x{i}" for i in range(1, problem.n_vars + 1)}, exact_required=True)
    soft_total = sum(w for _, w in problem.soft_clauses)
    hard_w = soft_total + 1
    relax = 0
    for k, c in enumerate(problem.clauses):
        nc = _normalize_clause(c)
        if nc is None:
            continue
        names = [f"x{abs(l)}" for l in nc]
        if problem.is_hard(k):
            _add_cell(nl, lib, f"h{k}", _clause_tt(nc), names, hard_w)
        elif len(nc) == 1:
            _add_cell(nl, lib, f"s{k}", _clause_tt(nc), names, problem.weights[k], soft=True, exact=True)
        else:
            relax += 1
            r = f"r{relax}"
            lits = [True] + [l > 0 for l in nc]
            _add_cell(nl, lib, f"h{k}", clause_table(lits), [r] + names, hard_w)
            _add_cell(nl, lib, f"s{k}", clause_table([False]), [r], problem.weights[k], soft=True, exact=True)
    return nl


def constraint_netlist(n_vars: int, constraints, lib: GateLibrary, exact: bool = False,
                       overrides: dict | None = None) -> Netlist:
    """Netlist straight from cardinality-style constraints, one cell each.

    `constraints` yields (table, CNF variable ids, weight or None).  A weight
    marks a soft constraint.  `overrides` maps a table literal to a GateCell
    used as is, its inputs in table order.
    """
    overrides = overrides or {}
    nl = Netlist(source_vars={i: f"x{i}" for i in range(1, n_vars + 1)}, exact_required=exact)
    for k, (tt, vs, w) in enumerate(constraints):
        names = [f"x{v}" for v in vs]
        cell = overrides.get(tt.literal())
        if cell is not None:
            nl.cells.append(NetCell(f"c{k}", tt, cell, cell.penalty, tuple(names), Fraction(w or 1), w is not None))
        else:
            _add_cell(nl, lib, f"c{k}", tt, names, w or 1, soft=w is not None, exact=exact)
    nl.notes["mode"] = "constraints"
    return nl


def aig_netlist(problem: CNFProblem, lib: GateLibrary, k: int = 3, passes: int = 3, simplify: bool = True):
    aig = cnf_to_aig(problem)
    if simplify:
        aig = simplify_aig(aig)
    mapping = tech_map(aig, lib, k, passes)
    nl = mapping_netlist(mapping, lib)
    nl.notes.update(mode="aig", and_nodes=aig.num_ands, mapped_cost=mapping.total_cost, history=mapping.history)
    return nl, mapping


def map_problem(problem: CNFProblem, lib: GateLibrary, mode: str = "auto", k: int = 3) -> Netlist:
    """Netlist for a CNF/WCNF problem.  'auto' uses clause groups when every
    clause maps, otherwise the and-inverter route."""
    if problem.weighted:
        nl = maxsat_netlist(problem, lib)
        nl.notes["mode"] = "maxsat"
        return nl
    if mode in ("auto", "clauses"):
        nl = clause_netlist(problem, lib)
        if nl is not None:
            nl.notes["mode"] = "clauses"
            return nl
        if mode == "clauses":
            raise ConfigurationError("some clause has no library cell")
    if mode not in ("auto", "aig"):
        raise DomainError(f"unknown mapping mode {mode!r}")
    nl, _ = aig_netlist(problem, lib, k)
    return nl
