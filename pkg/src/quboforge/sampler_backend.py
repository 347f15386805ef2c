"""Classical samplers for assembled Ising models, decoding of chained samples
and SAT/MaxSAT checks, plus the end-to-end pipeline driver."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from numba import njit

from .errors import ConfigurationError, DomainError, NotFound, QuboForgeError, RoutingError
from .ising_core import IsingModel, build_chimera, exact_ground_states, fraction_str
from .logic_frontend import CNFProblem, map_problem
from .placeroute import DecodeMap, assemble, place_and_route

log = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# simulated annealing


@dataclass
class CompiledModel:
    qubits: list
    offset: float
    h: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    J: np.ndarray

    @classmethod
    def of(cls, model: IsingModel) -> "CompiledModel":
        qubits = model.qubits
        index = {q: i for i, q in enumerate(qubits)}
        n = len(qubits)
        h = np.zeros(n)
        for q, v in model.biases.items():
            h[index[q]] = float(v)
        nbrs = [[] for _ in range(n)]
        for (a, b), v in model.couplings.items():
            i, j = index[a], index[b]
            nbrs[i].append((j, float(v)))
            nbrs[j].append((i, float(v)))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        indices = np.array([j for x in nbrs for j, _ in x], dtype=np.int64)
        J = np.array([v for x in nbrs for _, v in x], dtype=np.float64)
        return cls(qubits, float(model.offset), h, indptr, indices, J)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Float energies of a (samples x qubits) spin array."""
        s = spins.astype(np.float64)
        e = self.offset + s @ self.h
        rows = np.repeat(np.arange(len(self.qubits)), np.diff(self.indptr))
        e += 0.5 * np.einsum("sk,k,sk->s", s[:, rows], self.J, s[:, self.indices])
        return e


@njit(cache=True)
def _anneal_one(h, indptr, indices, J, betas, seed):
    np.random.seed(seed)
    n = h.shape[0]
    s = np.empty(n, dtype=np.int8)
    for i in range(n):
        s[i] = 1 if np.random.random() < 0.5 else -1
    field = h.copy()
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            field[i] += J[k] * s[indices[k]]
    for b in range(betas.shape[0]):
        beta = betas[b]
        order = np.random.permutation(n)
        for t in range(n):
            i = order[t]
            # energy change of flipping spin i
            delta = -2.0 * s[i] * field[i]
            if delta <= 0.0 or np.random.random() < math.exp(-beta * delta):
                s[i] = -s[i]
                two = 2.0 * s[i]
                for k in range(indptr[i], indptr[i + 1]):
                    field[indices[k]] += two * J[k]
    return s


def beta_schedule(sweeps: int, beta_range=(0.1, 10.0)) -> np.ndarray:
    if sweeps < 1:
        raise DomainError("sweeps must be >= 1")
    b0, b1 = beta_range
    if sweeps == 1:
        return np.array([float(b1)])
    return np.geomspace(b0, b1, sweeps)


def sample_seed(seed: int, index: int) -> int:
    return ((int(seed) * 1_000_003) ^ int(index)) % (2 ** 31 - 1)


@dataclass
class SampleSet:
    qubits: list
    spins: np.ndarray  # distinct samples, rows in first-seen order
    energies: np.ndarray
    occurrences: np.ndarray
    seed: int = 0
    model: IsingModel | None = None

    def __len__(self):
        return int(self.occurrences.sum())

    def records(self):
        for row, e, n in zip(self.spins, self.energies, self.occurrences):
            yield {q: int(v) for q, v in zip(self.qubits, row)}, float(e), int(n)

    def lowest(self):
        k = int(np.argmin(self.energies))
        return {q: int(v) for q, v in zip(self.qubits, self.spins[k])}, float(self.energies[k])

    @classmethod
    def from_rows(cls, qubits, rows, energies, seed=0, model=None) -> "SampleSet":
        rows = np.asarray(rows, dtype=np.int8).reshape(len(rows), len(qubits))
        seen: dict = {}
        order = []
        for k, r in enumerate(rows):
            key = r.tobytes()
            if key in seen:
                seen[key][1] += 1
            else:
                seen[key] = [k, 1]
                order.append(key)
        idx = [seen[k][0] for k in order]
        return cls(list(qubits), rows[idx], np.asarray(energies, dtype=float)[idx],
                   np.array([seen[k][1] for k in order]), seed, model)


def anneal(model: IsingModel, num_samples: int = 10, sweeps: int = 1000, schedule=(0.1, 10.0), seed: int = 0,
           compiled: CompiledModel | None = None) -> SampleSet:
    """Metropolis single-spin-flip annealing, independent restart per sample.

    Each sweep visits the spins in a fresh random order.
    `schedule` is a (beta_start, beta_end) pair for a geometric ramp over
    `sweeps` passes, or an explicit array of betas.
    """
    if num_samples < 1:
        raise DomainError("num_samples must be >= 1")
    cm = compiled or CompiledModel.of(model)
    betas = np.asarray(schedule, dtype=float) if len(schedule) != 2 else beta_schedule(sweeps, schedule)
    rows = [sample_one(cm, betas, sample_seed(seed, k)) for k in range(num_samples)]
    rows = np.array(rows, dtype=np.int8).reshape(num_samples, len(cm.qubits))
    return SampleSet.from_rows(cm.qubits, rows, cm.energies(rows), seed, model)


def sample_one(cm: CompiledModel, betas, seed: int) -> np.ndarray:
    if not cm.qubits:
        return np.zeros(0, dtype=np.int8)
    return _anneal_one(cm.h, cm.indptr, cm.indices, cm.J, betas, seed)


def exact_solve(model: IsingModel) -> SampleSet:
    """All ground states by enumeration (small models only)."""
    e, states = exact_ground_states(model)
    qubits = model.qubits
    rows = [[st[q] for q in qubits] for st in states]
    return SampleSet.from_rows(qubits, rows, [float(e)] * len(rows), 0, model)


# ---------------------------------------------------------------------------
# decoding


@dataclass
class Decoded:
    values: dict  # logical variable -> bool
    broken: list  # variables whose chain disagreed


def decode_spins(spins: dict, dm: DecodeMap) -> Decoded:
    """Majority vote per chain after polarity; a tie takes the lowest-index qubit."""
    values, broken = {}, []
    for v, qs in dm.chains.items():
        votes = [spins[q] * dm.polarity.get(q, 1) for q in qs]
        total = sum(votes)
        if total > 0:
            values[v] = True
        elif total < 0:
            values[v] = False
        else:
            low = min(qs)
            values[v] = spins[low] * dm.polarity.get(low, 1) > 0
        if abs(total) != len(votes):
            broken.append(v)
    return Decoded(values, broken)


def decode(samples: SampleSet, dm: DecodeMap):
    """Decoded assignments per distinct sample and per-chain break rates."""
    out = []
    breaks = {v: 0 for v in dm.chains}
    total = 0
    for spins, e, n in samples.records():
        d = decode_spins(spins, dm)
        out.append(d)
        total += n
        for v in d.broken:
            breaks[v] += n
    rates = {v: b / total for v, b in breaks.items()} if total else {}
    return out, rates


def source_assignment(values: dict, dm: DecodeMap, n_vars: int) -> list:
    """Index-by-variable Boolean list (index 0 unused); unused variables are False."""
    a = [False] * (n_vars + 1)
    for i, name in dm.source_vars.items():
        if 1 <= i <= n_vars and name in values:
            a[i] = bool(values[name])
    return a


def polish_ancillas(spins: dict, model: IsingModel, dm: DecodeMap) -> dict:
    """Set every cell's ancillas to their best values given the other spins.

    Ancillas only couple inside their own cell, so cells are independent and
    each is solved by enumeration.
    """
    out = dict(spins)
    anc = set(dm.ancillas)
    by_cell = []
    for _, m in dm.cells:
        group = sorted(q for q in m.values() if q in anc)
        if group:
            by_cell.append(group)
    if not by_cell:
        return out
    neigh: dict = {}
    for (a, b), v in model.couplings.items():
        if a in anc:
            neigh.setdefault(a, []).append((b, v))
        if b in anc:
            neigh.setdefault(b, []).append((a, v))
    for group in by_cell:
        gs = set(group)
        best, best_e = None, None
        for bits in product((-1, 1), repeat=len(group)):
            local = dict(zip(group, bits))
            e = Fraction(0)
            for q, s in local.items():
                e += model.biases.get(q, 0) * s
                for r, v in neigh.get(q, ()):
                    if r in gs:
                        if q < r:
                            e += v * s * local[r]
                    else:
                        e += v * s * out[r]
            if best_e is None or e < best_e:
                best, best_e = local, e
        out.update(best)
    return out


# ---------------------------------------------------------------------------
# checks


def check_sat(assignment, cnf: CNFProblem) -> bool:
    return all(any(assignment[abs(l)] == (l > 0) for l in c) for k, c in enumerate(cnf.clauses)
               if cnf.is_hard(k))


def maxsat_cost(assignment, wcnf: CNFProblem):
    """Violated soft weight; math.inf when a hard clause fails."""
    cost = 0
    for k, c in enumerate(wcnf.clauses):
        if any(assignment[abs(l)] == (l > 0) for l in c):
            continue
        if wcnf.is_hard(k):
            return math.inf
        cost += wcnf.weights[k]
    return cost


def brute_force_maxsat(wcnf: CNFProblem, limit: int = 22):
    """Optimal cost over all assignments of a small WCNF."""
    if wcnf.n_vars > limit:
        raise DomainError("too many variables for enumeration")
    n = wcnf.n_vars
    idx = np.arange(1 << n, dtype=np.int64)
    cost = np.zeros(1 << n, dtype=np.int64)
    hard_bad = np.zeros(1 << n, dtype=bool)
    for k, c in enumerate(wcnf.clauses):
        sat = np.zeros(1 << n, dtype=bool)
        for l in c:
            bit = ((idx >> (abs(l) - 1)) & 1).astype(bool)
            sat |= bit if l > 0 else ~bit
        if wcnf.is_hard(k):
            hard_bad |= ~sat
        else:
            cost += np.where(sat, 0, wcnf.weights[k])
    cost = np.where(hard_bad, np.iinfo(np.int64).max, cost)
    return int(cost.min())


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PipelineConfig:
    rows: int = 16
    cols: int = 16
    shore: int = 4
    disabled: tuple = ()
    library: str | None = None
    mapping: str = "auto"
    place_seed: int = 0
    place_budget: int | None = None
    pattern: str = "grid"
    route_iterations: int = 64
    alpha: float = 2.0
    detail_iterations: int = 8
    rounds: int = 3
    chain_weight: float | None = None  # default 1 for SAT, 4 for MaxSAT
    samples: int = 20
    sweeps: int = 2000
    beta_range: tuple = (0.1, 10.0)
    seed: int = 0
    stop_early: bool = True
    exact_cells: bool | None = None  # default: exact cells for weighted problems
    unbiased_cells: bool = False

    def validate(self):
        if self.rows < 1 or self.cols < 1 or self.shore < 1:
            raise ConfigurationError("graph dimensions must be positive")
        if self.samples < 1 or self.sweeps < 1:
            raise ConfigurationError("samples and sweeps must be >= 1")
        if self.route_iterations < 1 or self.alpha <= 1:
            raise ConfigurationError("routing needs iterations >= 1 and alpha > 1")
        if self.chain_weight is not None and self.chain_weight <= 0:
            raise ConfigurationError("chain weight must be positive")
        if self.beta_range[0] <= 0 or self.beta_range[1] < self.beta_range[0]:
            raise ConfigurationError("beta range must be positive and increasing")
        return self


@dataclass
class SampleReport:
    energy: Fraction
    intact: bool
    satisfied: bool
    cost: object  # int, or math.inf for a hard violation
    assignment: list


@dataclass
class PipelineResult:
    status: str  # "sat", "optimal", "best" or "unknown"
    assignment: list | None
    cost: object
    energy: Fraction | None
    samples: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    model: IsingModel | None = None
    decode_map: DecodeMap | None = None
    embedding: object = None

    @property
    def exit_code(self) -> int:
        return 0 if self.status in ("sat", "optimal") else 2

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "assignment": None if self.assignment is None else [int(b) for b in self.assignment[1:]],
            "cost": None if self.cost is None else (str(self.cost) if self.cost == math.inf else self.cost),
            "energy": None if self.energy is None else fraction_str(self.energy),
            "samples": [{"energy": fraction_str(s.energy), "intact": s.intact, "satisfied": s.satisfied,
                         "cost": str(s.cost) if s.cost == math.inf else s.cost} for s in self.samples],
            "stats": self.stats,
        }


class Problem:
    """Uniform view over CNF, WCNF and constraint instances."""

    def __init__(self, problem):
        self.raw = problem
        self.constraints = hasattr(problem, "constraints")
        self.n_vars = problem.n_vars
        self.weighted = problem.weighted

    def netlist(self, lib, cfg: PipelineConfig):
        exact = self.weighted if cfg.exact_cells is None else cfg.exact_cells
        if self.constraints:
            overrides = None
            if cfg.unbiased_cells:
                from .benchgen import unbiased_2in4_gatecell

                cell = unbiased_2in4_gatecell()
                overrides = {cell.canonical_tt.literal(): cell}
            try:
                return self.raw.netlist(lib, exact, overrides)
            except NotFound:
                if self.weighted:
                    raise
                # no cell for some constraint: map its clause expansion instead
                log.info("constraint cell missing, mapping the clause form")
                return map_problem(self.raw.to_cnf(), lib, cfg.mapping)
        return map_problem(self.raw, lib, cfg.mapping)

    def satisfied(self, a) -> bool:
        return self.raw.satisfied(a) if self.constraints else check_sat(a, self.raw)

    def cost(self, a):
        if self.constraints:
            return self.raw.cost(a)
        return maxsat_cost(a, self.raw)


def problem_to_dict(problem) -> dict:
    if hasattr(problem, "constraints"):
        return {"kind": "constraints", **problem.sidecar()}
    return {"kind": "cnf", "n_vars": problem.n_vars, "clauses": [list(c) for c in problem.clauses],
            "weights": problem.weights, "top": problem.top}


def problem_from_dict(d: dict):
    if d["kind"] == "constraints":
        from .benchgen import ConstraintInstance

        return ConstraintInstance.from_sidecar(d)
    return CNFProblem(d["n_vars"], d["clauses"], d.get("weights"), d.get("top"))


def embed(problem, lib, cfg: PipelineConfig):
    """Netlist, embedding and assembled model for a problem."""
    cfg.validate()
    view = problem if isinstance(problem, Problem) else Problem(problem)
    t = time.perf_counter()
    nl = view.netlist(lib, cfg)
    t_map = time.perf_counter() - t
    graph = build_chimera(cfg.rows, cfg.cols, cfg.shore, cfg.disabled)
    t = time.perf_counter()
    emb = place_and_route(nl, graph, cfg.place_seed, cfg.rounds, cfg.pattern, cfg.place_budget,
                          cfg.route_iterations, cfg.alpha, cfg.detail_iterations)
    t_pr = time.perf_counter() - t
    if not emb.report.passed:
        raise RoutingError("embedding failed verification: " + "; ".join(emb.report.violations[:3]))
    weighted = view.weighted
    lam = cfg.chain_weight if cfg.chain_weight is not None else (4 if weighted else 1)
    model, dm = assemble(nl, emb.placement, emb.routing, Fraction(lam).limit_denominator(1000), weighted)
    stats = {"cells": len(nl.cells), "netlist_qubits": nl.qubit_cost(), "model_qubits": len(model.qubits),
             "hpwl": emb.placement.hpwl, "max_chain": emb.report.max_chain, "rounds": emb.rounds,
             "chain_weight": lam, "mapping": nl.notes.get("mode"), "time_map": round(t_map, 3),
             "time_place_route": round(t_pr, 3), "routing": emb.routing.stats}
    return view, nl, emb, model, dm, stats


def sample_and_check(view: Problem, model: IsingModel, dm: DecodeMap, cfg: PipelineConfig, stats=None):
    """Anneal sample by sample, polish ancillas, decode and check.

    Every zero-energy sample must decode to a satisfying assignment; a
    violation raises.  SAT problems stop at the first satisfying sample when
    cfg.stop_early is set.
    """
    stats = {} if stats is None else stats
    cm = CompiledModel.of(model)
    betas = beta_schedule(cfg.sweeps, cfg.beta_range)
    reports = []
    t = time.perf_counter()
    breaks = 0
    for k in range(cfg.samples):
        row = sample_one(cm, betas, sample_seed(cfg.seed, k))
        spins = {q: int(v) for q, v in zip(cm.qubits, row)}
        spins = polish_ancillas(spins, model, dm)
        energy = model.energy(spins)
        d = decode_spins(spins, dm)
        a = source_assignment(d.values, dm, view.n_vars)
        ok = view.satisfied(a) if not view.weighted else False
        cost = view.cost(a) if view.weighted else (0 if ok else None)
        if energy == 0 and not view.weighted and not ok:
            raise QuboForgeError("zero-energy sample decodes to a non-satisfying assignment", "sampler")
        breaks += bool(d.broken)
        reports.append(SampleReport(energy, not d.broken, ok, cost, a))
        if ok and cfg.stop_early:
            break
    stats.update(samples_drawn=len(reports), broken_samples=breaks, time_sample=round(time.perf_counter() - t, 3),
                 sweeps=cfg.sweeps)
    return reports


def solve_pipeline(problem, lib, config: PipelineConfig | None = None, optimum=None) -> PipelineResult:
    """Map, embed, sample and check.

    SAT: status "sat" with the first satisfying assignment, otherwise
    "unknown" (a heuristic sampler never proves unsatisfiability).  MaxSAT:
    the lowest-cost decoded assignment; status "optimal" when it matches a
    supplied (or, for at most 20 variables, enumerated) optimum, else "best".
    """
    cfg = config or PipelineConfig()
    view, nl, emb, model, dm, stats = embed(problem, lib, cfg)
    reports = sample_and_check(view, model, dm, cfg, stats)
    result = PipelineResult("unknown", None, None, None, reports, stats, model, dm, emb)
    if not view.weighted:
        sat = [r for r in reports if r.satisfied]
        if sat:
            result.status, result.assignment, result.cost, result.energy = "sat", sat[0].assignment, 0, sat[0].energy
        else:
            best = min(reports, key=lambda r: r.energy)
            result.energy = best.energy
            stats["min_sample_energy"] = fraction_str(best.energy)
            if len(model.qubits) <= 20:
                e, _ = exact_ground_states(model)
                stats["exact_min_energy"] = fraction_str(e)
        return result
    best = min(reports, key=lambda r: (r.cost, r.energy))
    result.assignment, result.cost, result.energy = best.assignment, best.cost, best.energy
    if optimum is None and view.n_vars <= 20:
        if view.constraints:
            from .benchgen import maxsat_optimum

            optimum = maxsat_optimum(view.raw)[0]
        else:
            optimum = brute_force_maxsat(view.raw)
    stats["optimum"] = optimum
    result.status = "optimal" if optimum is not None and best.cost == optimum else "best"
    stats["energy_per_weight"] = fraction_str(dm.scale)
    return result


def energy_cost_identity(result: PipelineResult) -> tuple[int, int]:
    """(checked, holding): intact samples whose energy equals scale x cost."""
    checked = holding = 0
    for r in result.samples:
        if r.intact and r.cost != math.inf:
            checked += 1
            holding += r.energy == result.decode_map.scale * r.cost
    return checked, holding


def write_results(result: PipelineResult, path):
    with open(path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=1)
