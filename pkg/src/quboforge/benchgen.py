"""Crafted benchmark families built from cardinality constraints over
shuffled partitions of the variable set, plus the weighted variants."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .boolfn import TruthTable, at_least, at_most, clause, exactly
from .errors import DomainError, GenerationError
from .gatelib import GateCell
from .ising_core import IsingModel, PenaltyFunction, edge_key
from .logic_frontend import CNFProblem, constraint_netlist, write_dimacs, write_wcnf
from .penalty_synth import footprint_graph

KINDS = {
    "atmost1of5": (5, lambda: at_most(1, 5)),
    "atleast1of5": (5, lambda: at_least(1, 5)),
    "exactly1of5": (5, lambda: exactly(1, 5)),
    "exactly2of4": (4, lambda: exactly(2, 4)),
    "exactly1of4": (4, lambda: exactly(1, 4)),
    "unit": (1, lambda: clause([True])),
    "nunit": (1, lambda: clause([False])),
}

EXHAUSTIVE_LIMIT = 24


@dataclass
class Constraint:
    kind: str
    variables: tuple  # 1-based CNF variable ids
    weight: int | None = None

    def __post_init__(self):
        self.variables = tuple(int(v) for v in self.variables)
        if self.kind not in KINDS:
            raise DomainError(f"unknown constraint kind {self.kind!r}")
        if len(self.variables) != KINDS[self.kind][0]:
            raise DomainError(f"{self.kind} needs {KINDS[self.kind][0]} variables")

    @property
    def table(self) -> TruthTable:
        return KINDS[self.kind][1]()

    def satisfied(self, assignment) -> bool:
        """assignment: mapping or sequence indexed by variable id (index 0 unused)."""
        k = sum(1 for v in self.variables if assignment[v])
        if self.kind == "unit":
            return k == 1
        if self.kind == "nunit":
            return k == 0
        if self.kind == "atmost1of5":
            return k <= 1
        if self.kind == "atleast1of5":
            return k >= 1
        if self.kind in ("exactly1of5", "exactly1of4"):
            return k == 1
        return k == 2

    def clauses(self) -> list:
        """CNF encoding: pairwise at-most-one, a single at-least-one clause,
        and the 3-subset clauses for exactly-2-of-4."""
        vs = self.variables
        if self.kind == "unit":
            return [(vs[0],)]
        if self.kind == "nunit":
            return [(-vs[0],)]
        out = []
        if self.kind in ("atmost1of5", "exactly1of5", "exactly1of4"):
            out += [(-a, -b) for a, b in combinations(vs, 2)]
        if self.kind in ("atleast1of5", "exactly1of5", "exactly1of4"):
            out.append(tuple(vs))
        if self.kind == "exactly2of4":
            out += [tuple(-v for v in t) for t in combinations(vs, 3)]
            out += [tuple(t) for t in combinations(vs, 3)]
        return out

    def to_list(self):
        return [self.kind, list(self.variables), self.weight]


@dataclass
class ConstraintInstance:
    n_vars: int
    constraints: list
    planted: list | None = None  # planted[v] for v in 1..n (index 0 unused)
    params: dict = field(default_factory=dict)
    partitions: list = field(default_factory=list)

    @property
    def weighted(self) -> bool:
        return any(c.weight is not None for c in self.constraints)

    def satisfied(self, assignment) -> bool:
        return all(c.satisfied(assignment) for c in self.constraints)

    def cost(self, assignment) -> int:
        return sum((c.weight or 1) for c in self.constraints if not c.satisfied(assignment))

    def netlist(self, lib, exact: bool = False, overrides: dict | None = None):
        """One library cell per constraint (bypasses the and-inverter route)."""
        rows = [(c.table, c.variables, c.weight) for c in self.constraints]
        return constraint_netlist(self.n_vars, rows, lib, exact, overrides)

    def to_cnf(self) -> CNFProblem:
        cls = [cl for c in self.constraints for cl in c.clauses()]
        return CNFProblem(self.n_vars, cls)

    def to_wcnf(self) -> CNFProblem:
        """Unit constraints become soft unit clauses.  A wider weighted
        constraint gets a relaxation variable r: hard clauses (r or C_i) and a
        soft clause (not r) carrying the weight, so violating the constraint
        costs its weight once."""
        n = self.n_vars
        soft, hard = [], []
        for c in self.constraints:
            w = c.weight or 1
            cls = c.clauses()
            if len(cls) == 1:
                soft.append((cls[0], w))
                continue
            n += 1
            hard += [(n,) + cl for cl in cls]
            soft.append(((-n,), w))
        top = sum(w for _, w in soft) + 1
        return CNFProblem(n, [c for c, _ in soft] + hard, [w for _, w in soft] + [top] * len(hard), top)

    def sidecar(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "constraints": [c.to_list() for c in self.constraints],
            "planted": None if self.planted is None else [int(b) for b in self.planted[1:]],
            "partitions": self.partitions,
            "params": self.params,
        }

    @classmethod
    def from_sidecar(cls, d) -> "ConstraintInstance":
        planted = None if d.get("planted") is None else [False] + [bool(b) for b in d["planted"]]
        return cls(d["n_vars"], [Constraint(k, vs, w) for k, vs, w in d["constraints"]], planted,
                   dict(d.get("params", {})), [list(map(list, p)) for p in d.get("partitions", [])])

    def write(self, stem) -> list:
        """Writes stem.cnf or stem.wcnf plus stem.json; returns the paths."""
        stem = str(stem)
        if self.weighted:
            path = stem + ".wcnf"
            text = write_wcnf(self.to_wcnf())
        else:
            path = stem + ".cnf"
            text = write_dimacs(self.to_cnf())
        with open(path, "w") as fh:
            fh.write(text)
        with open(stem + ".json", "w") as fh:
            json.dump(self.sidecar(), fh, indent=1)
        return [path, stem + ".json"]


# ---------------------------------------------------------------------------
# partitions


def shared_pairs(p, q) -> int:
    """Number of variable pairs that sit in a common block of both partitions."""
    def pairs(part):
        return {frozenset(pr) for block in part for pr in combinations(block, 2)}
    return len(pairs(p) & pairs(q))


def _balanced_partition(true_vars, false_vars, t, f, rng):
    tv, fv = list(true_vars), list(false_vars)
    rng.shuffle(tv)
    rng.shuffle(fv)
    blocks = len(tv) // t
    return [sorted(tv[i * t:(i + 1) * t] + fv[i * f:(i + 1) * f]) for i in range(blocks)]


def _shuffled_partition(true_vars, false_vars, t, f, previous, rng, retries):
    """Random partition with t planted-true and f planted-false variables per
    block, keeping the retry with the fewest pairs shared with earlier
    partitions.  Returns the partition and the running best score history."""
    best, best_score, history = None, None, []
    for _ in range(retries):
        cand = _balanced_partition(true_vars, false_vars, t, f, rng)
        score = sum(shared_pairs(cand, p) for p in previous)
        if best_score is None or score < best_score:
            best, best_score = cand, score
        history.append(best_score)
        if best_score == 0:
            break
    return best, history


def gen_sgen_sat(n: int, variant: str = "two-in-four", seed: int = 0, retries: int = 50) -> ConstraintInstance:
    """Satisfiable crafted instance with a planted solution.

    one-in-five: at-most-one-of-5 over the first partition and at-least-one-of-5
    over two further shuffled partitions; every block holds one planted-true
    variable.  two-in-four: exactly-two-of-4 over three partitions; every block
    holds two planted-true variables.
    """
    if variant == "one-in-five":
        size, t, kinds = 5, 1, ("atmost1of5", "atleast1of5", "atleast1of5")
    elif variant == "two-in-four":
        size, t, kinds = 4, 2, ("exactly2of4",) * 3
    else:
        raise DomainError(f"unknown variant {variant!r}")
    if n <= 0 or n % size:
        raise DomainError(f"n={n} must be a positive multiple of {size}")
    rng = random.Random(f"sgen:{variant}:{n}:{seed}")
    vars_ = list(range(1, n + 1))
    rng.shuffle(vars_)
    n_true = n // size * t
    true_vars, false_vars = sorted(vars_[:n_true]), sorted(vars_[n_true:])
    planted = [False] * (n + 1)
    for v in true_vars:
        planted[v] = True
    partitions, histories = [], []
    for layer in range(3):
        part, hist = _shuffled_partition(true_vars, false_vars, t, size - t, partitions, rng,
                                         1 if layer == 0 else retries)
        partitions.append(part)
        histories.append(hist)
    constraints = [Constraint(kinds[i], block) for i, part in enumerate(partitions) for block in part]
    inst = ConstraintInstance(n, constraints, planted,
                              {"family": "sgen", "variant": variant, "n": n, "seed": seed, "retries": retries,
                               "shared_pairs": [h[-1] for h in histories[1:]],
                               "shared_pair_history": histories[1:]},
                              partitions)
    if not inst.satisfied(planted):
        raise GenerationError("planted solution violates a constraint")
    return inst


# ---------------------------------------------------------------------------
# MaxSAT variants


def brute_force_costs(inst: ConstraintInstance, limit: int = EXHAUSTIVE_LIMIT):
    """Cost of every assignment (bit v-1 of the index is variable v).

    Returns (costs, violated-weight counts per distinct weight) as numpy arrays.
    """
    n = inst.n_vars
    if n > limit:
        raise DomainError(f"{n} variables exceed the exhaustive limit {limit}")
    idx = np.arange(1 << n, dtype=np.int64)
    bits = [((idx >> (v - 1)) & 1).astype(np.int8) for v in range(1, n + 1)]
    weights = sorted({c.weight or 1 for c in inst.constraints})
    per_weight = {w: np.zeros(1 << n, dtype=np.int32) for w in weights}
    for c in inst.constraints:
        s = sum(bits[v - 1] for v in c.variables)
        if c.kind == "unit":
            bad = s != 1
        elif c.kind == "nunit":
            bad = s != 0
        elif c.kind == "atmost1of5":
            bad = s > 1
        elif c.kind == "atleast1of5":
            bad = s < 1
        elif c.kind in ("exactly1of5", "exactly1of4"):
            bad = s != 1
        else:
            bad = s != 2
        per_weight[c.weight or 1] += bad
    costs = sum(w * per_weight[w] for w in weights)
    return costs, per_weight


def maxsat_optimum(inst: ConstraintInstance) -> tuple[int, int]:
    """(optimal cost, number of optimal assignments) by enumeration."""
    costs, _ = brute_force_costs(inst)
    best = int(costs.min())
    return best, int(np.count_nonzero(costs == best))


def _flip_one(constraints, rng):
    pick = rng.randrange(len(constraints))
    c = constraints[pick]
    constraints[pick] = Constraint("exactly1of4", c.variables, c.weight)
    return pick


def gen_maxsat_biased(n: int, seed: int = 0, max_tries: int = 200, min_optima: int = 200,
                      retries: int = 50, profile: str = "strict") -> ConstraintInstance:
    """Two exactly-two-of-4 partitions (one block flipped to exactly-one-of-4)
    at weight 3, plus a weight-1 soft unit on a random literal of every
    variable.

    Regenerated until every optimum violates exactly one weight-3 constraint
    and, with profile="strict", at least n/3 units, with at least `min_optima`
    optima.  profile="relaxed" keeps only the weight-3 condition, which is the
    usable setting below about 32 variables where so many optima never occur.
    The check needs enumeration and is skipped above 24 variables."""
    if profile not in ("strict", "relaxed"):
        raise DomainError(f"unknown profile {profile!r}")
    if n <= 0 or n % 4:
        raise DomainError(f"n={n} must be a positive multiple of 4")
    for attempt in range(max_tries):
        base = gen_sgen_sat(n, "two-in-four", seed * 100003 + attempt, retries)
        rng = random.Random(f"biased:{n}:{seed}:{attempt}")
        keep = sorted(rng.sample(range(3), 2))
        cons = [Constraint("exactly2of4", b, 3) for i in keep for b in base.partitions[i]]
        flipped = _flip_one(cons, rng)
        for v in range(1, n + 1):
            cons.append(Constraint("unit" if rng.random() < 0.5 else "nunit", (v,), 1))
        inst = ConstraintInstance(n, cons, None,
                                  {"family": "maxsat-biased", "n": n, "seed": seed, "attempt": attempt,
                                   "dropped_partition": [i for i in range(3) if i not in keep][0],
                                   "flipped": flipped},
                                  [base.partitions[i] for i in keep])
        if n > EXHAUSTIVE_LIMIT:
            inst.params["profile"] = "unverified"
            return inst
        costs, per_weight = brute_force_costs(inst)
        best = int(costs.min())
        opt = costs == best
        heavy, light = per_weight[3][opt], per_weight[1][opt]
        n_opt = int(np.count_nonzero(opt))
        if not np.all(heavy == 1):
            continue
        if profile == "relaxed" or (np.all(light >= n / 3) and n_opt >= min_optima):
            inst.params.update(profile=f"verified-{profile}", optimum=best, optima=n_opt,
                               min_light_violations=int(light.min()))
            return inst
    hint = " (try profile='relaxed')" if profile == "strict" else ""
    raise GenerationError(f"no instance with the required optimum profile after {max_tries} tries{hint}")


def gen_maxsat_unbiased(n: int, seed: int = 0, removed: int = 5, retries: int = 50) -> ConstraintInstance:
    """Three exactly-two-of-4 partitions, one block flipped to exactly-one-of-4,
    `removed` blocks of another partition dropped, all weights equal."""
    if n <= 0 or n % 4:
        raise DomainError(f"n={n} must be a positive multiple of 4")
    if n // 4 < removed:
        raise DomainError(f"a partition of {n} variables has fewer than {removed} blocks")
    base = gen_sgen_sat(n, "two-in-four", seed, retries)
    rng = random.Random(f"unbiased:{n}:{seed}")
    cons = [Constraint("exactly2of4", b, 1) for part in base.partitions for b in part]
    flipped = _flip_one(cons, rng)
    blocks = n // 4
    # dropping blocks from the flipped block's own partition would let the
    # other two partitions agree again, so the removal uses another partition
    part = rng.choice([p for p in range(3) if p != flipped // blocks])
    candidates = [part * blocks + j for j in range(blocks)]
    drop = set(rng.sample(candidates, removed))
    kept = [c for i, c in enumerate(cons) if i not in drop]
    return ConstraintInstance(n, kept, None,
                              {"family": "maxsat-unbiased", "n": n, "seed": seed, "flipped": flipped,
                               "removed_partition": part, "removed": sorted(drop)},
                              base.partitions)


def unbiased_2in4_cell() -> PenaltyFunction:
    """Fixed 2-in-4 penalty laid out on a tile (inputs x1..x4, ancillas a1, a2).

    The couplings form a bipartite graph: x1, x3, a2 sit on the vertical
    shore and x2, x4, a1 on the horizontal one.  Not exact: the minimum over
    ancillas is 2 when one input is off balance and 8 when all four agree.
    """
    x1, x3, a2 = 0, 1, 2
    x2, x4, a1 = 4, 5, 6
    quad = {(x1, x2): 1, (x1, x4): 1, (x3, x2): 1, (x3, x4): 1,
            (x1, a1): -1, (a2, x2): -1, (x3, a1): 1, (a2, x4): 1}
    model = IsingModel(footprint_graph("tile"), Fraction(4), {},
                       {edge_key(*k): Fraction(v) for k, v in quad.items()})
    return PenaltyFunction(model, (x1, x2, x3, x4), (a1, a2), Fraction(2), False)


def unbiased_2in4_gatecell() -> GateCell:
    """The fixed cell wrapped for netlists; its table is exactly-two-of-4."""
    return GateCell(exactly(2, 4), "tile", unbiased_2in4_cell(), Fraction(2), False)


GENERATORS = {
    "sgen": gen_sgen_sat,
    "maxsat-biased": gen_maxsat_biased,
    "maxsat-unbiased": gen_maxsat_unbiased,
}
