import json
from collections import Counter
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quboforge.benchgen import (
    Constraint, ConstraintInstance, brute_force_costs, gen_maxsat_biased, gen_maxsat_unbiased, gen_sgen_sat,
    maxsat_optimum, shared_pairs, unbiased_2in4_cell,
)
from quboforge.boolfn import exactly
from quboforge.errors import DomainError, GenerationError
from quboforge.ising_core import min_over_high, verify_penalty
from quboforge.logic_frontend import read_problem
from quboforge.sampler_backend import brute_force_maxsat, check_sat, maxsat_cost


def as_list(bits, n):
    return [False] + [bool((bits >> (v - 1)) & 1) for v in range(1, n + 1)]


def test_one_in_five_clause_counts():
    inst = gen_sgen_sat(40, "one-in-five", seed=0)
    cnf = inst.to_cnf()
    lengths = Counter(len(c) for c in cnf.clauses)
    assert lengths == {2: 8 * 10, 5: 2 * 8}
    assert len(cnf.clauses) == 96
    assert all(l > 0 for c in cnf.clauses if len(c) == 5 for l in c)
    assert check_sat(inst.planted, cnf)


@pytest.mark.parametrize("seed", range(5))
def test_two_in_four_partitions(seed):
    inst = gen_sgen_sat(32, "two-in-four", seed)
    assert len(inst.partitions) == 3
    for part in inst.partitions:
        assert len(part) == 8
        assert sorted(v for b in part for v in b) == list(range(1, 33))
        assert all(sum(inst.planted[v] for v in b) == 2 for b in part)
    assert inst.satisfied(inst.planted)
    assert check_sat(inst.planted, inst.to_cnf())


def test_generators_are_deterministic():
    a = gen_sgen_sat(24, "two-in-four", 7)
    b = gen_sgen_sat(24, "two-in-four", 7)
    assert a.sidecar() == b.sidecar()
    assert gen_sgen_sat(24, "two-in-four", 8).sidecar() != a.sidecar()


def test_shuffled_partitions_reduce_shared_pairs():
    inst = gen_sgen_sat(40, "two-in-four", 0, retries=50)
    first, later = inst.partitions[0], inst.partitions[1:]
    for part, hist in zip(later, inst.params["shared_pair_history"]):
        assert hist == sorted(hist, reverse=True) or min(hist) == hist[-1]
        assert shared_pairs(first, part) <= hist[0]


def test_divisibility_errors():
    with pytest.raises(DomainError):
        gen_sgen_sat(30, "two-in-four")
    with pytest.raises(DomainError):
        gen_sgen_sat(32, "one-in-five")
    with pytest.raises(DomainError):
        gen_maxsat_biased(22)
    with pytest.raises(DomainError):
        gen_maxsat_unbiased(18)


def test_constraint_semantics_match_clauses():
    # every constraint's CNF encoding has exactly the constraint's models
    for kind, n in (("atmost1of5", 5), ("atleast1of5", 5), ("exactly1of5", 5), ("exactly2of4", 4),
                    ("exactly1of4", 4), ("unit", 1), ("nunit", 1)):
        c = Constraint(kind, tuple(range(1, n + 1)))
        for bits in range(1 << n):
            a = as_list(bits, n)
            via_cnf = all(any(a[abs(l)] == (l > 0) for l in cl) for cl in c.clauses())
            assert via_cnf == c.satisfied(a)
            assert c.table.value(bits) == c.satisfied(a)


@pytest.mark.parametrize("seed", range(3))
def test_biased_profile(seed):
    inst = gen_maxsat_biased(20, seed, profile="relaxed")
    assert {c.weight for c in inst.constraints} <= {1, 3}
    costs, per_weight = brute_force_costs(inst)
    best = costs.min()
    assert np.all(per_weight[3][costs == best] == 1)
    # no assignment satisfies every weight-3 constraint
    assert per_weight[3].min() >= 1
    assert inst.params["optimum"] == best


def test_unbiased_instance():
    inst = gen_maxsat_unbiased(24, 1)
    assert len(inst.params["removed"]) == 5
    assert len(inst.constraints) == 3 * 6 - 5
    assert sum(c.kind == "exactly1of4" for c in inst.constraints) == 1
    assert {c.weight for c in inst.constraints} == {1}
    opt, _ = maxsat_optimum(inst)
    assert opt >= 1


def test_unbiased_cell_profile():
    pf = unbiased_2in4_cell()
    minima = min_over_high(pf.model, list(pf.inputs), list(pf.ancillas))
    by_sum = {}
    for k, m in enumerate(minima):
        s = sum(1 if (k >> i) & 1 else -1 for i in range(4))
        by_sum.setdefault(abs(s), set()).add(m)
    assert by_sum == {0: {0}, 2: {2}, 4: {8}}
    rep = verify_penalty(pf, exactly(2, 4))
    assert rep.passed and not rep.exact
    assert pf.model.in_range()


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_brute_force_costs_match_direct_evaluation(seed):
    inst = gen_maxsat_unbiased(12, seed % 50, removed=2)
    costs, _ = brute_force_costs(inst)
    rng = np.random.default_rng(seed)
    for bits in rng.integers(0, 1 << 12, size=20):
        assert costs[bits] == inst.cost(as_list(int(bits), 12))


def test_wcnf_costs_match_constraint_costs():
    inst = gen_maxsat_biased(8, 0, profile="relaxed")
    wcnf = inst.to_wcnf()
    extra = wcnf.n_vars - inst.n_vars
    for bits in range(1 << inst.n_vars):
        a = as_list(bits, inst.n_vars)
        # best setting of the relaxation variables
        best = min(maxsat_cost(a + list(r), wcnf) for r in product((False, True), repeat=extra))
        assert best == inst.cost(a)


def test_write_and_read(tmp_path):
    inst = gen_maxsat_biased(12, 1, profile="relaxed")
    paths = inst.write(tmp_path / "b")
    assert paths[0].endswith(".wcnf")
    p = read_problem(paths[0])
    assert p.weighted and brute_force_maxsat(p) == maxsat_optimum(inst)[0]
    again = ConstraintInstance.from_sidecar(json.loads(open(paths[1]).read()))
    assert again.sidecar() == inst.sidecar()


def test_strict_profile_gives_up_cleanly():
    with pytest.raises(GenerationError):
        gen_maxsat_biased(12, 0, max_tries=2, profile="strict")


@pytest.mark.parametrize("seed", range(8))
def test_unbiased_instances_stay_unsatisfiable(seed):
    inst = gen_maxsat_unbiased(16, seed, removed=3)
    assert maxsat_optimum(inst)[0] >= 1
