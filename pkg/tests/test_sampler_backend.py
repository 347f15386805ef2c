import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quboforge.errors import ConfigurationError
from quboforge.ising_core import IsingModel, build_chimera, complete_graph, energy, exact_ground_states
from quboforge.logic_frontend import CNFProblem
from quboforge.placeroute import DecodeMap
from quboforge.sampler_backend import (
    CompiledModel, PipelineConfig, SampleSet, anneal, beta_schedule, brute_force_maxsat, check_sat, decode,
    decode_spins, embed, energy_cost_identity, exact_solve, maxsat_cost, polish_ancillas, sample_seed,
    solve_pipeline, source_assignment,
)

SMALL = dict(rows=4, cols=4)


def dm_for(chains, polarity=None):
    return DecodeMap(chains, polarity or {}, [], {})


def test_single_bias_goes_low():
    m = IsingModel(complete_graph([0]), 0, {0: -2})
    s = anneal(m, num_samples=5, sweeps=50, seed=1)
    assert s.spins.tolist() == [[1]] and s.energies.tolist() == [-2.0]
    assert len(s) == 5


def test_antiferro_pair_shows_both_ground_states():
    m = IsingModel(complete_graph([0, 1]), 0, {}, {(0, 1): 1})
    s = anneal(m, num_samples=40, sweeps=30, seed=0)
    assert sorted(tuple(r) for r in s.spins.tolist()) == [(-1, 1), (1, -1)]
    assert set(s.energies.tolist()) == {-1.0}


def test_annealing_is_deterministic():
    m = IsingModel(build_chimera(1, 1), 0, {0: 1, 5: -1}, {(0, 4): 1, (1, 4): -1, (1, 5): 1})
    a = anneal(m, 8, 20, seed=3)
    b = anneal(m, 8, 20, seed=3)
    assert np.array_equal(a.spins, b.spins) and np.array_equal(a.occurrences, b.occurrences)
    assert sample_seed(3, 0) != sample_seed(3, 1)


def test_beta_schedule():
    b = beta_schedule(5, (0.1, 10))
    assert b[0] == pytest.approx(0.1) and b[-1] == pytest.approx(10)
    assert np.all(np.diff(b) > 0)
    assert beta_schedule(1).tolist() == [10.0]


@st.composite
def chimera_models(draw):
    g = build_chimera(1, 2)
    vals = st.fractions(min_value=-1, max_value=1, max_denominator=4)
    biases = {q: draw(vals) for q in sorted(g.nodes) if draw(st.booleans())}
    couplings = {e: draw(vals) for e in sorted(g.edges) if draw(st.booleans())}
    return IsingModel(g, draw(vals), biases, couplings)


@given(chimera_models(), st.integers(0, 2**16))
@settings(max_examples=40, deadline=None)
def test_compiled_energies_match_exact(model, seed):
    cm = CompiledModel.of(model)
    if not cm.qubits:
        return
    rng = np.random.default_rng(seed)
    rows = rng.choice(np.array([-1, 1], dtype=np.int8), size=(4, len(cm.qubits)))
    got = cm.energies(rows)
    for r, e in zip(rows, got):
        assert e == pytest.approx(float(energy(model, dict(zip(cm.qubits, r.tolist())))))


@given(chimera_models())
@settings(max_examples=15, deadline=None)
def test_annealing_reaches_ground_energy_on_tiny_models(model):
    if model.is_zero():
        return
    e0, _ = exact_ground_states(model)
    s = anneal(model, 10, 300, seed=0)
    assert s.energies.min() == pytest.approx(float(e0))
    assert exact_solve(model).energies.tolist()[0] == pytest.approx(float(e0))


def test_sampleset_dedupes():
    s = SampleSet.from_rows([0, 1], [[1, 1], [-1, 1], [1, 1]], [0.0, 1.0, 0.0])
    assert s.spins.tolist() == [[1, 1], [-1, 1]]
    assert s.occurrences.tolist() == [2, 1]
    assert s.lowest() == ({0: 1, 1: 1}, 0.0)


def test_majority_vote_and_ties():
    dm = dm_for({"x": [3, 5, 9], "y": [2, 7]})
    d = decode_spins({3: 1, 5: 1, 9: -1, 2: 1, 7: -1}, dm)
    assert d.values == {"x": True, "y": True}
    assert sorted(d.broken) == ["x", "y"]
    d = decode_spins({3: -1, 5: -1, 9: -1, 2: -1, 7: 1}, dm)
    assert d.values == {"x": False, "y": False}
    assert d.broken == ["y"]


def test_polarity_is_applied():
    dm = dm_for({"x": [0, 1]}, {1: -1})
    d = decode_spins({0: 1, 1: -1}, dm)
    assert d.values == {"x": True} and d.broken == []


def test_decode_break_rates():
    dm = dm_for({"x": [0, 1]})
    s = SampleSet.from_rows([0, 1], [[1, 1], [1, -1], [1, -1], [-1, -1]], [0, 0, 0, 0])
    out, rates = decode(s, dm)
    assert rates == {"x": 0.5}
    dm.source_vars = {1: "x"}
    assert source_assignment(out[0].values, dm, 2) == [False, True, False]


def test_sat_checks():
    cnf = CNFProblem(2, [(1, -2), (2,)])
    assert check_sat([False, True, True], cnf)
    assert not check_sat([False, False, True], cnf)
    w = CNFProblem(2, [(1, 2), (-1,), (-2,)], [10, 3, 1], top=10)
    assert maxsat_cost([False, True, False], w) == 3
    assert maxsat_cost([False, False, False], w) == math.inf
    assert brute_force_maxsat(w) == 1


@st.composite
def wcnfs(draw):
    n = draw(st.integers(1, 6))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    clauses = draw(st.lists(st.lists(lit, min_size=1, max_size=3, unique_by=abs), min_size=1, max_size=8))
    weights = draw(st.lists(st.integers(1, 5), min_size=len(clauses), max_size=len(clauses)))
    return CNFProblem(n, clauses, weights, top=5)


@given(wcnfs())
@settings(max_examples=50, deadline=None)
def test_brute_force_maxsat_matches_loop(w):
    best = min(maxsat_cost([False] + list(bits), w) for bits in product((False, True), repeat=w.n_vars))
    got = brute_force_maxsat(w)
    if best == math.inf:
        assert got == np.iinfo(np.int64).max
    else:
        assert got == best


def test_polish_ancillas_minimizes_cell_energy(clause_lib):
    p = CNFProblem(4, [(1, 2, 3), (-1, 4), (-3, -4)])
    _, nl, emb, model, dm, _ = embed(p, clause_lib, PipelineConfig(**SMALL))
    rng = np.random.default_rng(0)
    for _ in range(5):
        spins = {q: int(rng.choice((-1, 1))) for q in model.qubits}
        polished = polish_ancillas(spins, model, dm)
        assert energy(model, polished) <= energy(model, spins)
        # no ancilla assignment of any single cell does better
        for _, m in dm.cells:
            anc = [q for q in m.values() if q in set(dm.ancillas)]
            for bits in product((-1, 1), repeat=len(anc)):
                trial = dict(polished) | dict(zip(anc, bits))
                assert energy(model, trial) >= energy(model, polished)


def test_ground_states_decode_to_models(clause_lib):
    # small enough for exact enumeration of the embedded model
    for p in (CNFProblem(3, [(1, 2), (-1, 3), (-2, -3)]), CNFProblem(3, [(1, -2, 3), (-1, 2)])):
        _, nl, emb, model, dm, _ = embed(p, clause_lib, PipelineConfig(**SMALL))
        assert emb.report.passed
        assert len(model.qubits) <= 24
        e0, states = exact_ground_states(model)
        assert e0 == 0
        for s in states:
            a = source_assignment(decode_spins(s, dm).values, dm, p.n_vars)
            assert check_sat(a, p)


def test_pipeline_sat(clause_lib):
    p = CNFProblem(5, [(1, 2, 3), (-1, 4), (-2, -4, 5), (-3, -5), (2, 5)])
    r = solve_pipeline(p, clause_lib, PipelineConfig(**SMALL, sweeps=500, seed=1))
    assert r.status == "sat" and r.exit_code == 0
    assert check_sat(r.assignment, p)
    assert r.energy == 0
    assert r.to_dict()["status"] == "sat"


def test_pipeline_unsat_reports_unknown(clause_lib):
    p = CNFProblem(1, [(1,), (-1,)])
    r = solve_pipeline(p, clause_lib, PipelineConfig(**SMALL, samples=4, sweeps=200))
    assert r.status == "unknown" and r.exit_code == 2
    exact_min = Fraction(r.stats["exact_min_energy"])
    assert exact_min > 0
    assert r.energy >= exact_min


def test_pipeline_maxsat_identity(clause_lib):
    w = CNFProblem(3, [(1, 2), (-1,), (-2,), (3,), (-3,)], [9, 2, 1, 1, 1], top=9)
    r = solve_pipeline(w, clause_lib, PipelineConfig(**SMALL, sweeps=500, seed=2))
    assert r.stats["optimum"] == brute_force_maxsat(w) == 2
    assert r.status == "optimal" and r.cost == 2
    checked, holding = energy_cost_identity(r)
    assert checked >= 1 and checked == holding


def test_config_validation():
    with pytest.raises(ConfigurationError):
        PipelineConfig(samples=0).validate()
    with pytest.raises(ConfigurationError):
        PipelineConfig(alpha=1.0).validate()
    with pytest.raises(ConfigurationError):
        PipelineConfig(beta_range=(1.0, 0.5)).validate()


def test_constraint_without_cell_uses_clause_form(aig_lib):
    from quboforge.benchgen import Constraint, ConstraintInstance

    inst = ConstraintInstance(4, [Constraint("exactly1of4", (1, 2, 3, 4)), Constraint("unit", (2,))])
    r = solve_pipeline(inst, aig_lib, PipelineConfig(rows=8, cols=8, sweeps=2000))
    assert r.stats["mapping"] == "aig"
    assert r.status == "sat" and r.assignment[1:] == [False, True, False, False]
