import json
import random
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from quboforge.boolfn import TruthTable, and_relation, clause, equivalence, npn_symmetry_classes, xor_relation
from quboforge.errors import CapacityError, Infeasible
from quboforge.ising_core import build_chimera, complete_graph, verify_penalty
from quboforge.penalty_synth import (
    SynthesisSpec, build_shannon_system, build_ve_system, canonical_coloring, enumerate_placements,
    footprint_graph, maximize_gap, maximize_gap_exhaustive, load_job, run_job, synthesize,
)

K3 = complete_graph([0, 1, 2])


def brute_orbits(graph, n, classes=None):
    """Count colorings up to automorphism by applying every node permutation that preserves edges."""
    nodes = sorted(graph.nodes)
    edges = set(graph.edges)
    auts = []
    for perm in permutations(nodes):
        m = dict(zip(nodes, perm))
        if all(tuple(sorted((m[u], m[v]))) in edges for u, v in edges):
            auts.append(m)
    classes = classes or [[i] for i in range(n)]
    color = {v: 2 + k for k, c in enumerate(classes) for v in c}
    seen = set()
    for placement in permutations(nodes, n):
        col = {q: 1 for q in nodes}
        for v, q in enumerate(placement):
            col[q] = color[v]
        seen.add(min(tuple(col[m[q]] for q in nodes) for m in auts))
    return len(seen)


def test_and_on_triangle_gap_two():
    res = maximize_gap(build_shannon_system(SynthesisSpec(and_relation(), K3, (0, 1, 2), ())))
    assert res.gap == 2
    assert verify_penalty(res.penalty, and_relation()).passed


def test_xor_on_triangle_infeasible():
    with pytest.raises(Infeasible):
        maximize_gap(build_shannon_system(SynthesisSpec(xor_relation(), K3, (0, 1, 2), ())))
    with pytest.raises(Infeasible):
        maximize_gap(build_ve_system(SynthesisSpec(xor_relation(), K3, (0, 1, 2), ())))


def test_equivalence_on_an_edge():
    g = complete_graph([0, 1])
    res = maximize_gap(build_shannon_system(SynthesisSpec(equivalence(), g, (0, 1), ())))
    assert res.gap == 2
    m = res.penalty.model
    assert m.couplings == {(0, 1): -1} and not m.biases


def test_xor_with_three_ancillas_on_tile():
    res = synthesize(xor_relation(), "tile", h=3)
    assert res.gap == 2
    assert verify_penalty(res.penalty, xor_relation()).passed


def test_placement_counts():
    tile = footprint_graph("tile")
    assert len(enumerate_placements(tile, 8)) == 35
    half = footprint_graph("half-tile")
    assert len(enumerate_placements(half, 4)) == 3
    and4 = TruthTable.from_function(4, lambda a, b, c, d: a and b and c and d)
    assert npn_symmetry_classes(and4) == [[0, 1, 2, 3]]
    assert len(enumerate_placements(tile, 4, npn_symmetry_classes(and4), h=4)) == 3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_placement_counts_match_brute_force_on_half_tile(n):
    half = footprint_graph("half-tile")
    assert len(enumerate_placements(half, n)) == brute_orbits(half, n)


def test_placement_count_matches_brute_force_on_small_chimera():
    g = build_chimera(1, 1, 2)
    for n in (2, 3):
        assert len(enumerate_placements(g, n)) == brute_orbits(g, n)


def test_canonical_coloring_is_invariant():
    tile = footprint_graph("tile")
    base = [2, 3, 1, 1, 4, 1, 1, 1]
    swapped = [1, 1, 3, 2, 1, 4, 1, 1]  # shore permutation plus node relabeling
    assert canonical_coloring(tile, base) == canonical_coloring(tile, swapped)


def random_spec(rng, exact_prob=0.3):
    tile = footprint_graph("tile")
    n = rng.randint(2, 4)
    h = rng.randint(0, min(3, 8 - n))
    tt = TruthTable(n, rng.randrange(1, (1 << (1 << n)) - 1))
    qs = rng.sample(range(8), n + h)
    return SynthesisSpec(tt, tile, qs[:n], qs[n:], rng.random() < exact_prob, None)


def optimum(builder, spec):
    try:
        return maximize_gap(builder(spec)).gap
    except Infeasible:
        return None


@given(st.integers(0, 10**6))
@settings(max_examples=12, deadline=None)
def test_ve_and_shannon_agree(seed):
    spec = random_spec(random.Random(seed))
    assert optimum(build_ve_system, spec) == optimum(build_shannon_system, spec)


@given(st.integers(0, 10**6))
@settings(max_examples=8, deadline=None)
def test_branch_and_bound_matches_exhaustive_profiles(seed):
    rng = random.Random(seed)
    spec = random_spec(rng, 0.0)
    while spec.h > 2 or spec.n > 3:
        spec = random_spec(rng, 0.0)
    system = build_shannon_system(spec)
    try:
        exhaustive = maximize_gap_exhaustive(system)
    except CapacityError:
        return
    assert optimum(build_shannon_system, spec) == exhaustive


def test_synthesized_penalty_is_normalized_and_verified():
    res = synthesize(and_relation(), "half-tile")
    pf = res.penalty
    assert pf.model.in_range()
    assert verify_penalty(pf, and_relation()).passed
    assert res.gap == pf.gap > 0


def test_exact_request_yields_exact_penalty():
    or3 = clause([True] * 3)
    res = synthesize(or3, "tile", require_exact=True)
    rep = verify_penalty(res.penalty, or3)
    assert rep.passed and rep.exact


def test_job_file_round_trip(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"function": and_relation().literal(), "footprint": "half-tile"}))
    res = run_job(load_job(path))
    assert res.gap == synthesize(and_relation(), "half-tile").gap
    assert verify_penalty(res.penalty, and_relation()).passed
