from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from quboforge.boolfn import NPNTransform, TruthTable, and_relation, clause, or_relation, xor_relation
from quboforge.errors import NotFound
from quboforge.gatelib import (
    GateLibrary, build_library, check_library, has_match, instantiate, lookup, match, preset,
)
from quboforge.ising_core import verify_penalty


def test_clause_cells(clause_lib):
    assert check_library(clause_lib) == []
    for n in (1, 2, 3):
        cell, pf = lookup(clause_lib, clause([True] * n))
        assert verify_penalty(pf, clause([True] * n)).passed
    assert clause_lib.max_arity == 3


@given(st.lists(st.booleans(), min_size=1, max_size=3), st.data())
@settings(max_examples=40, deadline=None)
def test_any_signed_clause_instantiates(clause_lib, signs, data):
    # permuting and negating inputs must still give a valid penalty for that exact table
    tt = clause(signs)
    perm = data.draw(st.permutations(range(len(signs))))
    tt = NPNTransform(perm).apply(tt)
    cell, pf = lookup(clause_lib, tt)
    rep = verify_penalty(pf, tt)
    assert rep.passed
    assert rep.true_gap >= cell.gap


def test_relations_cover_and_or(aig_lib):
    for tt in (and_relation(), or_relation(), xor_relation()):
        assert has_match(aig_lib, tt)
        cell, pf = lookup(aig_lib, tt)
        assert verify_penalty(pf, tt).passed
    cell, _ = match(aig_lib, and_relation())
    assert cell.footprint == "half-tile"  # fewest qubits preferred


def test_missing_class_raises(clause_lib):
    with pytest.raises(NotFound):
        match(clause_lib, xor_relation())
    assert not has_match(clause_lib, xor_relation())
    with pytest.raises(NotFound):
        match(clause_lib, clause([True]), require_exact=False, footprint="tile")


def test_library_round_trip(tmp_path, clause_lib):
    path = tmp_path / "lib.json"
    clause_lib.save(path)
    again = GateLibrary.load(path)
    assert sorted(c.to_dict()["tt"] for c in again) == sorted(c.to_dict()["tt"] for c in clause_lib)
    assert list(again) == list(clause_lib)


def test_merge_returns_new_library(clause_lib):
    empty = GateLibrary({}, {})
    merged = empty.merge(clause_lib)
    assert len(empty) == 0
    assert len(merged) == len(clause_lib)


def test_unit_cell_is_exact(clause_lib):
    cell, pf = lookup(clause_lib, clause([False]), require_exact=True)
    rep = verify_penalty(pf, clause([False]))
    assert rep.exact and cell.footprint == "qubit"


def test_presets_are_named():
    names = [r.name for r in preset("default")]
    assert len(names) == len(set(names))
    with pytest.raises(Exception):
        preset("nope")
