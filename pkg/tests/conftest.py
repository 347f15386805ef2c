from fractions import Fraction
from itertools import product

import pytest

from quboforge.boolfn import assignment_index
from quboforge.gatelib import build_library, preset
from quboforge.ising_core import GenericGraph, IsingModel, build_chimera


def brute_min_over_ancillas(model, inputs, ancillas):
    """Dictionary-based reference for min over ancillas; independent of the vectorized path."""
    out = {}
    for xs in product((-1, 1), repeat=len(inputs)):
        best = None
        for a in product((-1, 1), repeat=len(ancillas)):
            spins = dict(zip(inputs, xs)) | dict(zip(ancillas, a))
            e = model.offset
            e += sum(v * spins[q] for q, v in model.biases.items())
            e += sum(v * spins[i] * spins[j] for (i, j), v in model.couplings.items())
            best = e if best is None else min(best, e)
        out[assignment_index(xs)] = best
    return out


def graph_from_terms(biases, couplings):
    nodes = set(biases)
    for i, j in couplings:
        nodes |= {i, j}
    return GenericGraph(frozenset(nodes), frozenset(couplings))


def model_from_terms(offset, biases, couplings, graph=None):
    graph = graph or graph_from_terms(biases, couplings)
    return IsingModel(graph, Fraction(offset), {q: Fraction(v) for q, v in biases.items()},
                      {e: Fraction(v) for e, v in couplings.items()})


@pytest.fixture(scope="session")
def clause_lib():
    """Single-qubit, half-tile and tile OR cells; cheap enough to synthesize per session."""
    return build_library(preset("clauses")[:3])


@pytest.fixture(scope="session")
def chimera4():
    return build_chimera(4, 4)


@pytest.fixture(scope="session")
def aig_lib(clause_lib):
    """2-input relations plus small OR cells: enough for the and-inverter route."""
    return clause_lib.merge(build_library(preset("relations2")))
