"""Hand-written penalty models used as fixed reference points.

Local tile numbering: qubits 0-3 form one shore, 4-7 the other.
"""
from fractions import Fraction

from quboforge.ising_core import IsingModel, PenaltyFunction, build_chimera, complete_graph

H = Fraction(1, 2)
TILE = build_chimera(1, 1)


def and_clique() -> PenaltyFunction:
    """y <-> (a and b) on a triangle, no ancilla."""
    g = complete_graph([0, 1, 2])
    m = IsingModel(g, Fraction(3, 2), {0: -H, 1: -H, 2: 1}, {(0, 1): H, (0, 2): -1, (1, 2): -1})
    return PenaltyFunction(m, (0, 1, 2), (), 2)


def and_tile() -> PenaltyFunction:
    """y <-> (a and b) with one ancilla; a=0, anc=1, b=4, y=5."""
    m = IsingModel(TILE, Fraction(5, 2), {0: -H, 4: -H, 5: 1}, {(0, 4): H, (0, 5): -1, (1, 4): -1, (1, 5): -1})
    return PenaltyFunction(m, (0, 4, 5), (1,), 2)


def or_tile() -> PenaltyFunction:
    """y <-> (a or b): the AND tile form with the input-variable signs toggled."""
    m = IsingModel(TILE, Fraction(5, 2), {0: H, 4: H, 5: -1}, {(0, 4): H, (0, 5): -1, (1, 4): 1, (1, 5): 1})
    return PenaltyFunction(m, (0, 4, 5), (1,), 2)


def xor_tile() -> PenaltyFunction:
    """y <-> (a xor b) with three ancillas; a, b, y on 0, 1, 2 and ancillas on 4, 5, 6."""
    x1, x2, x3, a1, a2, a3 = 0, 1, 2, 4, 5, 6
    m = IsingModel(TILE, 5, {x3: 1, a2: 1, a3: -1}, {
        (x1, a1): 1, (x1, a2): -1, (x1, a3): -1, (x2, a1): -1, (x2, a2): -1, (x2, a3): -1,
        (x3, a2): 1, (x3, a3): -1})
    return PenaltyFunction(m, (x1, x2, x3), (a1, a2, a3), 2)


def combined_terms():
    """Expected sum for x4 <-> (x3 and (x1 xor x2)) split as AND(x3, y', x4), XOR(x1, x2, y), chain y = y'.

    Keys are variable names; ancillas a1..a4.
    """
    offset = Fraction(17, 2)
    linear = {"x3": -H, "x4": 1, "y": 1, "y'": -H, "a2": 1, "a3": -1}
    quad = {("x1", "a1"): 1, ("x1", "a2"): -1, ("x1", "a3"): -1, ("x2", "a1"): -1, ("x2", "a2"): -1,
            ("x2", "a3"): -1, ("x3", "x4"): -1, ("x3", "y'"): H, ("x4", "a4"): -1, ("y", "a2"): 1,
            ("y", "a3"): -1, ("y", "y'"): -1, ("y'", "a4"): -1}
    return offset, linear, quad
