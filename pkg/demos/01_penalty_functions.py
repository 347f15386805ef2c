"""
Penalty functions from truth tables
===================================

Synthesize maximum-gap Ising penalties for small Boolean relations, check
them by brute force and see why some relations need ancilla qubits.
"""

from quboforge.boolfn import and_relation, npn_canonical, npn_class_count, or_relation, xor_relation
from quboforge.errors import Infeasible
from quboforge.ising_core import complete_graph, verify_penalty
from quboforge.penalty_synth import SynthesisSpec, build_shannon_system, maximize_gap, synthesize

# y <-> (a and b) fits on a triangle of qubits with no ancilla
K3 = complete_graph([0, 1, 2])
res = maximize_gap(build_shannon_system(SynthesisSpec(and_relation(), K3, (0, 1, 2), ())))
print("AND on K3: gap", res.gap)
print("  biases   ", {q: str(v) for q, v in res.penalty.model.biases.items()})
print("  couplings", {e: str(v) for e, v in res.penalty.model.couplings.items()})

# XOR has no penalty on three qubits at all
try:
    maximize_gap(build_shannon_system(SynthesisSpec(xor_relation(), K3, (0, 1, 2), ())))
except Infeasible:
    print("XOR on K3: infeasible")

# ...but a tile with three ancillas is enough
xor = synthesize(xor_relation(), "tile", h=3)
rep = verify_penalty(xor.penalty, xor_relation())
print(f"XOR on a tile, 3 ancillas: gap {rep.true_gap}, verified={rep.passed}")

# OR and AND share one NPN class, so one library cell serves both
print("canonical AND:", npn_canonical(and_relation())[0], " canonical OR:", npn_canonical(or_relation())[0])
for n in range(1, 5):
    print(f"NPN classes of {n}-input functions: {npn_class_count(n)}")
