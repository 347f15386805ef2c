"""
Weighted MaxSAT and the energy/cost identity
============================================

With exact penalty cells every intact sample's energy is the normalization
factor times the weighted cost of its decoded assignment, so the annealer
minimizes MaxSAT cost directly.
"""

from quboforge.benchgen import gen_maxsat_biased, maxsat_optimum
from quboforge.gatelib import load_default_library
from quboforge.sampler_backend import PipelineConfig, energy_cost_identity, solve_pipeline

lib = load_default_library()
inst = gen_maxsat_biased(12, seed=0, profile="relaxed")
opt, n_opt = maxsat_optimum(inst)
print(f"{inst.n_vars} variables, {len(inst.constraints)} weighted constraints; optimum {opt} ({n_opt} optimal assignments)")

result = solve_pipeline(inst, lib, PipelineConfig(rows=8, cols=8, samples=20, sweeps=2000, seed=0), optimum=opt)
print("status:", result.status, " best cost:", result.cost)

scale = result.decode_map.scale
for s in sorted(result.samples, key=lambda s: s.energy)[:6]:
    tag = f"cost {s.cost}, scale*cost = {scale * s.cost}" if s.intact else "broken chain"
    print(f"  energy {s.energy}: {tag}")

checked, holding = energy_cost_identity(result)
print(f"identity holds on {holding} of {checked} intact samples")
