"""Penalty-model encoding of SAT and MaxSAT problems for Chimera-graph Ising samplers."""

from .boolfn import NPNTransform, TruthTable, npn_canonical, parse_tt
from .errors import QuboForgeError
from .gatelib import GateCell, GateLibrary, build_library, load_default_library
from .ising_core import ChimeraGraph, IsingModel, PenaltyFunction, build_chimera, verify_penalty
from .penalty_synth import SynthesisSpec, maximize_gap, synthesize
from .sampler_backend import PipelineConfig, anneal, solve_pipeline

__version__ = "0.1.0"

__all__ = [
    "ChimeraGraph", "GateCell", "GateLibrary", "IsingModel", "NPNTransform", "PenaltyFunction",
    "PipelineConfig", "QuboForgeError", "SynthesisSpec", "TruthTable", "anneal", "build_chimera",
    "build_library", "load_default_library", "maximize_gap", "npn_canonical", "parse_tt",
    "solve_pipeline", "synthesize", "verify_penalty",
]
