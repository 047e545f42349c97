"""Symmetric tensor decompositions with points on a prescribed variety, by generating polynomials."""

from .decompose import DecompositionResult, SolverConfig, decompose
from .tensor import Decomposition, SymTensor, max_flattening_rank, norm, rank_one
from .variety import VarietySpec, exp_grank, membership

__version__ = "0.1.0"

__all__ = [
    "Decomposition", "DecompositionResult", "SolverConfig", "SymTensor", "VarietySpec",
    "decompose", "exp_grank", "max_flattening_rank", "membership", "norm", "rank_one",
]
