"""Unique information of a target about one predictor relative to another.

Minimizes ``I_Q(T:X|Y)`` over all joint distributions ``Q`` that share the
``(T,X)`` and ``(T,Y)`` marginals of ``P`` and reports the optimizer, its
location, and whether it is unique.
"""
from .distributions import JointDist3, entropy_and_mi_suite, load, validate
from .errors import UipidError
from .kernels import BACKEND
from .solver import PidDecomposition, SolveOptions, SolveReport, decompose, solve, solve_all_binary, solve_generic

__all__ = [
    "BACKEND",
    "JointDist3",
    "PidDecomposition",
    "SolveOptions",
    "SolveReport",
    "UipidError",
    "decompose",
    "entropy_and_mi_suite",
    "load",
    "solve",
    "solve_all_binary",
    "solve_generic",
    "validate",
]

__version__ = "0.1.0"
