"""Exact computations with DG bimodules, twisted complexes and P^n-functors."""

from .exact import ExactMatrix, Field, NoSolution, companion_matrix, kernel_basis, kron, rank, rref, solve
from .pnfun import FAIL, INDETERMINATE, PASS, ConditionReport, FunctorData, PnStructure, check_pn, p_twist

__version__ = "0.1.0"

__all__ = [
    "ConditionReport",
    "ExactMatrix",
    "FAIL",
    "Field",
    "FunctorData",
    "INDETERMINATE",
    "NoSolution",
    "PASS",
    "PnStructure",
    "check_pn",
    "companion_matrix",
    "kernel_basis",
    "kron",
    "p_twist",
    "rank",
    "rref",
    "solve",
]
