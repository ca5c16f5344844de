"""Tripartite coherent-entangled states: analytic and truncated-Fock simulation."""

from tricoherent.config import DEFAULT_TOLERANCES, Tolerances
from tricoherent.exceptions import (
    BranchAmbiguityError,
    ConvergenceError,
    DivergentIntegralError,
    IllConditionedError,
    LeakageError,
    TricoherentError,
)

__all__ = [
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "TricoherentError",
    "ConvergenceError",
    "DivergentIntegralError",
    "BranchAmbiguityError",
    "IllConditionedError",
    "LeakageError",
]

__version__ = "0.1.0"
