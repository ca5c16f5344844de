"""Numerical tolerances shared by every module.

All defaults live here so a run can echo its effective settings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    #: relative stopping tolerance of the Taylor propagator in ``fock.evolve``
    expm_rel: float = 1e-12
    #: max Taylor terms per sub-step before ``ConvergenceError``
    expm_max_terms: int = 200
    #: unitarity check for passive transforms
    unitary: float = 1e-12
    #: symmetry check for quadratic coefficient matrices
    symmetric: float = 1e-12
    #: distance from the negative real axis treated as a branch crossing
    branch: float = 1e-12
    #: ``squeeze_collective`` refuses results with ||F||_2 above 1 + this
    squeeze_guard: float = 1e-9
    #: default boundary-mass ceiling for Fock pipelines
    leakage: float = 1e-6
    #: sub-block headroom k: assertions use occupations <= N - k
    headroom: int = 4

    def as_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
