"""Beam-splitter and displacement pipeline producing the tripartite state.

A single-mode squeezed input ``exp(-(s/2) a1_dag^2)|000>`` passes two
beam splitters, ``B12(theta)`` then ``B23(phi)``, which rotate the squeezed
direction onto ``c = (cos theta, sin theta cos phi, sin theta sin phi)``.
Three single-mode displacements then supply the linear part.

Beam-splitter convention: ``B_ij(theta) = exp[-theta (a_i_dag a_j - a_i a_j_dag)]``
sends ``a_i_dag -> cos a_i_dag + sin a_j_dag`` and
``a_j_dag -> cos a_j_dag - sin a_i_dag``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from tricoherent.config import DEFAULT_TOLERANCES, Tolerances
from tricoherent.exceptions import LeakageError
from tricoherent.fock import (
    FockOperator,
    FockState,
    LeakageReport,
    evolve,
    inner,
    interior_mask,
    ladder,
    total_photon_mask,
)
from tricoherent.gaussian import EQState, displace, fidelity, fock_project, passive_transform
from tricoherent.states import CESParams, ModeWeights, coherent_part, tripartite_ces

Backend = Literal["analytic", "fock"]


@dataclass(frozen=True)
class ProtocolPlan:
    theta: float
    phi: float
    eps: tuple[complex, complex, complex]
    params: CESParams

    @classmethod
    def from_params(cls, params: CESParams) -> "ProtocolPlan":
        theta, phi = protocol_angles(params.weights)
        return cls(theta, phi, tuple(complex(e) for e in displacement_values(params)), params)

    @property
    def direction(self) -> np.ndarray:
        return cascade_direction(self.theta, self.phi)


def _check_pair(i: int, j: int, n_modes: int) -> None:
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    for k in (i, j):
        if not 0 <= k < n_modes:
            raise ValueError(f"mode {k} out of range")


def bs_generator(i: int, j: int, theta: float, cutoff: int, n_modes: int = 3) -> FockOperator:
    """Fock-space generator ``-theta (a_i_dag a_j - a_i a_j_dag)``."""
    _check_pair(i, j, n_modes)
    ai, aj = ladder(i, "lower", cutoff, n_modes), ladder(j, "lower", cutoff, n_modes)
    return -theta * (ai.dag() @ aj - ai @ aj.dag())


def bs_block(i: int, j: int, theta: float, n_modes: int = 3) -> np.ndarray:
    """Mode transform of ``B_ij(theta)`` for :func:`passive_transform` (column k = image of ``a_k_dag``)."""
    _check_pair(i, j, n_modes)
    c, s = math.cos(theta), math.sin(theta)
    T = np.eye(n_modes, dtype=complex)
    T[i, i], T[j, i] = c, s
    T[i, j], T[j, j] = -s, c
    return T


def protocol_angles(weights: ModeWeights) -> tuple[float, float]:
    """Beam-splitter angles that rotate mode 1 onto the collective direction."""
    mu, nu, tau, lam = weights.mu, weights.nu, weights.tau, weights.lam
    cos_t = np.clip(mu / (math.sqrt(3) * lam), -1.0, 1.0)
    cos_p = np.clip(nu / math.hypot(nu, tau), -1.0, 1.0)
    return math.acos(cos_t), math.acos(cos_p)


def cascade_direction(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi)])


def squeezed_input(s: float, n_modes: int = 3) -> EQState:
    """``exp(-(s/2) a1_dag^2)|0...0>``."""
    F = np.zeros((n_modes, n_modes))
    F[0, 0] = -s
    return EQState(0.0, np.zeros(n_modes), F)


def cascade_target(theta: float, phi: float, s: float) -> EQState:
    c = cascade_direction(theta, phi)
    return EQState(0.0, np.zeros(3), -s * np.outer(c, c))


@dataclass(frozen=True)
class CascadeResult:
    state: EQState | FockState
    target: EQState | FockState
    fidelity: float
    max_param_error: float | None = None
    leakage: LeakageReport | None = None


def _fock_fidelity(a: FockState, b: FockState) -> float:
    return abs(inner(a, b)) ** 2 / (a.norm2() * b.norm2())


def _check_leakage(report: LeakageReport, threshold: float) -> None:
    if report.boundary_mass > threshold:
        raise LeakageError(f"boundary mass {report.boundary_mass:.3g} exceeds {threshold:.3g}")


def _fock_input(s: float, cutoff: int) -> tuple[FockState, LeakageReport]:
    """Normalized squeezed input restricted to at most ``cutoff`` photons in total.

    The mixers are exact on that sector. The discarded tail of the input is
    reported as a (negative) norm defect.
    """
    full = fock_project(squeezed_input(s), cutoff)
    exact_norm2 = 1 / math.sqrt(1 - s * s)
    kept = full.restrict_total(cutoff)
    return kept * (1 / math.sqrt(exact_norm2)), LeakageReport(0.0, kept.norm2() / exact_norm2 - 1)


def _mixer_leakage(state: FockState, report: LeakageReport) -> LeakageReport:
    """Leakage of a passive mixer step.

    A truncated mixer generator is exact on tuples with at most ``cutoff``
    photons in total: if one mode sits at the cutoff, every other mode is
    empty and nothing can be raised past it. Only edge tuples outside that
    sector can carry truncation error, so only their mass is reported.
    """
    edge = ~interior_mask(state.n_modes, state.cutoff, 1)
    outside = ~total_photon_mask(state.n_modes, state.cutoff, state.cutoff)
    mass = float(np.sum(np.abs(state.vector[edge & outside]) ** 2))
    return LeakageReport(mass, report.norm_defect)


def _fock_cascade(state: FockState, theta: float, phi: float, tol: Tolerances) -> tuple[FockState, LeakageReport]:
    out, rep1 = evolve(bs_generator(0, 1, theta, state.cutoff), state, tol)
    rep1 = _mixer_leakage(out, rep1)
    out, rep2 = evolve(bs_generator(1, 2, phi, state.cutoff), out, tol)
    return out, rep1.combine(_mixer_leakage(out, rep2))


def cascade_identity_check(
    weights: ModeWeights,
    s: float,
    backend: Backend = "analytic",
    cutoff: int = 10,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CascadeResult:
    """Run the two beam splitters on the squeezed input and compare with the rotated squeezer."""
    theta, phi = protocol_angles(weights)
    target = cascade_target(theta, phi, s)
    if backend == "analytic":
        T = bs_block(1, 2, phi) @ bs_block(0, 1, theta)
        out = passive_transform(squeezed_input(s), T, tolerances)
        err = max(abs(out.log_prefactor - target.log_prefactor), float(np.max(np.abs(out.F - target.F))), float(np.max(np.abs(out.w))))
        return CascadeResult(out, target, fidelity(out, target), err)
    if backend == "fock":
        start, dropped = _fock_input(s, cutoff)
        out, rep = _fock_cascade(start, theta, phi, tolerances)
        # compare on the sector where the truncated mixers are exact
        tgt = fock_project(target, cutoff).restrict_total(cutoff)
        return CascadeResult(out, tgt, _fock_fidelity(out, tgt), None, dropped.combine(rep))
    raise ValueError(f"unknown backend {backend!r}")


def displacement_values(params: CESParams) -> np.ndarray:
    """Displacements turning the rotated squeezed state into the target state.

    ``eps = e(beta, gamma) + x m / (lambda (1 + s))``. Because ``e`` is
    orthogonal to ``m``, displacing ``exp(-(s/(6 lambda^2)) (m . a_dag)^2)|0>``
    by ``eps`` gives the linear part ``e + x m / lambda`` for every ``s``.
    At ``s = 1`` the collective share is ``x m / (2 lambda)``.
    """
    wts = params.weights
    return coherent_part(params) + params.x * wts.m / (wts.lam * (1 + params.s))


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    backend: str
    leakage: LeakageReport | None = None
    cutoff: int | None = None
    #: largest difference of (w, F) against the target (analytic backend); the
    #: prefactor is left out because for s < 1 the two differ by a constant
    #: normalization
    max_param_error: float | None = None


def run_protocol(
    params: CESParams,
    backend: Backend = "analytic",
    cutoff: int = 12,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    leakage_threshold: float | None = None,
) -> tuple[EQState | FockState, FidelityReport]:
    """Beam splitters then ``D1 D2 D3``; compared with the constructor by normalized fidelity.

    At ``s = 1`` the states are not normalizable; the analytic backend then
    reports ``fidelity = nan`` and the parameter-level error only.
    """
    plan = ProtocolPlan.from_params(params)
    target = tripartite_ces(params)
    if backend == "analytic":
        T = bs_block(1, 2, plan.phi) @ bs_block(0, 1, plan.theta)
        out = passive_transform(squeezed_input(params.s), T, tolerances)
        out = displace(out, np.array(plan.eps))
        err = max(float(np.max(np.abs(out.w - target.w))), float(np.max(np.abs(out.F - target.F))))
        fid = fidelity(out, target) if params.s < 1.0 else math.nan
        return out, FidelityReport(fid, backend, max_param_error=err)
    if backend == "fock":
        threshold = tolerances.leakage if leakage_threshold is None else leakage_threshold
        state, dropped = _fock_input(params.s, cutoff)
        state, report = _fock_cascade(state, plan.theta, plan.phi, tolerances)
        report = dropped.combine(report)
        for mode in (2, 1, 0):
            eps = plan.eps[mode]
            a = ladder(mode, "lower", cutoff)
            gen = eps * a.dag() - eps.conjugate() * a
            state, rep = evolve(gen, state, tolerances)
            report = report.combine(rep)
        _check_leakage(report, threshold)
        tgt = fock_project(target, cutoff)
        return state, FidelityReport(_fock_fidelity(state, tgt), backend, report, cutoff)
    raise ValueError(f"unknown backend {backend!r}")
