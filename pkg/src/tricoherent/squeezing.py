"""Collective three-mode squeezing ``S = exp[(zeta/2)(R^2 - R_dag^2)]``.

Conventions: ``eta = e^zeta``, ``R_dag = d . a_dag`` with
``d = (mu, nu, tau)/(sqrt(3) lambda)``. With this sign ``S`` rescales the
position label of a tripartite state, ``S|b, g, x> = eta^(-1/2) |b, g, x/eta>``,
and ``S^-1|000>`` carries ``+tanh(zeta)/2 R_dag^2``.
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
    collective_lower,
    commutator,
    evolve,
    expectation,
    identity,
    interior_mask,
    ladder,
    propagate,
    quadrature,
    total_photon_mask,
    variance,
)
from tricoherent.gaussian import EQState, FirstOrderOperator, squeeze_collective, squeezed_vacuum
from tricoherent.states import CESParams, ModeWeights, tripartite_ces


@dataclass(frozen=True)
class SqueezeParams:
    eta: float
    weights: ModeWeights

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive, got {self.eta}")

    @classmethod
    def from_zeta(cls, zeta: float, weights: ModeWeights) -> "SqueezeParams":
        return cls(math.exp(zeta), weights)

    @property
    def zeta(self) -> float:
        return math.log(self.eta)

    @property
    def sech(self) -> float:
        return 2 * self.eta / (1 + self.eta**2)

    @property
    def tanh(self) -> float:
        return (self.eta**2 - 1) / (1 + self.eta**2)

    def identity_defects(self) -> tuple[float, float]:
        """Differences between the eta forms and the hyperbolic functions of ``zeta``."""
        return abs(self.sech - 1 / math.cosh(self.zeta)), abs(self.tanh - math.tanh(self.zeta))


@dataclass(frozen=True)
class CollectiveMode:
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=complex)
        if not math.isclose(float(np.linalg.norm(d)), 1.0, abs_tol=1e-12):
            raise ValueError("collective direction must be a unit vector")
        object.__setattr__(self, "d", d)

    @classmethod
    def from_weights(cls, weights: ModeWeights) -> "CollectiveMode":
        return cls(weights.direction)

    def lower(self, cutoff: int) -> FockOperator:
        """``R = sum_i conj(d_i) a_i``."""
        return collective_lower(self.d.conj(), cutoff)


@dataclass(frozen=True)
class FockSqueezer:
    """Fock-space squeezer in exponential and in factored form."""

    params: SqueezeParams
    cutoff: int
    tolerances: Tolerances = DEFAULT_TOLERANCES

    @property
    def R(self) -> FockOperator:
        return CollectiveMode.from_weights(self.params.weights).lower(self.cutoff)

    @property
    def generator(self) -> FockOperator:
        R = self.R
        Rd = R.dag()
        return (0.5 * self.params.zeta) * (R @ R - Rd @ Rd)

    def apply(self, vectors: np.ndarray, inverse: bool = False) -> np.ndarray:
        gen = self.generator.matrix
        return propagate(-gen if inverse else gen, vectors, self.tolerances.expm_rel, self.tolerances.expm_max_terms)

    def apply_factored(self, vectors: np.ndarray) -> np.ndarray:
        """``sech^(1/2) exp(-t/2 R_dag^2) exp(ln(sech) R_dag R) exp(t/2 R^2)`` applied right to left."""
        R = self.R
        Rd = R.dag()
        t, sech = self.params.tanh, self.params.sech
        tol, terms = self.tolerances.expm_rel, self.tolerances.expm_max_terms
        out = propagate((0.5 * t) * (R @ R).matrix, vectors, tol, terms)
        out = propagate(math.log(sech) * (Rd @ R).matrix, out, tol, terms)
        out = propagate((-0.5 * t) * (Rd @ Rd).matrix, out, tol, terms)
        return math.sqrt(sech) * out


def squeeze_operator(params: SqueezeParams, backend: Literal["analytic", "fock"] = "analytic", cutoff: int = 20):
    """The squeezer as an EQState transform (``"analytic"``) or a :class:`FockSqueezer` (``"fock"``)."""
    if backend == "analytic":
        d = params.weights.direction
        return lambda state: squeeze_collective(state, d, params.zeta)
    if backend == "fock":
        return FockSqueezer(params, cutoff)
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class FormComparison:
    max_abs_error: float
    n_vectors: int
    max_photons: int


def compare_forms(params: SqueezeParams, cutoff: int = 20, max_photons: int = 6) -> FormComparison:
    """Exponential vs factored squeezer on the block of tuples with at most ``max_photons`` photons.

    Both the input basis states and the compared output entries are limited
    to ``max_photons`` photons in total. The factored form is exact there
    (its first factor only lowers, the last only raises); the exponential
    form carries the truncation error of the full space.
    """
    sq = FockSqueezer(params, cutoff)
    dim = (cutoff + 1) ** 3
    idx = np.flatnonzero(total_photon_mask(3, cutoff, max_photons))
    block = np.zeros((dim, idx.size), dtype=complex)
    block[idx, np.arange(idx.size)] = 1.0
    a = sq.apply(block)
    b = sq.apply_factored(block)
    err = float(np.max(np.abs(a[idx] - b[idx])))
    return FormComparison(err, idx.size, max_photons)


def su11_check(weights: ModeWeights, cutoff: int) -> dict[str, float]:
    """Defects of ``[R, R_dag] = 1`` and ``[R^2/2, R_dag^2/2] = R_dag R + 1/2``.

    Interior defects are taken on tuples where every mode has headroom 1
    (first relation) or 2 (second); boundary defects are the same norms on
    the complementary tuples, where truncation is expected to show.
    """
    R = CollectiveMode.from_weights(weights).lower(cutoff)
    Rd = R.dag()
    one = identity(3, cutoff)
    c1 = (commutator(R, Rd) - one).dense()
    c2 = (commutator(0.5 * (R @ R), 0.5 * (Rd @ Rd)) - (Rd @ R + 0.5 * one)).dense()
    in1 = interior_mask(3, cutoff, 1)
    in2 = interior_mask(3, cutoff, 2)

    def block(mat, rows, cols):
        sub = mat[np.ix_(rows, cols)]
        return float(np.max(np.abs(sub))) if sub.size else 0.0

    return {
        "R_Rdag_interior": block(c1, in1, in1),
        "R_Rdag_boundary": block(c1, ~in1, ~in1),
        "su11_interior": block(c2, in2, in2),
        "su11_boundary": block(c2, ~in2, ~in2),
    }


def squeeze_ces(params: CESParams, eta: float) -> tuple[EQState, EQState, float]:
    """Squeeze a tripartite state and compare with the relabelled state.

    Returns ``(squeezed, expected, max_parameter_error)`` where ``expected``
    is ``tripartite_ces(x / eta)`` with prefactor ``eta^(-1/2)``.
    """
    sp = SqueezeParams(eta, params.weights)
    out = squeeze_collective(tripartite_ces(params), params.weights.direction, sp.zeta)
    relabel = CESParams(params.weights, params.beta, params.gamma, params.x / eta, params.s)
    target = tripartite_ces(relabel)
    target = target.with_log_prefactor(target.log_prefactor - 0.5 * math.log(eta))
    err = max(
        abs(out.log_prefactor - target.log_prefactor),
        float(np.max(np.abs(out.w - target.w))),
        float(np.max(np.abs(out.F - target.F))),
    )
    return out, target, err


def conjugated_ladder(mode: int, params: SqueezeParams) -> FirstOrderOperator:
    """``S a_i S^-1 = a_i + d_i [(cosh - 1) R + sinh R_dag]``."""
    d = params.weights.direction
    z = params.zeta
    u = np.zeros(3, dtype=complex)
    u[mode] = 1.0
    u = u + d[mode] * (math.cosh(z) - 1) * d.conj()
    u_dag = d[mode] * math.sinh(z) * d
    return FirstOrderOperator(u, u_dag)


def conjugated_quadrature(mode: int, kind: str, params: SqueezeParams) -> FirstOrderOperator:
    """``S X_i S^-1`` or ``S P_i S^-1`` assembled from :func:`conjugated_ladder`."""
    a = conjugated_ladder(mode, params)
    a_dag = FirstOrderOperator(a.u_dag.conj(), a.u.conj(), a.c.conjugate())
    if kind == "X":
        return (a + a_dag) * (1 / math.sqrt(2))
    if kind == "P":
        return (a - a_dag) * (1 / (math.sqrt(2) * 1j))
    raise ValueError("kind must be 'X' or 'P'")


def quadrature_rule(mode: int, kind: str, params: SqueezeParams) -> FirstOrderOperator:
    """Closed rule ``X_i + mu_i A (e^zeta - 1)`` / ``P_i + mu_i B (e^-zeta - 1)``."""
    w = params.weights
    scale = 3 * w.lam**2
    unit = np.zeros(3)
    unit[mode] = 1.0
    if kind == "X":
        return FirstOrderOperator.x_quadrature(unit + w.m[mode] * (math.exp(params.zeta) - 1) * w.m / scale)
    if kind == "P":
        return FirstOrderOperator.p_quadrature(unit + w.m[mode] * (math.exp(-params.zeta) - 1) * w.m / scale)
    raise ValueError("kind must be 'X' or 'P'")


def conjugation_defect(mode: int, params: SqueezeParams, cutoff: int = 20, max_photons: int = 6) -> float:
    """Fock check of :func:`conjugated_ladder`: ``S a S^-1`` vs the first-order form.

    Inputs are the basis states with at most ``max_photons`` photons; outputs
    are compared on tuples with at most ``max_photons + 1`` photons, which
    holds the whole image of the first-order operator.
    """
    sq = FockSqueezer(params, cutoff)
    dim = (cutoff + 1) ** 3
    idx = np.flatnonzero(total_photon_mask(3, cutoff, max_photons))
    block = np.zeros((dim, idx.size), dtype=complex)
    block[idx, np.arange(idx.size)] = 1.0
    a = ladder(mode, "lower", cutoff).matrix
    lhs = sq.apply(a @ sq.apply(block, inverse=True))
    rhs = conjugated_ladder(mode, params).to_fock(cutoff).matrix @ block
    out = total_photon_mask(3, cutoff, max_photons + 1)
    return float(np.max(np.abs(lhs[out] - rhs[out])))


def closed_form_variances(weights: ModeWeights, zeta: float) -> tuple[float, float, float]:
    """``(Var X_sum, Var P_sum, product)`` on ``S^-1|000>``."""
    c2 = (weights.mu + weights.nu + weights.tau) ** 2 / (3 * weights.lam**2)
    vx = 0.5 * (c2 * (math.exp(2 * zeta) - 1) + 3)
    vp = 0.5 * (c2 * (math.exp(-2 * zeta) - 1) + 3)
    return vx, vp, vx * vp


def inverse_squeezed_vacuum(weights: ModeWeights, zeta: float) -> EQState:
    """``S^-1|000>`` as an EQState: ``sech^(1/2) exp(+tanh/2 R_dag^2)|000>``."""
    return squeezed_vacuum(3, weights.direction, -zeta)


@dataclass(frozen=True)
class VarianceReport:
    var_x: float
    var_p: float
    product: float
    mean_x: float
    mean_p: float
    closed_x: float
    closed_p: float
    closed_product: float
    leakage: LeakageReport

    @property
    def max_error(self) -> float:
        return max(abs(self.var_x - self.closed_x), abs(self.var_p - self.closed_p))


def squeezed_vacuum_variances(
    weights: ModeWeights,
    zeta: float,
    cutoff: int = 20,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    leakage_threshold: float = 1e-8,
) -> VarianceReport:
    """Quadrature-sum variances of ``S^-1|000>`` computed by Fock evolution of the vacuum."""
    sq = FockSqueezer(SqueezeParams.from_zeta(zeta, weights), cutoff, tolerances)
    vac = FockState.vacuum(3, cutoff)
    state, rep = evolve(-sq.generator, vac, tolerances)
    if rep.boundary_mass > leakage_threshold:
        raise LeakageError(f"boundary mass {rep.boundary_mass:.3g} exceeds {leakage_threshold:.3g}")
    X = quadrature(0, "X", cutoff) + quadrature(1, "X", cutoff) + quadrature(2, "X", cutoff)
    P = quadrature(0, "P", cutoff) + quadrature(1, "P", cutoff) + quadrature(2, "P", cutoff)
    vx, vp = variance(X, state), variance(P, state)
    cx, cp, cprod = closed_form_variances(weights, zeta)
    return VarianceReport(
        vx, vp, vx * vp, expectation(X, state).real, expectation(P, state).real, cx, cp, cprod, rep
    )


@dataclass(frozen=True)
class InequalityReport:
    var_x: float
    var_p: float
    bound_x: float
    bound_p: float
    x_holds: bool
    p_holds: bool
    x_equal: bool
    p_equal: bool
    balanced_weights: bool
    zeta: float
    #: ``bound - variance`` in closed form, ``(3 - c^2)/2 * expm1(+-2 zeta)``
    gap_x: float = 0.0
    gap_p: float = 0.0
    atol: float = 1e-12

    @property
    def consistent(self) -> bool:
        """Both bounds hold, with equality exactly when the weights are balanced or ``zeta = 0``.

        For tiny ``zeta`` the gap falls below ``atol`` even for unbalanced
        weights; equality is then expected numerically as well.
        """
        expect_x = self.balanced_weights or abs(self.gap_x) <= self.atol
        expect_p = self.balanced_weights or abs(self.gap_p) <= self.atol
        return (
            self.x_holds
            and self.p_holds
            and self.x_equal == expect_x
            and self.p_equal == expect_p
        )


def squeezing_inequalities(weights: ModeWeights, zeta: float, atol: float = 1e-12) -> InequalityReport:
    """Compare the variances with the balanced-weight values ``(3/2) e^{+-2 zeta}``."""
    if zeta < 0:
        raise ValueError("the inequalities are stated for zeta >= 0")
    vx, vp, _ = closed_form_variances(weights, zeta)
    bx, bp = 1.5 * math.exp(2 * zeta), 1.5 * math.exp(-2 * zeta)
    balanced = math.isclose(weights.mu, weights.nu, rel_tol=0, abs_tol=atol) and math.isclose(
        weights.nu, weights.tau, rel_tol=0, abs_tol=atol
    )
    c2 = (weights.mu + weights.nu + weights.tau) ** 2 / (3 * weights.lam**2)
    gap_x = 0.5 * (3 - c2) * math.expm1(2 * zeta)
    gap_p = 0.5 * (3 - c2) * math.expm1(-2 * zeta)
    return InequalityReport(
        vx, vp, bx, bp,
        vx <= bx + atol, vp >= bp - atol,
        abs(vx - bx) <= atol, abs(vp - bp) <= atol,
        balanced,
        float(zeta),
        gap_x, gap_p, atol,
    )


def vacuum_convention_report(weights: ModeWeights, zeta: float) -> dict[str, float]:
    """Which printed squeezed-vacuum sign matches ``S(eta)|000>`` under this generator sign.

    Returns the quadratic-coefficient mismatch of ``S|000>`` against
    ``-tanh/2 R_dag^2`` and ``+tanh/2 R_dag^2``, and of ``S^-1|000>`` likewise.
    """
    d = weights.direction
    dd = np.outer(d, d)
    t = math.tanh(zeta)
    fwd = squeeze_collective(EQState.vacuum(3), d, zeta)
    inv = squeeze_collective(EQState.vacuum(3), d, -zeta)
    return {
        "forward_vs_minus_tanh": float(np.max(np.abs(fwd.F + t * dd))),
        "forward_vs_plus_tanh": float(np.max(np.abs(fwd.F - t * dd))),
        "inverse_vs_plus_tanh": float(np.max(np.abs(inv.F - t * dd))),
        "inverse_vs_minus_tanh": float(np.max(np.abs(inv.F + t * dd))),
        "forward_prefactor_error": abs(fwd.log_prefactor - 0.5 * math.log(1 / math.cosh(zeta))),
    }
