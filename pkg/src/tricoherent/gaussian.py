"""Exact algebra of exponential-quadratic states.

An :class:`EQState` is the (generally unnormalized) ket

    exp(l) * exp(w . a_dag + 1/2 a_dag^T F a_dag) |0...0>

with complex symmetric ``F``. Displacements, passive mode mixers and
collective squeezers map this family onto itself, so everything below is
closed-form: no truncation is involved until :func:`fock_project`.

Square roots of determinants are taken eigenvalue by eigenvalue on the
principal branch. That is the branch continuously connected to ``F = 0``
whenever every eigenvalue stays in the open right half-plane, which the
convergence preconditions guarantee; anything closer than
``Tolerances.branch`` to the cut raises :class:`BranchAmbiguityError`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tricoherent.config import DEFAULT_TOLERANCES, Tolerances
from tricoherent.exceptions import (
    BranchAmbiguityError,
    DivergentIntegralError,
    IllConditionedError,
)
from tricoherent.fock import FockOperator, FockState, identity, ladder


def _as_vec(v, n: int | None = None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=complex)).copy()
    if arr.ndim != 1:
        raise ValueError("expected a vector")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected length {n}, got {arr.shape[0]}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EQState:
    log_prefactor: complex
    w: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        w = _as_vec(self.w)
        F = np.array(self.F, dtype=complex, copy=True).reshape(len(w), len(w))
        asym = np.max(np.abs(F - F.T)) if F.size else 0.0
        if asym > DEFAULT_TOLERANCES.symmetric * max(1.0, np.max(np.abs(F))):
            raise ValueError(f"quadratic coefficient matrix is not symmetric (|F - F^T| = {asym:.3g})")
        F = 0.5 * (F + F.T)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(F)) and cmath.isfinite(complex(self.log_prefactor))):
            raise ValueError("non-finite state parameters")
        object.__setattr__(self, "log_prefactor", complex(self.log_prefactor))
        object.__setattr__(self, "w", _freeze(w))
        object.__setattr__(self, "F", _freeze(F))

    @property
    def n_modes(self) -> int:
        return self.w.shape[0]

    @classmethod
    def vacuum(cls, n_modes: int) -> "EQState":
        return cls(0.0, np.zeros(n_modes), np.zeros((n_modes, n_modes)))

    def quad_norm(self) -> float:
        """Spectral norm of ``F``; below 1 means the state is normalizable."""
        return float(np.linalg.norm(self.F, 2)) if self.n_modes else 0.0

    def with_log_prefactor(self, log_prefactor: complex) -> "EQState":
        return EQState(log_prefactor, self.w, self.F)

    def allclose(self, other: "EQState", atol: float = 1e-12, phase_free: bool = False) -> bool:
        dl = self.log_prefactor - other.log_prefactor
        if phase_free:
            dl = dl.real
        else:
            dl = complex(dl.real, math.remainder(dl.imag, 2 * math.pi))
        return (
            abs(dl) <= atol
            and np.allclose(self.w, other.w, rtol=0, atol=atol)
            and np.allclose(self.F, other.F, rtol=0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class FirstOrderOperator:
    """``c + sum_i (u_i a_i + u_dag_i a_i^dag)``."""

    u: np.ndarray
    u_dag: np.ndarray
    c: complex = 0.0

    def __post_init__(self):
        u = _as_vec(self.u)
        ud = _as_vec(self.u_dag, len(u))
        object.__setattr__(self, "u", _freeze(u))
        object.__setattr__(self, "u_dag", _freeze(ud))
        object.__setattr__(self, "c", complex(self.c))

    @property
    def n_modes(self) -> int:
        return self.u.shape[0]

    @classmethod
    def lower(cls, coeffs: Sequence[complex]) -> "FirstOrderOperator":
        u = _as_vec(coeffs)
        return cls(u, np.zeros_like(u))

    @classmethod
    def raise_(cls, coeffs: Sequence[complex]) -> "FirstOrderOperator":
        ud = _as_vec(coeffs)
        return cls(np.zeros_like(ud), ud)

    @classmethod
    def x_quadrature(cls, coeffs: Sequence[float]) -> "FirstOrderOperator":
        """``sum_i c_i X_i`` with ``X = (a + a_dag)/sqrt(2)``."""
        v = _as_vec(coeffs) / math.sqrt(2)
        return cls(v, v)

    @classmethod
    def p_quadrature(cls, coeffs: Sequence[float]) -> "FirstOrderOperator":
        """``sum_i c_i P_i`` with ``P = (a - a_dag)/(sqrt(2) i)``."""
        v = _as_vec(coeffs) / (math.sqrt(2) * 1j)
        return cls(v, -v)

    def __add__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        return FirstOrderOperator(self.u + other.u, self.u_dag + other.u_dag, self.c + other.c)

    def __sub__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        return FirstOrderOperator(self.u - other.u, self.u_dag - other.u_dag, self.c - other.c)

    def __mul__(self, scalar) -> "FirstOrderOperator":
        return FirstOrderOperator(self.u * scalar, self.u_dag * scalar, self.c * scalar)

    __rmul__ = __mul__

    def commutator(self, other: "FirstOrderOperator") -> complex:
        """``[self, other]``, which is always a multiple of the identity."""
        return complex(np.dot(self.u, other.u_dag) - np.dot(other.u, self.u_dag))

    def to_fock(self, cutoff: int) -> FockOperator:
        n = self.n_modes
        out = self.c * identity(n, cutoff)
        for i in range(n):
            if self.u[i] != 0:
                out = out + self.u[i] * ladder(i, "lower", cutoff, n)
            if self.u_dag[i] != 0:
                out = out + self.u_dag[i] * ladder(i, "raise", cutoff, n)
        return out


# ---------------------------------------------------------------------------
# single-variable complex Gaussian integral
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianIntegralSpec:
    """Integrand ``exp(zeta |z|^2 + xi z + eta z* + f z^2 + g z*^2)`` over ``d^2z / pi``."""

    zeta: complex
    xi: complex = 0.0
    eta: complex = 0.0
    f: complex = 0.0
    g: complex = 0.0


@dataclass(frozen=True)
class ConvergenceReport:
    #: the two textbook condition sets, with the |z|^2 coefficient in place
    first_set: bool
    second_set: bool
    #: real part of the quadratic form is negative definite
    absolutely_convergent: bool

    @property
    def textbook(self) -> bool:
        return self.first_set or self.second_set


def convergence_report(integral_params: GaussianIntegralSpec) -> ConvergenceReport:
    zeta, f, g = complex(integral_params.zeta), complex(integral_params.f), complex(integral_params.g)
    disc = zeta * zeta - 4 * f * g

    def cond(s: complex) -> bool:
        return s.real < 0 and s != 0 and (disc / s).real < 0

    first = cond(zeta + f + g)
    second = cond(zeta - f - g)
    absolute = zeta.real < 0 and abs(f + g.conjugate()) < -zeta.real
    return ConvergenceReport(first, second, absolute)


def _principal_sqrt_checked(z: complex, tol: float) -> complex:
    if z.real <= 0 and abs(z.imag) <= tol * max(1.0, abs(z)):
        raise BranchAmbiguityError(f"square root argument {z} lies on the branch cut")
    return cmath.sqrt(z)


def gaussian_integral(integral_params: GaussianIntegralSpec, tolerances: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """Closed form of the complex Gaussian integral.

    ``(zeta^2 - 4fg)^(-1/2) exp[(-zeta xi eta + xi^2 g + eta^2 f)/(zeta^2 - 4fg)]``.
    In the absolutely convergent region ``zeta^2 - 4fg`` is the determinant of
    a matrix with negative-definite real part and never touches the negative
    real axis, so the principal root is the correct one there.
    """
    rep = convergence_report(integral_params)
    if not rep.absolutely_convergent:
        raise DivergentIntegralError(f"integral diverges for {integral_params}")
    zeta, xi, eta, f, g = (complex(v) for v in (integral_params.zeta, integral_params.xi, integral_params.eta, integral_params.f, integral_params.g))
    disc = zeta * zeta - 4 * f * g
    root = _principal_sqrt_checked(disc, tolerances.branch)
    return cmath.exp((-zeta * xi * eta + xi * xi * g + eta * eta * f) / disc) / root


# ---------------------------------------------------------------------------
# overlaps
# ---------------------------------------------------------------------------


def _log_sqrt_det(M: np.ndarray, tol: float) -> complex:
    """``log det(M)^(1/2)`` via eigenvalues, each required in the right half-plane."""
    if M.size == 0:
        return 0.0
    eig = np.linalg.eigvals(M)
    if np.any(eig.real <= tol):
        raise BranchAmbiguityError(f"eigenvalue {eig[np.argmin(eig.real)]} of I - B A is not in the right half-plane")
    return 0.5 * complex(np.sum(np.log(eig)))


def log_overlap(bra: EQState, ket: EQState, tolerances: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """Logarithm of ``<bra|ket>`` (the imaginary part is defined modulo 2 pi)."""
    if bra.n_modes != ket.n_modes:
        raise ValueError("mode count mismatch")
    n = ket.n_modes
    if n == 0:
        return bra.log_prefactor.conjugate() + ket.log_prefactor
    if bra.quad_norm() * ket.quad_norm() >= 1.0:
        raise DivergentIntegralError(
            "vacuum matrix element diverges: ||F_bra|| * ||F_ket|| must be < 1"
        )
    A = bra.F.conj()
    B = ket.F
    a = bra.w.conj()
    b = ket.w
    M = np.eye(n) - B @ A
    x = np.linalg.solve(M, b + B @ a)
    quad = 0.5 * (a @ x + b @ a + b @ (A @ x))
    return bra.log_prefactor.conjugate() + ket.log_prefactor - _log_sqrt_det(M, tolerances.branch) + quad


def log_overlap_batch(bra: EQState, log_prefactors, ws, F) -> np.ndarray:
    """``log <bra|ket_k>`` for kets sharing ``F`` and differing in ``(l, w)``.

    The determinant and the linear solve are shared across the batch.
    """
    ws = np.atleast_2d(np.asarray(ws, dtype=complex))
    F = np.asarray(F, dtype=complex)
    n = bra.n_modes
    if ws.shape[1] != n:
        raise ValueError("mode count mismatch")
    if bra.quad_norm() * float(np.linalg.norm(F, 2)) >= 1.0:
        raise DivergentIntegralError(
            "vacuum matrix element diverges: ||F_bra|| * ||F_ket|| must be < 1"
        )
    A = bra.F.conj()
    a = bra.w.conj()
    M = np.eye(n) - F @ A
    rhs = ws + (F @ a)[None, :]
    x = np.linalg.solve(M, rhs.T).T
    quad = 0.5 * (x @ a + ws @ a + np.einsum("bi,ij,bj->b", ws, A, x))
    return (
        bra.log_prefactor.conjugate()
        + np.asarray(log_prefactors, dtype=complex)
        - _log_sqrt_det(M, DEFAULT_TOLERANCES.branch)
        + quad
    )


def overlap(bra: EQState, ket: EQState, tolerances: Tolerances = DEFAULT_TOLERANCES) -> complex:
    return cmath.exp(log_overlap(bra, ket, tolerances))


def norm2(state: EQState) -> float:
    return overlap(state, state).real


def fidelity(a: EQState, b: EQState) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``; insensitive to prefactors."""
    lab = log_overlap(a, b)
    laa = log_overlap(a, a)
    lbb = log_overlap(b, b)
    return math.exp(2 * lab.real - laa.real - lbb.real)


# ---------------------------------------------------------------------------
# operator actions
# ---------------------------------------------------------------------------


def apply_first_order(op: FirstOrderOperator, state: EQState) -> tuple[complex, np.ndarray]:
    """Return ``(sigma, v)`` with ``op |psi> = (sigma + v . a_dag) |psi>``.

    Exact: ``a_i |psi> = (w_i + (F a_dag)_i) |psi>``.
    """
    if op.n_modes != state.n_modes:
        raise ValueError("mode count mismatch")
    sigma = op.c + complex(op.u @ state.w)
    v = state.F @ op.u + op.u_dag
    return sigma, v


def displace(state: EQState, eps) -> EQState:
    """Apply ``D(eps) = exp(eps . a_dag - eps* . a)``."""
    eps = _as_vec(eps, state.n_modes)
    ec = eps.conj()
    F = state.F
    w_new = state.w + eps - F @ ec
    l_new = state.log_prefactor - 0.5 * np.vdot(eps, eps).real - state.w @ ec + 0.5 * ec @ F @ ec
    return EQState(l_new, w_new, F)


def _check_unitary(T: np.ndarray, tol: float) -> None:
    err = np.max(np.abs(T.conj().T @ T - np.eye(T.shape[0])))
    if err > tol:
        raise ValueError(f"transform is not unitary (defect {err:.3g})")


def passive_transform(state: EQState, T, tolerances: Tolerances = DEFAULT_TOLERANCES) -> EQState:
    """Apply the passive unitary ``U`` with ``U a_k^dag U^-1 = sum_l T[l, k] a_l^dag``.

    Column ``k`` of ``T`` is the image of the creation operator of mode ``k``,
    so ``w -> T w`` and ``F -> T F T^T``. ``U`` is the Fock operator
    ``exp(sum_lk G[l, k] a_l^dag a_k)`` with ``T = exp(G)``; composition is
    ``passive(passive(psi, T1), T2) = passive(psi, T2 @ T1)``.
    """
    T = np.asarray(T, dtype=complex)
    if T.shape != (state.n_modes, state.n_modes):
        raise ValueError("transform shape does not match mode count")
    _check_unitary(T, tolerances.unitary)
    return EQState(state.log_prefactor, T @ state.w, T @ state.F @ T.T)


def unit_direction(direction) -> np.ndarray:
    d = _as_vec(direction)
    nrm = np.linalg.norm(d)
    if not math.isclose(nrm, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"direction must be a unit vector (norm {nrm})")
    return d


def squeeze_collective(
    state: EQState, direction, zeta: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> EQState:
    """Apply ``S = exp[(zeta/2)(R^2 - R_dag^2)]`` with ``R_dag = direction . a_dag``.

    Heisenberg picture: ``S a S^-1 = M a + N a_dag`` with
    ``M = 1 + (cosh - 1) d d^H`` and ``N = sinh d d^T``. Conjugating the
    defining relation ``(a - F a_dag)|psi> = w|psi>`` gives the new ``F`` and
    ``w``; the prefactor comes from the vacuum amplitude
    ``<0|S|psi> = <S(-zeta) 0|psi>`` in closed rank-one form.
    """
    d = unit_direction(direction)
    n = state.n_modes
    if d.shape[0] != n:
        raise ValueError("direction length does not match mode count")
    zeta = float(zeta)
    if zeta == 0.0:
        return state
    ch, sh, th = math.cosh(zeta), math.sinh(zeta), math.tanh(zeta)
    M = np.eye(n) + (ch - 1) * np.outer(d, d.conj())
    N_bar = sh * np.outer(d.conj(), d.conj())
    M_bar = np.eye(n) + (ch - 1) * np.outer(d.conj(), d)
    N = sh * np.outer(d, d)
    F = state.F
    lhs = M - F @ N_bar
    if np.linalg.cond(lhs) > 1e12:
        raise IllConditionedError("Bogoliubov update is singular for this state")
    F_new = np.linalg.solve(lhs, F @ M_bar - N)
    w_new = np.linalg.solve(lhs, state.w)
    asym = np.max(np.abs(F_new - F_new.T))
    if asym > 1e-9 * max(1.0, np.max(np.abs(F_new))):
        raise IllConditionedError(f"updated quadratic form lost symmetry ({asym:.3g})")
    if np.linalg.norm(F_new, 2) > 1.0 + tolerances.squeeze_guard:
        raise IllConditionedError("updated state is not normalizable (||F|| > 1)")
    g = d.conj()
    q = g @ F @ g
    p = g @ state.w
    denom = 1 - th * q
    l_new = (
        state.log_prefactor
        + 0.5 * math.log(1 / ch)
        - 0.5 * cmath.log(denom)
        + 0.5 * th * p * p / denom
    )
    return EQState(l_new, w_new, F_new)


def squeezed_vacuum(n_modes: int, direction, zeta: float) -> EQState:
    """``S(zeta)|0>``: ``F = -tanh(zeta) d d^T``, prefactor ``sech(zeta)^(1/2)``."""
    d = unit_direction(direction)
    return EQState(0.5 * math.log(1 / math.cosh(zeta)), np.zeros(n_modes), -math.tanh(zeta) * np.outer(d, d))


def completing_unitary(direction) -> np.ndarray:
    """Unitary ``Q`` whose first row is ``conj(direction)``.

    ``passive_transform(psi, Q)`` rewrites a state in modes ``b = Q a`` in
    which ``b_0 = sum_i conj(d_i) a_i`` is the collective mode.
    """
    d = unit_direction(direction)
    n = d.shape[0]
    basis = np.column_stack([d.conj(), np.eye(n)])
    q, _ = np.linalg.qr(basis)
    q = q[:, :n]
    phase = np.vdot(q[:, 0], d.conj())
    q[:, 0] *= phase / abs(phase)
    return q.T.copy()


def project_mode(state: EQState, mode: int, bra_w: complex, bra_f: complex) -> EQState:
    """Partial inner product ``(<phi| x 1) |psi>`` over one mode.

    ``|phi> = exp(bra_w b_dag + 1/2 bra_f b_dag^2)|0>`` on ``mode``. The result
    lives on the remaining modes. Uses the single-variable Gaussian integral
    over a coherent-state resolution of ``mode``, with the remaining creation
    operators carried along as commuting symbols.
    """
    n = state.n_modes
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range")
    rest = [k for k in range(n) if k != mode]
    xi = complex(bra_w).conjugate()
    f = 0.5 * complex(bra_f).conjugate()
    g = 0.5 * state.F[mode, mode]
    rep = convergence_report(GaussianIntegralSpec(-1.0, 0.0, 0.0, f, g))
    if not rep.absolutely_convergent:
        raise DivergentIntegralError("partial projection diverges")
    disc = 1 - 4 * f * g
    root = _principal_sqrt_checked(disc, DEFAULT_TOLERANCES.branch)
    w0 = state.w[mode]
    col = state.F[rest, mode]
    l_new = state.log_prefactor - cmath.log(root) + (xi * w0 + xi * xi * g + w0 * w0 * f) / disc
    w_new = state.w[rest] + col * (xi + 2 * f * w0) / disc
    F_new = state.F[np.ix_(rest, rest)] + 2 * f * np.outer(col, col) / disc
    return EQState(l_new, w_new, F_new)


# ---------------------------------------------------------------------------
# Fock projection
# ---------------------------------------------------------------------------


def _series_batch(w: np.ndarray, F: np.ndarray, cutoff: int) -> np.ndarray:
    """Fock amplitudes of ``exp(w . a_dag + 1/2 a_dag^T F a_dag)|0>`` for a batch of ``w``.

    ``w`` has shape ``(B, m)``. Mode 0 is peeled off with the exact relation
    ``sqrt(n0) c[n] = w_0 c[n - e0] + sum_j F_0j sqrt(n_j - delta_0j) c[n - e0 - ej]``,
    the ``n0 = 0`` slab being the same problem on the remaining modes.
    """
    B, m = w.shape
    if m == 0:
        return np.ones(B, dtype=complex)
    base = _series_batch(w[:, 1:], F[1:, 1:], cutoff)
    out = np.zeros((B, cutoff + 1) + base.shape[1:], dtype=complex)
    out[:, 0] = base
    w0 = w[:, 0].reshape((B,) + (1,) * (m - 1))
    sqrt_n = np.sqrt(np.arange(cutoff + 1, dtype=float))
    for n0 in range(1, cutoff + 1):
        prev = out[:, n0 - 1]
        acc = w0 * prev
        if n0 >= 2:
            acc = acc + F[0, 0] * sqrt_n[n0 - 1] * out[:, n0 - 2]
        for j in range(1, m):
            if F[0, j] == 0:
                continue
            axis = j  # axis j of prev (axis 0 is the batch) is original mode j
            shifted = np.zeros_like(prev)
            src = [slice(None)] * prev.ndim
            dst = [slice(None)] * prev.ndim
            src[axis] = slice(0, cutoff)
            dst[axis] = slice(1, cutoff + 1)
            bshape = [1] * prev.ndim
            bshape[axis] = cutoff
            shifted[tuple(dst)] = prev[tuple(src)] * sqrt_n[1:].reshape(bshape)
            acc = acc + F[0, j] * shifted
        out[:, n0] = acc / sqrt_n[n0]
    return out


def fock_amplitudes_batch(log_prefactors, ws, F, cutoff: int) -> np.ndarray:
    """Batch of Fock amplitude tensors sharing one quadratic coefficient ``F``."""
    ws = np.asarray(ws, dtype=complex)
    if ws.ndim == 1:
        ws = ws[None, :]
    core = _series_batch(ws, np.asarray(F, dtype=complex), cutoff)
    pref = np.exp(np.asarray(log_prefactors, dtype=complex)).reshape((-1,) + (1,) * ws.shape[1])
    return pref * core


def fock_project(state: EQState, cutoff: int) -> FockState:
    """Exact amplitudes of ``state`` on every occupation tuple up to ``cutoff``.

    The exponent only creates photons, so each amplitude is a finite sum and
    the kept coefficients carry no truncation error.
    """
    amps = fock_amplitudes_batch([state.log_prefactor], state.w[None, :], state.F, cutoff)[0]
    return FockState(amps)
