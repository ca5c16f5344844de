"""Collective-coordinate Wigner operator and its marginals.

With ``R = d . a`` (``d = m / (sqrt(3) lambda)``), scaled coordinates
``xs = sqrt(3/2) x`` and ``ps = sqrt(3/2) p``, the operator is

    Delta(p, x) = 1/(pi tau^2 lambda^2) :exp[-(xs - X_R)^2 - (ps - P_R)^2]:
                = 1/(pi tau^2 lambda^2) D_R(alpha) Pi_R D_R(alpha)^dag

where ``alpha = (xs + i ps)/sqrt(2)``, ``X_R, P_R`` are the quadratures of
``R`` and ``Pi_R = (-1)^(R_dag R)`` is the parity of the collective mode.
It is a two-dimensional object, not the six-dimensional three-mode Wigner
operator; its phase-space integral is ``2/(3 tau^2 lambda^2)``.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tricoherent.exceptions import ConvergenceError
from tricoherent.fock import FockOperator, FockState, collective_lower
from tricoherent.gaussian import (
    EQState,
    completing_unitary,
    displace,
    log_overlap,
    log_overlap_batch,
    passive_transform,
    project_mode,
)
from tricoherent.states import (
    ModeWeights,
    SamplingLaw,
    _block_rngs,
    _sample_block,
    _tripartite_coefficients,
    tripartite_quadratic,
)

SCALE = math.sqrt(1.5)

#: factor relating the collective marginals to the label integral of the projectors
MARGINAL_PROJECTOR_FACTOR = math.sqrt(6 / math.pi) / 9
#: the factor as commonly printed for the probability form of the marginals
MARGINAL_PROJECTOR_FACTOR_PRINTED = math.sqrt(1 / (6 * math.pi))


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.p)):
            raise ValueError("phase-space point must be finite")

    @property
    def alpha(self) -> complex:
        """Collective displacement ``sqrt(3)/2 (x + i p)``."""
        return complex(SCALE * self.x, SCALE * self.p) / math.sqrt(2)


def _pref(weights: ModeWeights) -> float:
    return weights.completeness_constant / math.pi


def wigner_element(z: Sequence[complex], z_prime: Sequence[complex], pt: PhasePoint, weights: ModeWeights) -> complex:
    """``<z|Delta(p, x)|z'>`` for three-mode coherent states, by normal-order substitution."""
    z = np.asarray(z, dtype=complex)
    zp = np.asarray(z_prime, dtype=complex)
    d = weights.direction
    r_dag = complex(d @ z.conj())
    r = complex(d.conj() @ zp)
    a = pt.alpha
    coh = cmath.exp(-0.5 * np.vdot(z, z).real - 0.5 * np.vdot(zp, zp).real + np.vdot(z, zp))
    return _pref(weights) * cmath.exp(-2 * (a.conjugate() - r_dag) * (a - r)) * coh


def _wigner_eq(state: EQState, pt: PhasePoint, weights: ModeWeights) -> float:
    d = weights.direction
    phi = displace(state, -pt.alpha * d)
    parity = np.eye(3) - 2 * np.outer(d, d.conj())
    val = cmath.exp(log_overlap(phi, passive_transform(phi, parity)) - log_overlap(state, state))
    return _pref(weights) * val.real


def _lower_exp(R: FockOperator, c: complex, g: complex, vec: np.ndarray, max_steps: int) -> np.ndarray:
    """``exp(c R + g/2 R^2) vec``; the exponent lowers photon number so the series is finite."""
    L = (c * R + (0.5 * g) * (R @ R)).matrix
    acc = vec.copy()
    term = vec
    for k in range(1, max_steps + 2):
        term = (L @ term) / k
        if not np.any(term):
            return acc
        acc = acc + term
    raise ConvergenceError("lowering exponential did not terminate")


def _ordered_series(R: FockOperator, coeff: float, vec: np.ndarray, max_steps: int) -> float:
    """``sum_k coeff^k/k! ||R^k vec||^2``; finite because ``R`` is nilpotent on the truncation."""
    total = 0.0
    term = vec
    fact = 1.0
    for k in range(0, max_steps + 2):
        if k:
            term = R.matrix @ term
            fact *= k
        n2 = float(np.vdot(term, term).real)
        if n2 == 0.0:
            return total
        total += coeff**k / fact * n2
    raise ConvergenceError("ordered series did not terminate")


def _wigner_fock(state: FockState, pt: PhasePoint, weights: ModeWeights) -> float:
    R = collective_lower(weights.direction.conj(), state.cutoff)
    a = pt.alpha
    steps = state.n_modes * state.cutoff
    chi = _lower_exp(R, 2 * a.conjugate(), 0.0, state.vector, steps)
    val = math.exp(-2 * abs(a) ** 2) * _ordered_series(R, -2.0, chi, steps)
    return _pref(weights) * val / state.norm2()


def wigner_value(state: EQState | FockState, pt: PhasePoint, weights: ModeWeights) -> float:
    """``<psi|Delta(p, x)|psi> / <psi|psi>``."""
    if isinstance(state, EQState):
        return _wigner_eq(state, pt, weights)
    if isinstance(state, FockState):
        return _wigner_fock(state, pt, weights)
    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# marginals
# ---------------------------------------------------------------------------

# Integrating Delta over p leaves
#   sqrt(2/(3 pi))/(tau^2 lambda^2) e^{-xs^2} <psi| e^{conj(c) R_dag + conj(g)/2 R_dag^2} |0><0|_R e^{c R + g/2 R^2} |psi>
# with (c, g) = (sqrt(2) xs, -1); integrating over x gives the same with
# (c, g) = (-i sqrt(2) ps, +1). Replacing g by -s (or +s) gives the label
# integral of the regularized projectors, which is what sampling at s < 1
# estimates.


def _marginal_coefficients(value: float, kind: str, s: float) -> tuple[complex, complex]:
    if not 0.0 < s <= 1.0:
        raise ValueError(f"regularization s must lie in (0, 1], got {s}")
    v = SCALE * value
    if kind == "x":
        return math.sqrt(2) * v, -s
    if kind == "p":
        return -1j * math.sqrt(2) * v, s
    raise ValueError("kind must be 'x' or 'p'")


def _marginal(state: EQState | FockState, value: float, weights: ModeWeights, kind: str, s: float) -> float:
    c, g = _marginal_coefficients(value, kind, s)
    pref = math.sqrt(2 / (3 * math.pi)) * weights.completeness_constant * math.exp(-(SCALE * value) ** 2)
    if isinstance(state, EQState):
        Q = completing_unitary(weights.direction)
        rotated = passive_transform(state, Q)
        chi = project_mode(rotated, 0, complex(c).conjugate(), complex(g).conjugate())
        return pref * math.exp(log_overlap(chi, chi).real - log_overlap(state, state).real)
    if isinstance(state, FockState):
        R = collective_lower(weights.direction.conj(), state.cutoff)
        steps = state.n_modes * state.cutoff
        chi = _lower_exp(R, c, g, state.vector, steps)
        return pref * _ordered_series(R, -1.0, chi, steps) / state.norm2()
    raise TypeError(f"unsupported state type {type(state).__name__}")


def marginal_x(state: EQState | FockState, x: float, weights: ModeWeights, s: float = 1.0) -> float:
    """``int dp <psi|Delta(p, x)|psi> / <psi|psi>``.

    With ``s < 1`` it returns the same label integral built from the
    regularized states, i.e. the exact mean of :func:`marginal_mc` at ``s``;
    the two differ by ``O(1 - s)``.
    """
    return _marginal(state, x, weights, "x", s)


def marginal_p(state: EQState | FockState, p: float, weights: ModeWeights, s: float = 1.0) -> float:
    """``int dx <psi|Delta(p, x)|psi> / <psi|psi>``; ``s`` as in :func:`marginal_x`."""
    return _marginal(state, p, weights, "p", s)


@dataclass(frozen=True)
class MarginalMC:
    value: float
    stderr: float
    n_samples: int


def marginal_mc(
    state: EQState,
    value: float,
    weights: ModeWeights,
    s: float,
    n_samples: int,
    seed: int,
    *,
    kind: str = "x",
    factor: float = MARGINAL_PROJECTOR_FACTOR,
    law: SamplingLaw | None = None,
    block_size: int = 50_000,
) -> MarginalMC:
    """``factor * int d^2beta d^2gamma / pi^2 |<psi|beta, gamma, x>|^2 / <psi|psi>`` by importance sampling.

    ``kind="p"`` uses the momentum-type family with labels ``(sigma, kappa, p)``.
    """
    law = law or SamplingLaw()
    sign = 1.0 if kind == "p" else -1.0
    F = tripartite_quadratic(weights, s, sign)
    log_n = log_overlap(state, state).real
    acc1 = acc2 = 0.0
    for size, rng in _block_rngs(seed, n_samples, block_size):
        beta, gamma, xs, log_w = _sample_block(weights, law, size, rng, x_fixed=value)
        lin = 1j * xs if kind == "p" else xs
        scalar, w = _tripartite_coefficients(weights, beta, gamma, lin)
        lo = log_overlap_batch(state, -0.75 * xs * xs + scalar, w, F)
        vals = np.exp(2 * lo.real + log_w - log_n)
        acc1 += float(np.sum(vals))
        acc2 += float(np.sum(vals**2))
    mean = acc1 / n_samples
    var = max(acc2 / n_samples - mean * mean, 0.0) * n_samples / max(n_samples - 1, 1)
    return MarginalMC(factor * mean, factor * math.sqrt(var / n_samples), n_samples)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WignerGrid:
    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray  # shape (len(ps), len(xs))

    def argmax(self) -> PhasePoint:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return PhasePoint(float(self.xs[j]), float(self.ps[i]))

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.xs, axis=1), self.ps))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "p", "value"])
        for i, p in enumerate(self.ps):
            for j, x in enumerate(self.xs):
                writer.writerow([repr(float(x)), repr(float(p)), repr(float(self.values[i, j]))])
        return buf.getvalue()


def wigner_grid(
    state: EQState | FockState,
    x_range: tuple[float, float],
    p_range: tuple[float, float],
    resolution: int | tuple[int, int],
    weights: ModeWeights,
) -> WignerGrid:
    nx, np_ = (resolution, resolution) if isinstance(resolution, int) else resolution
    xs = np.linspace(*x_range, nx)
    ps = np.linspace(*p_range, np_)
    vals = np.array([[wigner_value(state, PhasePoint(float(x), float(p)), weights) for x in xs] for p in ps])
    return WignerGrid(xs, ps, vals)
