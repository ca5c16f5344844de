"""Coherent, EPR and coherent-entangled states, with their verifiers.

Every constructor returns an :class:`~tricoherent.gaussian.EQState`. The
regularization ``s`` scales only the creation-quadratic coefficient, so
``s = 1`` gives the delta-normalized states and ``s < 1`` gives
normalizable proxies with the same linear part.

The tripartite state factorizes. Write its linear coefficient as
``w = e(beta, gamma) + x m / lambda`` with ``m = (mu, nu, tau)``; then
``e`` is orthogonal to ``m`` and the state is

    exp(-3x^2/4 + sqrt(3) x R_dag - (s/2) R_dag^2)|0>_R  (x)  |e>_perp

with ``R_dag = m . a_dag / (sqrt(3) lambda)`` and ``|e>`` a normalized
coherent state of the two modes orthogonal to ``R``. Most closed forms
below follow from that split.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tricoherent.exceptions import TricoherentError
from tricoherent.gaussian import (
    EQState,
    FirstOrderOperator,
    apply_first_order,
    fock_amplitudes_batch,
    log_overlap_batch,
)

#: weight of the x-delta function in the tripartite overlap,
#: ``<b', g', x'|b, g, x> = prefactor * sqrt(2 pi / 3) * delta(x - x')``
DELTA_NORMALIZATION = math.sqrt(2 * math.pi / 3)


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 < s <= 1.0:
        raise ValueError(f"regularization s must lie in (0, 1], got {s}")
    return s


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeWeights:
    """The weight triple ``(mu, nu, tau)``; ``lambda`` is always derived."""

    mu: float
    nu: float
    tau: float

    def __post_init__(self):
        for name in ("mu", "nu", "tau"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v == 0.0:
                raise ValueError(f"weight {name} must be finite and nonzero, got {v}")
            object.__setattr__(self, name, v)

    @property
    def lam(self) -> float:
        return math.sqrt((self.mu**2 + self.nu**2 + self.tau**2) / 3)

    @property
    def m(self) -> np.ndarray:
        return np.array([self.mu, self.nu, self.tau])

    @property
    def direction(self) -> np.ndarray:
        """Unit vector ``d`` with ``R = d . a``."""
        return self.m / (math.sqrt(3) * self.lam)

    @property
    def completeness_constant(self) -> float:
        return 1.0 / (self.tau**2 * self.lam**2)

    def linear_map(self) -> np.ndarray:
        """Real 3x2 matrix ``E`` with ``e(beta, gamma) = E @ (beta, gamma)``."""
        mu, nu, tau, lam = self.mu, self.nu, self.tau, self.lam
        return np.array(
            [
                [nu**2 + tau**2, mu * tau**2 / nu],
                [-mu * nu, tau**2],
                [-mu * tau, -(mu**2 + nu**2) * tau / nu],
            ]
        ) / (3 * lam)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mu, self.nu, self.tau)


@dataclass(frozen=True)
class CESParams:
    weights: ModeWeights
    beta: complex = 0.0
    gamma: complex = 0.0
    x: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "s", _check_s(self.s))


@dataclass(frozen=True)
class ConjugateParams:
    weights: ModeWeights
    sigma: complex = 0.0
    kappa: complex = 0.0
    p: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        object.__setattr__(self, "kappa", complex(self.kappa))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "s", _check_s(self.s))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def coherent_state(z: Sequence[complex]) -> EQState:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.shape[0]
    return EQState(-0.5 * float(np.vdot(z, z).real), z, np.zeros((n, n)))


def epr_state(eta: complex, s: float = 1.0) -> EQState:
    """Two-mode EPR state; common eigenstate of ``a1 - a2_dag`` and ``a2 - a1_dag`` at ``s = 1``."""
    s = _check_s(s)
    eta = complex(eta)
    return EQState(-0.5 * abs(eta) ** 2, [eta, -eta.conjugate()], s * np.array([[0.0, 1.0], [1.0, 0.0]]))


def bipartite_ces(mu: float, nu: float, alpha: complex, x: float, s: float = 1.0) -> EQState:
    """Two-mode coherent-entangled state with ``mu^2 + nu^2 = 2 lambda^2``."""
    s = _check_s(s)
    mu, nu, alpha, x = float(mu), float(nu), complex(alpha), float(x)
    if mu == 0.0 and nu == 0.0:
        raise ValueError("bipartite weights must not both vanish")
    lam = math.sqrt((mu**2 + nu**2) / 2)
    shift = x - alpha * mu / 2
    log_pref = -0.5 * x * x - 0.25 * abs(nu * alpha) ** 2
    w = [lam * alpha + (mu / lam) * shift, (nu / lam) * shift]
    mv = np.array([mu, nu])
    return EQState(log_pref, w, -(s / (2 * lam**2)) * np.outer(mv, mv))


def _tripartite_coefficients(weights: ModeWeights, beta, gamma, lin_x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized scalar exponent (without the ``x^2`` term) and linear part.

    ``lin_x`` is the variable multiplying ``m/lambda`` in the linear part
    (``x`` for the position family, ``i p`` for the momentum family).
    """
    mu, nu, tau, lam = weights.mu, weights.nu, weights.tau, weights.lam
    b = np.asarray(beta, dtype=complex)
    g = np.asarray(gamma, dtype=complex)
    lx = np.asarray(lin_x, dtype=complex)
    scalar = (
        -(1 / (6 * nu)) * (b.conj() * g + b * g.conj()).real * mu * tau**2
        - (1 / 6) * np.abs(g) ** 2 * tau**2 * (1 + mu**2 / nu**2)
        - (1 / 6) * np.abs(b) ** 2 * (nu**2 + tau**2)
    )
    w = np.stack(
        [
            b * (nu**2 + tau**2) + g * mu * tau**2 / nu + 3 * lx * mu,
            -b * mu * nu + g * tau**2 + 3 * lx * nu,
            -g * (mu**2 + nu**2) * tau / nu - b * mu * tau + 3 * lx * tau,
        ],
        axis=-1,
    ) / (3 * lam)
    return scalar, w


def tripartite_quadratic(weights: ModeWeights, s: float, sign: float = -1.0) -> np.ndarray:
    m = weights.m
    return sign * (s / (3 * weights.lam**2)) * np.outer(m, m)


def tripartite_ces(params: CESParams) -> EQState:
    """Position-type tripartite coherent-entangled state ``|beta, gamma, x>``."""
    wts = params.weights
    scalar, w = _tripartite_coefficients(wts, params.beta, params.gamma, params.x)
    log_pref = -0.75 * params.x**2 + complex(scalar)
    return EQState(log_pref, w, tripartite_quadratic(wts, params.s, -1.0))


def conjugate_ces(params: ConjugateParams) -> EQState:
    """Momentum-type counterpart ``|sigma, kappa, p>``."""
    wts = params.weights
    scalar, w = _tripartite_coefficients(wts, params.sigma, params.kappa, 1j * params.p)
    log_pref = -0.75 * params.p**2 + complex(scalar)
    return EQState(log_pref, w, tripartite_quadratic(wts, params.s, +1.0))


# ---------------------------------------------------------------------------
# eigen-operators and residuals
# ---------------------------------------------------------------------------


def position_operators(weights: ModeWeights) -> dict[str, FirstOrderOperator]:
    """The commuting family diagonalized by the position-type state."""
    mu, nu, tau = weights.as_tuple()
    return {
        "x_combination": FirstOrderOperator.x_quadrature(weights.m / 3),
        "ladder_12": FirstOrderOperator.lower([nu, -mu, 0.0]),
        "ladder_23": FirstOrderOperator.lower([0.0, tau, -nu]),
    }


def momentum_operators(weights: ModeWeights) -> dict[str, FirstOrderOperator]:
    ops = position_operators(weights)
    ops.pop("x_combination")
    return {"p_combination": FirstOrderOperator.p_quadrature(weights.m / 3), **ops}


def position_eigenvalues(params: CESParams) -> dict[str, complex]:
    lam = params.weights.lam
    return {
        "x_combination": lam * params.x / math.sqrt(2),
        "ladder_12": params.weights.nu * params.beta * lam,
        "ladder_23": params.weights.tau * params.gamma * lam,
    }


def momentum_eigenvalues(params: ConjugateParams) -> dict[str, complex]:
    lam = params.weights.lam
    return {
        "p_combination": lam * params.p / math.sqrt(2),
        "ladder_12": params.weights.nu * params.sigma * lam,
        "ladder_23": params.weights.tau * params.kappa * lam,
    }


def eigen_residual(state: EQState, op: FirstOrderOperator, eigenvalue: complex) -> tuple[complex, float]:
    """``(sigma - eigenvalue, ||v||)`` where ``op|psi> = (sigma + v . a_dag)|psi>``."""
    sigma, v = apply_first_order(op, state)
    return sigma - complex(eigenvalue), float(np.linalg.norm(v))


def x_combination_defect(weights: ModeWeights, s: float) -> float:
    """Expected vector defect of the collective-position operator at regularization ``s``."""
    return (1 - s) * float(np.linalg.norm(weights.m)) / (3 * math.sqrt(2))


# ---------------------------------------------------------------------------
# overlaps
# ---------------------------------------------------------------------------


def coherent_part(params: CESParams) -> np.ndarray:
    """``e(beta, gamma)``, the component of the linear coefficient orthogonal to ``m``."""
    return params.weights.linear_map() @ np.array([params.beta, params.gamma])


def _check_shared(a, b) -> None:
    if a.weights != b.weights:
        raise ValueError("overlap prefactor needs a shared weight triple")


def overlap_prefactor(a: CESParams, b: CESParams) -> complex:
    """Factor multiplying ``sqrt(2 pi / 3) delta(x_a - x_b)`` in ``<a|b>``.

    It is the overlap of the normalized coherent states carried by the two
    modes orthogonal to the collective one:
    ``exp(-|e_a|^2/2 - |e_b|^2/2 + conj(e_a) . e_b)``.
    """
    _check_shared(a, b)
    ea, eb = coherent_part(a), coherent_part(b)
    return cmath.exp(-0.5 * np.vdot(ea, ea).real - 0.5 * np.vdot(eb, eb).real + np.vdot(ea, eb))


def overlap_prefactor_printed(a: CESParams, b: CESParams) -> complex:
    """The exponent as it is commonly printed, kept for comparison.

    It swaps the roles of ``mu`` and ``tau`` in the ``|beta|^2`` and
    ``gamma gamma'*`` coefficients, so it agrees with
    :func:`overlap_prefactor` only when ``mu == tau``.
    """
    _check_shared(a, b)
    mu, nu, tau = a.weights.as_tuple()
    bp, gp = a.beta, a.gamma  # primed labels sit in the bra
    bk, gk = b.beta, b.gamma
    c = lambda z: z.conjugate()  # noqa: E731
    expo = (
        -((mu**2 + nu**2) / (6 * nu**2))
        * (nu**2 * (abs(bk) ** 2 + abs(bp) ** 2) + tau**2 * (abs(gk) ** 2 + abs(gp) ** 2))
        - (mu / (6 * nu)) * tau**2 * (bk * c(gk) + c(bk) * gk + bp * c(gp) + c(bp) * gp - 2 * (bk * c(gp) + c(bp) * gk))
        + ((nu**2 + tau**2) / (3 * nu**2)) * (nu**2 * bk * c(bp) + mu**2 * gk * c(gp))
    )
    return cmath.exp(expo)


def regularized_x_overlap(x_bra: float, x_ket: float, s: float) -> float:
    """Closed form of the collective-mode factor of ``<., ., x'|., ., x>`` at ``s < 1``.

    Equals ``sqrt(2 pi/3) * exp(-D^2/eps) / sqrt(pi eps) * exp(c_s (x^2 + x'^2))`` with
    ``D = x - x'``, width ``eps = 2(1 - s^2)/3`` and ``c_s = 3/(2(1+s)) - 3/4``,
    which tends to ``sqrt(2 pi / 3) delta(x - x')``.
    """
    s = _check_s(s)
    if s >= 1.0:
        raise ValueError("the collective-mode factor is a delta function at s = 1")
    d = x_bra - x_ket
    s2 = x_bra**2 + x_ket**2
    return math.exp(
        -0.5 * math.log(1 - s * s) - 1.5 * d * d / (1 - s * s) + (1.5 / (1 + s) - 0.75) * s2
    )


def delta_width(s: float) -> float:
    return 2 * (1 - s * s) / 3


def prefactor_ratio_estimate(a: CESParams, b: CESParams, s: float) -> complex:
    """Estimate of :func:`overlap_prefactor` from regularized states at equal ``x``.

    Divides ``<a_s|b_s>`` by the peak ``sqrt(2 pi/3) / sqrt(pi eps)`` of the
    regularized delta function. The relative error is
    ``exp(2 c_s x^2) - 1`` with ``c_s = 3/(2(1+s)) - 3/4``, which shrinks
    monotonically as ``s -> 1``.
    """
    from tricoherent.gaussian import overlap

    _check_shared(a, b)
    if a.x != b.x:
        raise ValueError("the ratio estimate needs equal x labels")
    s = _check_s(s)
    if s >= 1.0:
        raise ValueError("the ratio estimate needs s < 1")
    bra = tripartite_ces(CESParams(a.weights, a.beta, a.gamma, a.x, s))
    ket = tripartite_ces(CESParams(b.weights, b.beta, b.gamma, b.x, s))
    peak = DELTA_NORMALIZATION / math.sqrt(math.pi * delta_width(s))
    return overlap(bra, ket) / peak


def coherent_ces_overlap(z: Sequence[complex], params: CESParams) -> complex:
    """``<z1, z2, z3|beta, gamma, x>`` in closed form (finite for every ``s``)."""
    state = tripartite_ces(params)
    z = np.asarray(z, dtype=complex)
    zc = z.conj()
    expo = state.log_prefactor + state.w @ zc + 0.5 * zc @ state.F @ zc - 0.5 * np.vdot(z, z).real
    return cmath.exp(expo)


def coherent_ces_overlap_printed(z: Sequence[complex], params: CESParams) -> complex:
    """Variant using ``beta (mu^2 + tau^2)`` in the first linear coefficient.

    That coefficient does not close the ``nu a1 - mu a2`` eigenequation; the
    function exists so reports can show the size of the discrepancy.
    """
    wts = params.weights
    mu, nu, tau = wts.as_tuple()
    state = tripartite_ces(params)
    w = state.w.copy()
    w[0] += params.beta * ((mu**2 + tau**2) - (nu**2 + tau**2)) / (3 * wts.lam)
    z = np.asarray(z, dtype=complex)
    zc = z.conj()
    expo = state.log_prefactor + w @ zc + 0.5 * zc @ state.F @ zc - 0.5 * np.vdot(z, z).real
    return cmath.exp(expo)


# ---------------------------------------------------------------------------
# Monte-Carlo completeness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplingLaw:
    """Importance law over ``(beta, gamma, x)``.

    ``(beta, gamma)`` is a circular complex Gaussian whose image
    ``e = E (beta, gamma)`` has variance ``sigma_e2`` along each orthonormal
    direction orthogonal to ``m``; ``x`` is real normal with variance
    ``sigma_x2``. Both widths exceed the integrand envelopes
    (``exp(-|e|^2)`` and ``exp(-3 x^2/2)``) so the weights have finite
    variance for every polynomial moment.
    """

    sigma_e2: float = 2.0
    sigma_x2: float = 1.0

    def __post_init__(self):
        if self.sigma_e2 <= 0.5 or self.sigma_x2 <= 1 / 6:
            raise ValueError("proposal too narrow: importance weights would have infinite variance")

    @classmethod
    def for_cutoff(cls, cutoff: int) -> "SamplingLaw":
        return cls(sigma_e2=1.0 + cutoff / 2, sigma_x2=(1.0 + cutoff) / 3)


def _sample_block(
    weights: ModeWeights, law: SamplingLaw, n: int, rng: np.random.Generator, x_fixed: float | None = None
):
    """Draw ``n`` labels and return ``(beta, gamma, x, log_weight)``.

    ``log_weight`` is ``log(measure density / proposal density)`` for the
    measure ``d^2beta d^2gamma / pi^2`` (times ``dx / sqrt(6 pi)`` when ``x``
    is sampled).
    """
    E = weights.linear_map()
    G = E.T @ E
    cov = law.sigma_e2 * np.linalg.inv(G)
    L = np.linalg.cholesky(cov)
    zs = (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))) / math.sqrt(2)
    c = zs @ L.T
    e = c @ E.T
    e2 = np.sum(np.abs(e) ** 2, axis=1)
    log_det_cov = 2 * math.log(law.sigma_e2) - math.log(np.linalg.det(G))
    # measure 1/pi^2, proposal exp(-|e|^2/sigma_e2) / (pi^2 det cov)
    log_w = log_det_cov + e2 / law.sigma_e2
    if x_fixed is None:
        x = rng.standard_normal(n) * math.sqrt(law.sigma_x2)
        log_w = log_w - 0.5 * math.log(6 * math.pi) + 0.5 * math.log(2 * math.pi * law.sigma_x2) + x * x / (2 * law.sigma_x2)
    else:
        x = np.full(n, float(x_fixed))
    return c[:, 0], c[:, 1], x, log_w


def _block_rngs(seed: int, n_samples: int, block_size: int) -> list[tuple[int, np.random.Generator]]:
    """Independent substreams, one per fixed-size block.

    The partition depends only on ``(n_samples, block_size)``, so results
    do not depend on how blocks are scheduled.
    """
    if n_samples <= 0 or block_size <= 0:
        raise ValueError("sample counts must be positive")
    n_blocks = -(-n_samples // block_size)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [block_size] * (n_blocks - 1) + [n_samples - block_size * (n_blocks - 1)]
    return [(size, np.random.default_rng(child)) for size, child in zip(sizes, children)]


@dataclass(frozen=True)
class CompletenessEstimate:
    matrix: np.ndarray
    stderr: np.ndarray
    constant: float
    n_samples: int
    s: float
    cutoff: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def fitted_constant(self) -> tuple[float, float]:
        """Inverse-variance weighted mean of the diagonal and its standard error."""
        diag = np.real(np.diag(self.matrix))
        err = np.diag(self.stderr)
        wts = 1 / err**2
        mean = float(np.sum(wts * diag) / np.sum(wts))
        return mean, float(1 / math.sqrt(np.sum(wts)))


def completeness_mc(
    weights: ModeWeights,
    s: float,
    cutoff: int,
    n_samples: int,
    seed: int,
    *,
    block_size: int = 50_000,
    law: SamplingLaw | None = None,
    target_rel_stderr: float = 0.05 / 3,
) -> CompletenessEstimate:
    """Importance-sampled estimate of the resolution of the identity.

    Estimates ``int d^2beta/pi d^2gamma/pi dx/sqrt(6 pi) |beta,gamma,x><beta,gamma,x|``
    restricted to occupation tuples up to ``cutoff``. Each sample contributes
    the exact truncated amplitude vector, so the only error is statistical.
    """
    s = _check_s(s)
    if s >= 1.0:
        raise TricoherentError("completeness sampling needs s < 1 (the s = 1 states are not normalizable)")
    law = law or SamplingLaw.for_cutoff(cutoff)
    F = tripartite_quadratic(weights, s)
    dim = (cutoff + 1) ** 3
    first = np.zeros((dim, dim), dtype=complex)
    second = np.zeros((dim, dim))
    for size, rng in _block_rngs(seed, n_samples, block_size):
        beta, gamma, x, log_w = _sample_block(weights, law, size, rng)
        scalar, w = _tripartite_coefficients(weights, beta, gamma, x)
        log_pref = -0.75 * x * x + scalar + 0.5 * log_w
        amps = fock_amplitudes_batch(log_pref, w, F, cutoff).reshape(size, dim)
        first += amps.T @ amps.conj()
        a2 = np.abs(amps) ** 2
        second += a2.T @ a2
    mean = first / n_samples
    var = np.maximum(second / n_samples - np.abs(mean) ** 2, 0.0) * n_samples / max(n_samples - 1, 1)
    stderr = np.sqrt(var / n_samples)
    const = weights.completeness_constant
    warn = []
    worst = float(np.max(np.diag(stderr))) / const
    if worst > target_rel_stderr:
        warn.append(
            f"sample budget too small: worst diagonal relative stderr {worst:.3g} exceeds {target_rel_stderr:.3g}"
        )
    return CompletenessEstimate(mean, stderr, const, n_samples, s, cutoff, tuple(warn))


def regularized_completeness_operator(weights: ModeWeights, s: float, cutoff: int) -> np.ndarray:
    """Exact value of the regularized completeness integral on the truncated space.

    The x-integral of the collective-mode projectors leaves
    ``(1/3) exp(k R_dag^2) exp(k R^2)`` with ``k = (1 - s)/2``; the
    orthogonal modes integrate to ``3/(tau^2 lambda^2)`` times the identity.
    Every path from a kept tuple to a kept tuple stays inside the
    truncation, so the truncated matrices give exact entries.
    """
    from tricoherent.fock import collective_lower, propagate

    k = (1 - _check_s(s)) / 2
    R = collective_lower(weights.direction, cutoff)
    R2 = (R @ R).matrix
    dim = R2.shape[0]
    lower = propagate(k * R2, np.eye(dim, dtype=complex))
    full = propagate(k * R2.conj().T.tocsr(), lower)
    return weights.completeness_constant * full


def partial_completeness_closed_form(
    x: float, z: Sequence[complex], z_prime: Sequence[complex], weights: ModeWeights, s: float = 1.0, momentum: bool = False
) -> complex:
    """``<z| int d^2beta/pi d^2gamma/pi |beta,gamma,x><beta,gamma,x| |z'>`` by normal-order substitution.

    The ordered operator is
    ``(3/(tau^2 lambda^2)) :exp(-3x^2/2 + sqrt(3) x (R_dag + R) - (s/2)(R_dag^2 + R^2) - R_dag R):``
    for the position family; the momentum family replaces ``sqrt(3) x`` by
    ``i sqrt(3) p`` on ``R_dag``, ``-i sqrt(3) p`` on ``R``, and ``-s`` by ``+s``.
    At ``s = 1`` this is the collective Gaussian in the quadrature variable.
    """
    z = np.asarray(z, dtype=complex)
    zp = np.asarray(z_prime, dtype=complex)
    d = weights.direction
    r_dag = d @ z.conj()
    r = d @ zp
    coh = cmath.exp(-0.5 * np.vdot(z, z).real - 0.5 * np.vdot(zp, zp).real + np.vdot(z, zp))
    root3 = math.sqrt(3)
    if momentum:
        expo = -1.5 * x * x + 1j * root3 * x * (r_dag - r) + 0.5 * s * (r_dag**2 + r**2) - r_dag * r
    else:
        expo = -1.5 * x * x + root3 * x * (r_dag + r) - 0.5 * s * (r_dag**2 + r**2) - r_dag * r
    return 3 * weights.completeness_constant * cmath.exp(expo) * coh


@dataclass(frozen=True)
class MCValue:
    value: complex
    stderr: float
    n_samples: int


def partial_completeness_mc(
    x: float,
    z: Sequence[complex],
    z_prime: Sequence[complex],
    weights: ModeWeights,
    s: float,
    n_samples: int,
    seed: int,
    *,
    momentum: bool = False,
    block_size: int = 50_000,
    law: SamplingLaw | None = None,
) -> MCValue:
    """MC estimate of ``int d^2beta/pi d^2gamma/pi <z|beta,gamma,x><beta,gamma,x|z'>``.

    With ``momentum=True`` the labels are ``(sigma, kappa, p = x)`` of the
    momentum-type family.
    """
    s = _check_s(s)
    law = law or SamplingLaw()
    z = np.asarray(z, dtype=complex)
    zp = np.asarray(z_prime, dtype=complex)
    sign = 1.0 if momentum else -1.0
    F = tripartite_quadratic(weights, s, sign)
    bra = coherent_state(z)
    bra_p = coherent_state(zp)
    acc1 = 0.0 + 0.0j
    acc2 = 0.0
    for size, rng in _block_rngs(seed, n_samples, block_size):
        beta, gamma, xs, log_w = _sample_block(weights, law, size, rng, x_fixed=x)
        lin = 1j * xs if momentum else xs
        scalar, w = _tripartite_coefficients(weights, beta, gamma, lin)
        log_pref = -0.75 * xs * xs + scalar
        left = log_overlap_batch(bra, log_pref, w, F)
        right = log_overlap_batch(bra_p, log_pref, w, F)
        vals = np.exp(left + np.conj(right) + log_w)
        acc1 += complex(np.sum(vals))
        acc2 += float(np.sum(np.abs(vals) ** 2))
    mean = acc1 / n_samples
    var = max(acc2 / n_samples - abs(mean) ** 2, 0.0) * n_samples / max(n_samples - 1, 1)
    return MCValue(mean, math.sqrt(var / n_samples), n_samples)


def partial_completeness_check(
    x: float,
    z: Sequence[complex],
    z_prime: Sequence[complex],
    weights: ModeWeights,
    s: float,
    n_samples: int,
    seed: int,
    *,
    momentum: bool = False,
) -> tuple[MCValue, complex]:
    """``(mc_value, closed_form)`` with the closed form evaluated at the same ``s``."""
    mc = partial_completeness_mc(x, z, z_prime, weights, s, n_samples, seed, momentum=momentum)
    return mc, partial_completeness_closed_form(x, z, z_prime, weights, s, momentum)
