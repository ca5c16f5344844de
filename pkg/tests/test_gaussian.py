import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tricoherent.exceptions import BranchAmbiguityError, DivergentIntegralError
from tricoherent.fock import evolve, flat_index, inner, ladder
from tricoherent.gaussian import (
    EQState,
    FirstOrderOperator,
    GaussianIntegralSpec,
    apply_first_order,
    completing_unitary,
    convergence_report,
    displace,
    fidelity,
    fock_project,
    gaussian_integral,
    log_overlap,
    log_overlap_batch,
    overlap,
    passive_transform,
    project_mode,
    squeeze_collective,
    squeezed_vacuum,
)
from tricoherent.protocol import bs_block, bs_generator


def _grid_integral(integral_params: GaussianIntegralSpec, half_width: float = 9.0, n: int = 601) -> complex:
    """Trapezoid rule on a square grid; spectrally accurate for these Gaussians."""
    t = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(t, t)
    z = X + 1j * Y
    zc = z.conj()
    f = np.exp(integral_params.zeta * (X**2 + Y**2) + integral_params.xi * z + integral_params.eta * zc + integral_params.f * z**2 + integral_params.g * zc**2)
    h = t[1] - t[0]
    return complex(np.sum(f) * h * h / math.pi)


def test_gaussian_integral_simple_oracle():
    integral_params = GaussianIntegralSpec(-2.0, 0.0, 0.0, 0.5, 0.5)
    assert gaussian_integral(integral_params) == pytest.approx(3 ** -0.5, abs=1e-15)
    assert _grid_integral(integral_params) == pytest.approx(3 ** -0.5, abs=1e-10)


def test_gaussian_integral_matches_quadrature_on_random_specs(rng):
    checked = 0
    while checked < 50:
        zeta = complex(-rng.uniform(0.8, 2.5), rng.uniform(-1, 1))
        f, g = (complex(*rng.uniform(-0.5, 0.5, 2)) for _ in range(2))
        xi, eta = (complex(*rng.uniform(-0.6, 0.6, 2)) for _ in range(2))
        integral_params = GaussianIntegralSpec(zeta, xi, eta, f, g)
        rep = convergence_report(integral_params)
        if not rep.absolutely_convergent or abs(f + g.conjugate()) > -zeta.real - 0.3:
            continue
        exact = gaussian_integral(integral_params)
        assert abs(exact - _grid_integral(integral_params)) <= 1e-8 * max(1.0, abs(exact))
        checked += 1


def test_divergent_integral_refused():
    with pytest.raises(DivergentIntegralError):
        gaussian_integral(GaussianIntegralSpec(-1.0, 0, 0, 0.8, 0.8))
    with pytest.raises(DivergentIntegralError):
        gaussian_integral(GaussianIntegralSpec(0.5))


def test_textbook_conditions_are_not_sufficient():
    # satisfies both printed condition sets, but |f + conj(g)| exceeds -Re zeta,
    # so the real part of the exponent is unbounded above
    integral_params = GaussianIntegralSpec(-1.27 - 0.92j, 0, 0, -0.92 - 0.97j, 0.63 + 0.83j)
    rep = convergence_report(integral_params)
    assert rep.textbook and not rep.absolutely_convergent


def test_coherent_overlap_oracle():
    a, b = 0.3 - 0.5j, -0.2 + 0.1j
    ca = EQState(-abs(a) ** 2 / 2, [a], [[0]])
    cb = EQState(-abs(b) ** 2 / 2, [b], [[0]])
    expected = cmath.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + a.conjugate() * b)
    assert overlap(ca, cb) == pytest.approx(expected, abs=1e-15)


def _random_state(rng, n, max_norm):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    F = A + A.T
    F *= max_norm / np.linalg.norm(F, 2)
    w = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 0.4
    return EQState(complex(rng.normal(), rng.normal()) * 0.1, w, F)


def test_overlap_matches_fock_for_small_quadratic_part(rng):
    for _ in range(5):
        a, b = _random_state(rng, 3, 0.3), _random_state(rng, 3, 0.3)
        approx = inner(fock_project(a, 22), fock_project(b, 22))
        assert abs(approx - overlap(a, b)) <= 1e-10 * abs(overlap(a, b))


def test_fock_project_squeezed_vacuum_amplitudes():
    F = 0.6
    st_ = EQState(0.0, [0.0], [[F]])
    amps = fock_project(st_, 10).vector
    for n in range(5):
        expected = (F / 2) ** n * math.sqrt(math.factorial(2 * n)) / math.factorial(n)
        assert amps[2 * n] == pytest.approx(expected, abs=1e-14)
        assert abs(amps[2 * n + 1]) < 1e-15


def test_overlap_rejects_non_normalizable_pairs():
    one = EQState(0.0, [0.0], [[1.0]])
    with pytest.raises(DivergentIntegralError):
        log_overlap(one, one)


def test_branch_guard():
    from tricoherent.gaussian import _log_sqrt_det

    with pytest.raises(BranchAmbiguityError):
        _log_sqrt_det(np.array([[-1.0 + 0j]]), 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_overlap_hermitian_and_fidelity_bounded(seed):
    rng = np.random.default_rng(seed)
    a, b = _random_state(rng, 3, 0.7), _random_state(rng, 3, 0.7)
    assert abs(overlap(a, b) - overlap(b, a).conjugate()) <= 1e-10 * abs(overlap(a, b))
    assert 0.0 <= fidelity(a, b) <= 1.0 + 1e-12


def test_log_overlap_batch_matches_single(rng):
    bra = _random_state(rng, 3, 0.5)
    ket = _random_state(rng, 3, 0.5)
    ws = np.stack([ket.w, 2 * ket.w])
    got = log_overlap_batch(bra, [ket.log_prefactor] * 2, ws, ket.F)
    assert np.exp(got[0]) == pytest.approx(overlap(bra, ket), rel=1e-12)
    ket2 = EQState(ket.log_prefactor, 2 * ket.w, ket.F)
    assert np.exp(got[1]) == pytest.approx(overlap(bra, ket2), rel=1e-12)


def test_apply_first_order_on_coherent_state():
    z = np.array([0.2, -0.4j, 0.5])
    coh = EQState(-0.5 * np.vdot(z, z).real, z, np.zeros((3, 3)))
    sigma, v = apply_first_order(FirstOrderOperator.lower([1, 2, 3]), coh)
    assert sigma == pytest.approx(z @ [1, 2, 3])
    assert np.allclose(v, 0)


def test_displace_matches_fock(rng):
    st_ = _random_state(rng, 3, 0.3)
    eps = np.array([0.2 - 0.1j, 0.0, -0.3j])
    N = 16
    fock = fock_project(st_, N)
    for i, e in enumerate(eps):
        a = ladder(i, "lower", N)
        fock, _ = evolve(e * a.dag() - np.conj(e) * a, fock)
    ref = fock_project(displace(st_, eps), N)
    idx = [flat_index((i, j, k), N) for i in range(4) for j in range(4) for k in range(4)]
    assert np.allclose(fock.vector[idx], ref.vector[idx], atol=1e-9)


def test_beam_splitter_transform_matches_fock():
    z = np.array([0.5, -0.2j, 0.0])
    coh = EQState(-0.5 * np.vdot(z, z).real, z, np.zeros((3, 3)))
    theta = 0.4
    analytic = passive_transform(coh, bs_block(0, 1, theta))
    N = 12
    fock, _ = evolve(bs_generator(0, 1, theta, N), fock_project(coh, N))
    assert abs(inner(fock_project(analytic, N), fock) - 1) < 1e-8
    assert np.allclose(analytic.w, [math.cos(theta) * z[0] - math.sin(theta) * z[1], math.sin(theta) * z[0] + math.cos(theta) * z[1], 0])


def test_passive_transform_rejects_non_unitary():
    with pytest.raises(ValueError):
        passive_transform(EQState.vacuum(2), np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_squeeze_collective_matches_fock():
    d = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    z = np.array([0.3, -0.1j, 0.2])
    coh = EQState(-0.5 * np.vdot(z, z).real, z, np.zeros((3, 3)))
    zeta, N = 0.2, 18
    out = squeeze_collective(coh, d, zeta)
    from tricoherent.fock import collective_lower

    R = collective_lower(d, N)
    gen = (0.5 * zeta) * (R @ R - R.dag() @ R.dag())
    fock, _ = evolve(gen, fock_project(coh, N))
    idx = [flat_index((i, j, k), N) for i in range(5) for j in range(5) for k in range(5)]
    assert np.allclose(fock_project(out, N).vector[idx], fock.vector[idx], atol=1e-9)


def test_squeezed_vacuum_constructor_agrees_with_squeezer():
    d = np.array([0.6, 0.8, 0.0])
    assert squeeze_collective(EQState.vacuum(3), d, 0.4).allclose(squeezed_vacuum(3, d, 0.4), atol=1e-13)


def test_completing_unitary_first_row():
    d = np.array([1.0, 2.0, 0.5]) / math.sqrt(5.25)
    Q = completing_unitary(d)
    assert np.allclose(Q @ Q.conj().T, np.eye(3))
    assert np.allclose(Q[0], d.conj())


def test_project_mode_matches_fock(rng):
    st_ = _random_state(rng, 3, 0.4)
    bra_w, bra_f = 0.3 - 0.2j, 0.25
    reduced = project_mode(st_, 0, bra_w, bra_f)
    N = 18
    psi = fock_project(st_, N).vector.reshape(N + 1, N + 1, N + 1)
    phi = fock_project(EQState(0.0, [bra_w], [[bra_f]]), N).vector
    partial = np.tensordot(phi.conj(), psi, axes=(0, 0))
    ref = fock_project(reduced, N).vector.reshape(N + 1, N + 1)
    assert np.allclose(partial[:5, :5], ref[:5, :5], atol=1e-9)
