import math

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from tricoherent.config import DEFAULT_TOLERANCES
from tricoherent.exceptions import ConvergenceError
from tricoherent.fock import (
    FockOperator,
    FockState,
    collective_lower,
    commutator,
    evolve,
    expectation,
    flat_index,
    identity,
    inner,
    interior_mask,
    ladder,
    number,
    occupation,
    propagate,
    quadrature,
    total_photon_mask,
    variance,
)


@given(st.integers(1, 6), st.data())
def test_flat_index_roundtrip(cutoff, data):
    occ = tuple(data.draw(st.integers(0, cutoff)) for _ in range(3))
    assert occupation(flat_index(occ, cutoff), 3, cutoff) == occ


def test_flat_index_rejects_out_of_range():
    with pytest.raises(ValueError):
        flat_index((0, 5, 0), 4)


def test_canonical_commutator_on_interior():
    N = 6
    a = ladder(1, "lower", N)
    c = (commutator(a, a.dag()) - identity(3, N)).dense()
    inside = interior_mask(3, N, 1)
    assert np.max(np.abs(c[np.ix_(inside, inside)])) < 1e-14
    # truncation shows on the boundary
    assert np.max(np.abs(c[np.ix_(~inside, ~inside)])) > 1


def test_number_is_a_dag_a():
    N = 5
    a = ladder(2, "lower", N)
    assert np.allclose((a.dag() @ a).dense(), number(2, N).dense())


def test_vacuum_quadrature_variance():
    vac = FockState.vacuum(3, 4)
    assert variance(quadrature(0, "X", 4), vac) == pytest.approx(0.5, abs=1e-15)
    assert variance(quadrature(2, "P", 4), vac) == pytest.approx(0.5, abs=1e-15)


def test_propagate_matches_dense_expm(rng):
    A = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
    G = 0.3 * (A - A.conj().T)
    v = rng.normal(size=(30, 2)) + 0j
    got = propagate(sp.csr_matrix(G), v)
    assert np.allclose(got, scipy.linalg.expm(G) @ v, atol=1e-12)


def test_propagate_reports_nonconvergence(rng):
    G = sp.csr_matrix(np.diag(np.full(4, 0.9)))
    with pytest.raises(ConvergenceError):
        propagate(G, np.ones(4), tol=1e-14, max_terms=2)


def test_displacement_of_vacuum_gives_coherent_amplitudes():
    N, alpha = 25, 0.7 - 0.4j
    a = ladder(0, "lower", N)
    state, rep = evolve(alpha * a.dag() - np.conj(alpha) * a, FockState.vacuum(3, N))
    amps = [state.vector[flat_index((n, 0, 0), N)] for n in range(8)]
    expected = [math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(8)]
    assert np.allclose(amps, expected, atol=1e-12)
    assert rep.boundary_mass < 1e-20


def test_restrict_total_and_masks():
    N = 3
    state = FockState.from_vector(np.ones(64, dtype=complex), 3, N)
    kept = state.restrict_total(2)
    assert kept.norm2() == pytest.approx(float(total_photon_mask(3, N, 2).sum()))
    assert inner(kept, state) == pytest.approx(kept.norm2())


def test_boundary_mass_counts_edge_tuples():
    N = 4
    st_ = FockState.basis((N, 0, 0), N)
    assert st_.boundary_mass() == pytest.approx(1.0)
    assert FockState.basis((1, 2, 0), N).boundary_mass() == 0.0


def test_collective_lower_combines_modes():
    N = 3
    R = collective_lower([0.6, 0.8, 0.0], N)
    ref = 0.6 * ladder(0, "lower", N) + 0.8 * ladder(1, "lower", N)
    assert np.allclose(R.dense(), ref.dense())


def test_operator_algebra_and_expectation():
    N = 4
    x = quadrature(0, "X", N)
    op = (2 * x - x) / 1.0
    st_ = FockState.basis((1, 0, 0), N)
    assert expectation(op @ op, st_).real == pytest.approx(1.5)
    assert isinstance(-op, FockOperator)
    assert np.allclose(op.power(2).dense(), (op @ op).dense())


def test_space_mismatch_rejected():
    with pytest.raises(ValueError):
        inner(FockState.vacuum(3, 3), FockState.vacuum(3, 4))


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_unitary_evolution_preserves_norm_on_interior(re, im):
    N = 12
    a = ladder(0, "lower", N)
    alpha = complex(re, im) * 0.5
    state, rep = evolve(alpha * a.dag() - np.conj(alpha) * a, FockState.vacuum(3, N), DEFAULT_TOLERANCES)
    assert abs(state.norm2() - 1) < 1e-10
    assert abs(rep.norm_defect) < 1e-10
