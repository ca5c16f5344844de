import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tricoherent.config import DEFAULT_TOLERANCES
from tricoherent.exceptions import LeakageError
from tricoherent.protocol import (
    ProtocolPlan,
    bs_block,
    cascade_direction,
    cascade_identity_check,
    displacement_values,
    protocol_angles,
    run_protocol,
)
from tricoherent.states import CESParams, ModeWeights, coherent_part, tripartite_ces

weights_st = st.tuples(*(st.floats(0.5, 2.0) for _ in range(3))).map(lambda t: ModeWeights(*t))
small_c = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


def test_beam_splitter_block_is_orthogonal():
    T = bs_block(1, 2, 0.7)
    assert np.allclose(T @ T.conj().T, np.eye(3))
    with pytest.raises(ValueError):
        bs_block(1, 1, 0.2)


def test_angles_reach_collective_direction():
    w = ModeWeights(0.7, 1.9, 1.2)
    theta, phi = protocol_angles(w)
    assert np.allclose(cascade_direction(theta, phi), w.direction)
    T = bs_block(1, 2, phi) @ bs_block(0, 1, theta)
    assert np.allclose(T[:, 0], w.direction)


@settings(max_examples=30, deadline=None)
@given(weights_st, st.floats(0.1, 0.95))
def test_analytic_cascade_is_exact(w, s):
    res = cascade_identity_check(w, s)
    assert res.max_param_error < 1e-12
    assert abs(1 - res.fidelity) < 1e-12


@settings(max_examples=40, deadline=None)
@given(weights_st, small_c, small_c, st.floats(-2, 2), st.floats(0.2, 0.99))
def test_analytic_protocol_reproduces_state(w, beta, gamma, x, s):
    params = CESParams(w, beta, gamma, x, s)
    _, rep = run_protocol(params, "analytic")
    assert abs(1 - rep.fidelity) <= 1e-10
    assert rep.max_param_error <= 1e-12


def test_analytic_protocol_at_unit_regularization():
    params = CESParams(ModeWeights(1.3, 0.6, 0.9), 0.4 - 0.2j, 0.7j, -1.1, 1.0)
    out, rep = run_protocol(params, "analytic")
    assert math.isnan(rep.fidelity)
    assert rep.max_param_error <= 1e-12
    # at s = 1 the prefactor matches as well
    assert out.allclose(tripartite_ces(params), atol=1e-12)


def test_displacements_at_unit_regularization():
    w = ModeWeights(1.1, 0.8, 1.4)
    params = CESParams(w, 0.3j, -0.2, 0.9, 1.0)
    eps = displacement_values(params)
    assert np.allclose(eps, coherent_part(params) + 0.9 * w.m / (2 * w.lam))
    plan = ProtocolPlan.from_params(params)
    assert np.allclose(plan.direction, w.direction)


def test_fock_cascade_on_total_photon_sector():
    res = cascade_identity_check(ModeWeights(1, 1.3, 0.8), 0.6, "fock", cutoff=10)
    assert abs(1 - res.fidelity) < 1e-12
    assert res.leakage.norm_defect < 0


def test_fock_protocol_small_case():
    params = CESParams(ModeWeights(1, 1, 1), 0.2 - 0.1j, 0.1j, 0.3, 0.5)
    _, rep = run_protocol(params, "fock", cutoff=12)
    assert rep.fidelity >= 1 - 1e-4
    assert rep.leakage.boundary_mass < DEFAULT_TOLERANCES.leakage


def test_fock_protocol_raises_on_leakage():
    params = CESParams(ModeWeights(1, 1, 1), 1.0, 0.5, 1.5, 0.5)
    with pytest.raises(LeakageError):
        run_protocol(params, "fock", cutoff=6, leakage_threshold=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        run_protocol(CESParams(ModeWeights(1, 1, 1)), "gpu")
    assert math.isfinite(protocol_angles(ModeWeights(-1, 1, 1))[0])
