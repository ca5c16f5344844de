import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tricoherent.exceptions import LeakageError
from tricoherent.fock import FockState, flat_index
from tricoherent.gaussian import fock_project
from tricoherent.squeezing import (
    FockSqueezer,
    SqueezeParams,
    closed_form_variances,
    compare_forms,
    conjugated_quadrature,
    conjugation_defect,
    inverse_squeezed_vacuum,
    quadrature_rule,
    squeeze_ces,
    squeeze_operator,
    squeezed_vacuum_variances,
    squeezing_inequalities,
    su11_check,
    vacuum_convention_report,
)
from tricoherent.states import CESParams, ModeWeights

weights_st = st.tuples(*(st.floats(0.5, 2.0) for _ in range(3))).map(lambda t: ModeWeights(*t))
small_c = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


@given(st.floats(-2, 2))
def test_hyperbolic_identities(zeta):
    p = SqueezeParams.from_zeta(zeta, ModeWeights(1, 1, 1))
    assert max(p.identity_defects()) < 1e-14
    assert p.zeta == pytest.approx(zeta, abs=1e-14)


def test_eta_must_be_positive():
    with pytest.raises(ValueError):
        SqueezeParams(0.0, ModeWeights(1, 1, 1))


def test_su11_relations_on_interior():
    for w in (ModeWeights(1, 1, 1), ModeWeights(2, 1, 1), ModeWeights(0.5, 2, 0.7)):
        rep = su11_check(w, 8)
        assert rep["R_Rdag_interior"] < 1e-12
        assert rep["su11_interior"] < 1e-12
        assert rep["su11_boundary"] > 1


def test_factored_form_balanced_weights():
    p = SqueezeParams.from_zeta(0.3, ModeWeights(1, 1, 1))
    assert compare_forms(p, cutoff=20).max_abs_error < 1e-8


def test_factored_form_is_exact_on_kept_tuples():
    # the factored form does not depend on the cutoff on low-photon inputs
    p = SqueezeParams.from_zeta(0.5, ModeWeights(2, 1, 1))
    small, large = FockSqueezer(p, 10), FockSqueezer(p, 14)
    occ = (1, 2, 0)
    vs = FockState.basis(occ, 10).vector
    vl = FockState.basis(occ, 14).vector
    out_s, out_l = small.apply_factored(vs), large.apply_factored(vl)
    idx_s = [flat_index((i, j, k), 10) for i in range(4) for j in range(4) for k in range(4)]
    idx_l = [flat_index((i, j, k), 14) for i in range(4) for j in range(4) for k in range(4)]
    assert np.allclose(out_s[idx_s], out_l[idx_l], atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(weights_st, small_c, small_c, st.floats(-2, 2), st.floats(0.4, 2.5))
def test_squeeze_relabels_unit_regularized_state(w, beta, gamma, x, eta):
    _, _, err = squeeze_ces(CESParams(w, beta, gamma, x, 1.0), eta)
    assert err <= 1e-10


def test_squeeze_relabel_needs_unit_regularization():
    _, _, err = squeeze_ces(CESParams(ModeWeights(1, 1, 1), 0.2, 0.1, 0.5, 0.8), 1.4)
    assert err > 1e-3


@pytest.mark.parametrize("kind", ["X", "P"])
def test_quadrature_rule_matches_conjugation(kind):
    p = SqueezeParams.from_zeta(0.4, ModeWeights(1.2, 0.8, 1.5))
    for mode in range(3):
        a = conjugated_quadrature(mode, kind, p)
        b = quadrature_rule(mode, kind, p)
        assert np.allclose(a.u, b.u, atol=1e-14) and np.allclose(a.u_dag, b.u_dag, atol=1e-14)


def test_conjugation_rule_in_fock_space():
    p = SqueezeParams.from_zeta(0.3, ModeWeights(1, 1, 1))
    assert conjugation_defect(0, p, cutoff=20) < 1e-8


def test_analytic_squeezer_matches_fock_on_vacuum():
    w = ModeWeights(1.4, 0.9, 1.1)
    p = SqueezeParams.from_zeta(0.3, w)
    analytic = squeeze_operator(p)(fock_state := inverse_squeezed_vacuum(w, 0.0))
    fock = squeeze_operator(p, "fock", cutoff=16).apply(FockState.vacuum(3, 16).vector)
    ref = fock_project(analytic, 16).vector
    idx = [flat_index((i, j, k), 16) for i in range(5) for j in range(5) for k in range(5)]
    assert np.allclose(fock[idx], ref[idx], atol=1e-10)
    assert fock_state.n_modes == 3


@pytest.mark.parametrize("weights", [(1, 1, 1), (2, 1, 1), (0.7, 1.3, 1.9)])
@pytest.mark.parametrize("zeta", [0.1, 0.3, 0.5])
def test_variances_match_closed_form(weights, zeta):
    w = ModeWeights(*weights)
    rep = squeezed_vacuum_variances(w, zeta)
    assert rep.max_error <= 1e-6
    assert abs(rep.mean_x) < 1e-12 and abs(rep.mean_p) < 1e-12


@pytest.mark.parametrize("zeta", [0.0, 0.2, 0.5])
def test_balanced_special_case(zeta):
    vx, vp, prod = closed_form_variances(ModeWeights(1, 1, 1), zeta)
    assert vx == pytest.approx(1.5 * math.exp(2 * zeta), abs=1e-12)
    assert vp == pytest.approx(1.5 * math.exp(-2 * zeta), abs=1e-12)
    assert prod == pytest.approx(2.25, abs=1e-12)


def test_variance_leakage_guard():
    with pytest.raises(LeakageError):
        squeezed_vacuum_variances(ModeWeights(1, 1, 1), 1.5, cutoff=8)


@settings(max_examples=50, deadline=None)
@given(weights_st, st.floats(0.0, 1.0))
def test_inequalities_consistent(w, zeta):
    assert squeezing_inequalities(w, zeta).consistent


def test_inequality_equality_only_for_balanced():
    assert squeezing_inequalities(ModeWeights(1, 1, 1), 0.4).x_equal
    rep = squeezing_inequalities(ModeWeights(2, 1, 1), 0.4)
    assert rep.x_holds and rep.p_holds and not rep.x_equal


def test_vacuum_convention():
    rep = vacuum_convention_report(ModeWeights(1.2, 0.9, 1.4), 0.35)
    assert min(rep.values()) < 1e-14
    assert isinstance(rep, dict)
