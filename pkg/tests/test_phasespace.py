import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from tricoherent.gaussian import EQState, displace, fock_project, squeezed_vacuum
from tricoherent.phasespace import (
    MARGINAL_PROJECTOR_FACTOR,
    MARGINAL_PROJECTOR_FACTOR_PRINTED,
    PhasePoint,
    marginal_mc,
    marginal_p,
    marginal_x,
    wigner_element,
    wigner_grid,
    wigner_value,
)
from tricoherent.states import CESParams, ModeWeights, coherent_state, tripartite_ces

W = ModeWeights(1.0, 1.0, math.sqrt(2))


def _squeezed():
    return displace(squeezed_vacuum(3, W.direction, 0.3), np.array([0.2, 0.1j, -0.3]))


def test_vacuum_value_at_origin():
    for w in (ModeWeights(1, 1, 1), W, ModeWeights(0.6, 1.7, 1.1)):
        assert wigner_value(EQState.vacuum(3), PhasePoint(0, 0), w) == pytest.approx(w.completeness_constant / math.pi, abs=1e-14)


def test_matrix_element_matches_state_route():
    z = np.array([0.3, -0.2j, 0.4])
    pt = PhasePoint(0.4, -0.3)
    assert wigner_element(z, z, pt, W).real == pytest.approx(wigner_value(coherent_state(z), pt, W), rel=1e-12)


@pytest.mark.parametrize("make", [lambda: coherent_state([0.3, -0.2j, 0.4]), _squeezed])
def test_eqstate_and_fock_routes_agree(make):
    st_ = make()
    fock = fock_project(st_, 14)
    for pt in (PhasePoint(0.0, 0.0), PhasePoint(0.5, -0.7), PhasePoint(-1.0, 0.3)):
        assert wigner_value(fock, pt, W) == pytest.approx(wigner_value(st_, pt, W), rel=1e-7, abs=1e-12)


def test_marginals_match_quadrature():
    st_ = _squeezed()
    for x in (-0.6, 0.2, 1.1):
        val, _ = quad(lambda p: wigner_value(st_, PhasePoint(x, p), W), -12, 12, epsabs=1e-13)
        assert marginal_x(st_, x, W) == pytest.approx(val, rel=1e-9)
        val, _ = quad(lambda q: wigner_value(st_, PhasePoint(q, x), W), -12, 12, epsabs=1e-13)
        assert marginal_p(st_, x, W) == pytest.approx(val, rel=1e-9)


def test_fock_marginal_route():
    st_ = _squeezed()
    fock = fock_project(st_, 16)
    assert marginal_x(fock, 0.3, W, 0.99) == pytest.approx(marginal_x(st_, 0.3, W, 0.99), rel=1e-7)


def test_total_integral():
    st_ = _squeezed()
    val, _ = dblquad(lambda p, x: wigner_value(st_, PhasePoint(x, p), W), -8, 8, -8, 8, epsabs=1e-10)
    assert val == pytest.approx(2 * W.completeness_constant / 3, rel=1e-6)


def test_marginal_factor_constants():
    assert MARGINAL_PROJECTOR_FACTOR_PRINTED / MARGINAL_PROJECTOR_FACTOR == pytest.approx(1.5)


def test_marginal_mc_matches_regularized_closed_form():
    st_ = _squeezed()
    mc = marginal_mc(st_, 0.3, W, 0.99, 300_000, seed=4)
    assert abs(mc.value - marginal_x(st_, 0.3, W, 0.99)) < 3 * mc.stderr
    mc = marginal_mc(st_, -0.2, W, 0.99, 300_000, seed=4, kind="p")
    assert abs(mc.value - marginal_p(st_, -0.2, W, 0.99)) < 3 * mc.stderr


def test_regularized_marginal_tends_to_unregularized():
    st_ = tripartite_ces(CESParams(W, 0.2, -0.1j, 0.4, 0.8))
    gaps = [abs(marginal_x(st_, 0.5, W, s) - marginal_x(st_, 0.5, W)) for s in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_grid_and_csv():
    grid = wigner_grid(EQState.vacuum(3), (-2, 2), (-2, 2), 21, W)
    peak = grid.argmax()
    assert (peak.x, peak.p) == (0.0, 0.0)
    text = grid.to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,p,value" and len(lines) == 1 + 21 * 21
    assert grid.integral() == pytest.approx(2 * W.completeness_constant / 3, rel=5e-3)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        PhasePoint(float("nan"), 0)
    with pytest.raises(ValueError):
        marginal_x(EQState.vacuum(3), 0.0, W, 1.5)
    with pytest.raises(TypeError):
        wigner_value("vacuum", PhasePoint(0, 0), W)
