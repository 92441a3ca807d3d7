import math

import numpy as np
import pytest
import scipy.special

from oracles import potential_matrix_eigh
from rotorlab import spectral
from rotorlab.errors import DomainError, TruncationError
from rotorlab.spectral import (
    default_curve_grid,
    hill_ground,
    hill_matrix,
    match_kappa,
    mathieu_bound_curve,
    mathieu_ground,
    mathieu_vs_vonmises,
    von_mises_bound_curve,
    von_mises_residual,
)
from rotorlab.states import PureState, Window, moments, von_mises_state


def overlap(a, b):
    w = a.window.union(b.window)
    return abs(np.vdot(a.on_window(w).amplitudes, b.on_window(w).amplitudes))


@pytest.mark.parametrize("q, r, beta", [(0.1, 0, 0), (1, 0, 0), (10, 0, 0), (100, 0, 0), (1, 1, 0), (1, 1, math.pi / 3)])
def test_against_dense_oracle(q, r, beta):
    ext = hill_ground(q, r, beta)
    half = 2 * ext.state.window.l_max
    a, vec = potential_matrix_eigh(q, r, beta, half)
    assert ext.eigenvalue == pytest.approx(a, abs=1e-10)
    oracle = PureState.from_amplitudes(Window.symmetric(half), vec)
    assert overlap(ext.state, oracle) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("q", [0.5, 3.0, 25.0, 400.0])
def test_standard_characteristic_value(q):
    assert mathieu_ground(q).eigenvalue == pytest.approx(scipy.special.mathieu_a(0, q), rel=1e-12)


def test_free_rotor_and_small_q():
    ext = mathieu_ground(0.0)
    assert ext.eigenvalue == pytest.approx(0.0, abs=1e-14)
    assert abs(ext.state.amplitude(0)) == pytest.approx(1.0, abs=1e-14)
    q = 0.01
    assert mathieu_ground(q).eigenvalue == pytest.approx(-q * q / 2, rel=0.01)


@pytest.mark.parametrize("q, r, beta", [(0.3, 0, 0), (10, 0, 0), (1000, 0, 0), (1, 1, math.pi / 3), (20, 7, 2.0)])
def test_window_doubling(q, r, beta):
    ext = hill_ground(q, r, beta)
    wider = hill_ground(q, r, beta, Window.symmetric(2 * ext.state.window.l_max))
    assert abs(ext.eigenvalue - wider.eigenvalue) <= 1e-11
    assert overlap(ext.state, wider.state) == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("q", [0.2, 9.3, 150.0])
def test_mathieu_state_invariants(q):
    ext = mathieu_ground(q)
    c = ext.state.amplitudes
    assert np.all(c.imag == 0)
    c = c.real
    assert np.max(np.abs(c - c[::-1])) <= 1e-12
    assert np.all(c > 0)
    m = moments(ext.state)
    assert abs(m.mean_l) <= 1e-12
    assert m.mean_e.real > 0 and m.mean_e.imag == 0
    assert ext.tail_mass <= 1e-14
    assert ext.residual <= 1e-10 * max(1.0, abs(ext.eigenvalue))


def test_hill_reductions():
    for q in (0.7, 12.0):
        assert hill_ground(q, 0.0, 1.3).eigenvalue == pytest.approx(mathieu_ground(q).eigenvalue, abs=1e-12)
    ext = hill_ground(0.0, 2.0, 0.0)
    c = ext.state.amplitudes
    assert np.max(np.abs(c - c[::-1])) <= 1e-12
    odd = ext.state.window.indices % 2 == 1
    assert np.max(np.abs(c[odd])) <= 1e-12
    assert np.all(hill_matrix(0.0, 2.0, 0.0, Window.symmetric(4)).bands[0] == 0)
    assert abs(moments(hill_ground(1, 1, math.pi / 3).state).mean_l) <= 1e-12


def test_hill_matrix_bands():
    h = hill_matrix(2.0, 3.0, 0.5, Window.symmetric(2)).to_dense()
    assert h[0, 1] == -2.0
    assert h[0, 2] == pytest.approx(3.0 * np.exp(0.5j))
    assert h[2, 0] == pytest.approx(3.0 * np.exp(-0.5j))
    assert np.allclose(np.diag(h), [16, 4, 0, 4, 16])


def test_widening_cap(monkeypatch):
    monkeypatch.setattr(spectral, "MAX_L", 32)
    with pytest.raises(TruncationError):
        mathieu_ground(1e5)
    with pytest.raises(DomainError):
        mathieu_ground(math.nan)


def test_mathieu_curve_properties():
    q = default_curve_grid()
    assert len(q) == 200 and q[0] == pytest.approx(1e-3) and q[-1] == pytest.approx(1e3)
    pts = mathieu_bound_curve(q)
    d2 = np.array([p.dispersion_sq for p in pts])
    prod = np.array([p.product for p in pts])
    var_l = prod / d2
    assert np.all(np.diff(d2) < 0) and np.all(np.diff(var_l) > 0)
    assert np.all(prod >= 0.25 * (1 - d2) - 1e-12)
    assert np.all((d2 > 0) & (d2 <= 1))
    first = mathieu_bound_curve([0.0])[0]
    assert (first.dispersion_sq, first.product) == (1.0, 0.0)
    assert mathieu_bound_curve([1e4])[0].product == pytest.approx(0.25, rel=0.01)
    with pytest.raises(DomainError):
        mathieu_bound_curve([2.0, 1.0])


def test_von_mises_curve():
    zero, one = von_mises_bound_curve([0.0, 1.0])
    assert (zero.dispersion_sq, zero.product) == (1.0, 0.0)
    assert one.dispersion_sq == pytest.approx(0.51311, abs=1e-5)
    assert one.product == pytest.approx(0.17903, abs=2e-5)
    for kappa in (0.1, 2.0, 20.0):
        pt = von_mises_bound_curve([kappa])[0]
        m = moments(von_mises_state(0, 0.0, kappa))
        d2 = 1 - abs(m.mean_e) ** 2
        assert pt.dispersion_sq == pytest.approx(d2, rel=1e-10)
        assert pt.product == pytest.approx(m.var_l * d2, rel=1e-10)


def test_mathieu_below_von_mises_at_equal_dispersion():
    for q in np.geomspace(1e-2, 1e3, 25):
        pt = mathieu_bound_curve([q])[0]
        kappa = match_kappa(pt.dispersion_sq)
        vm = von_mises_bound_curve([kappa])[0]
        assert vm.dispersion_sq == pytest.approx(pt.dispersion_sq, abs=1e-12)
        assert pt.product - vm.product <= 1e-10


def test_von_mises_residual():
    assert von_mises_residual(0.0, 0.0) == 0.0
    assert von_mises_residual(5.0, 0.0, Window.symmetric(60)) <= 1e-10
    assert von_mises_residual(3.0, 1.1) <= 1e-10
    wrong = PureState.from_amplitudes(Window(0, 1), [1.0, 1.0]).on_window(Window.symmetric(3))
    assert von_mises_residual(5.0, 0.0, state=wrong) > 0.5


def test_mathieu_vs_von_mises():
    assert mathieu_vs_vonmises(0.0) == (0.0, 0.0)
    # q = 20 here is q = 10 for the unscaled operator -d^2 + q cos
    kappa, inf = mathieu_vs_vonmises(20.0)
    assert kappa > 0 and inf <= 1e-3
    sweep = [mathieu_vs_vonmises(q)[1] for q in np.linspace(0, 100, 41)]
    assert max(sweep) <= 0.01
    assert np.max(np.abs(np.diff(sweep))) < 2e-3
