import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bessel_series_ratio
from rotorlab.errors import DomainError, InconsistentMomentsError
from rotorlab.measures import (
    HIERARCHY_CSV_HEADER,
    Axis,
    center_of_mass,
    covariance_matrix,
    default_axes,
    dispersion,
    gamma_pm,
    hierarchy,
    inertia_tensor,
    measure_mean_axis,
    measure_optimal_axis,
    mixture_composition_check,
    moment_about_axis,
    optimal_axis,
    parallel_axis_shift,
    rotated_moments,
)
from rotorlab.states import (
    Ensemble,
    Moments,
    PureState,
    Window,
    momentum_eigenstate,
    moments,
    random_state,
    von_mises_state,
)

W = Window.symmetric(16)


def ground():
    return moments(momentum_eigenstate(0, W))


def pair():
    return moments(PureState.from_amplitudes(Window(0, 1), [1.0, 1.0]))


def vm(kappa, alpha=0.0, m=0):
    return moments(von_mises_state(m, alpha, kappa))


def random_moments(seed, half=8):
    return moments(random_state(seed, Window.symmetric(half)))


def random_mixture(seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform()
    a = random_state(int(rng.integers(2**31)), Window.symmetric(int(rng.integers(1, 10))))
    b = random_state(int(rng.integers(2**31)), Window.symmetric(int(rng.integers(1, 10))))
    return moments(Ensemble.mixture(p, a, b))


def test_dispersion_examples():
    assert dispersion(ground()) == 1.0
    assert dispersion(pair()) == pytest.approx(0.75, abs=1e-15)
    r1 = float(bessel_series_ratio(1, 2.0))
    assert dispersion(vm(1.0)) == pytest.approx(1 - r1**2, rel=1e-13)
    assert dispersion(vm(1.0)) == pytest.approx(0.51311, abs=1e-5)


def test_covariance_examples():
    g = covariance_matrix(ground())
    assert (g.var_s, g.var_c, g.cov_sc) == (0.5, 0.5, 0.0)
    g = covariance_matrix(pair())
    assert g.var_s == pytest.approx(0.5, abs=1e-15)
    assert g.var_c == pytest.approx(0.25, abs=1e-15)
    assert g.cov_sc == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kappa", [0.2, 1.0, 4.0, 25.0])
def test_von_mises_covariance_closed_form(kappa):
    g = covariance_matrix(vm(kappa))
    r1 = float(bessel_series_ratio(1, 2 * kappa))
    assert g.var_s == pytest.approx(r1 / (2 * kappa), rel=1e-10)
    assert g.cov_sc == pytest.approx(0.0, abs=1e-14)


def test_covariance_rejects_inconsistent_moments():
    bad = Moments(0.0, 0.0, 1.0 + 0j, -1.0 + 0j)
    with pytest.raises(InconsistentMomentsError):
        covariance_matrix(bad)


def test_gamma_examples():
    assert gamma_pm(ground()) == (0.5, 0.5)
    gp, gm = gamma_pm(pair())
    assert gp == pytest.approx(0.5, abs=1e-15) and gm == pytest.approx(0.25, abs=1e-15)
    for kappa in (0.3, 2.0, 9.0):
        m = vm(kappa)
        r2 = float(bessel_series_ratio(2, 2 * kappa))
        assert gamma_pm(m)[0] == pytest.approx((1 - r2) / 2, rel=1e-10)
        assert gamma_pm(m)[0] == pytest.approx(covariance_matrix(m).var_s, rel=1e-12)


@settings(max_examples=300, derandomize=True, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_gamma_are_covariance_eigenvalues(seed):
    m = random_moments(seed)
    g = covariance_matrix(m)
    gp, gm = gamma_pm(m)
    assert np.allclose(np.linalg.eigvalsh(g.matrix)[::-1], [gp, gm], atol=1e-14)
    assert g.trace == pytest.approx(dispersion(m), abs=1e-14)
    assert g.var_s >= 0 and g.var_c >= 0 and g.det >= -1e-15


def test_mean_axis_examples():
    assert measure_mean_axis(ground()) == 0.5
    assert measure_mean_axis(pair()) == pytest.approx(0.5, abs=1e-15)
    m = vm(3.0, alpha=0.8)
    assert measure_mean_axis(m) == pytest.approx(gamma_pm(m)[0], rel=1e-12)


def test_optimal_axis_examples():
    assert measure_optimal_axis(pair()) == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(optimal_axis(pair()).vector, [1.0, 0.0])
    m = vm(2.0, alpha=-1.2)
    assert measure_optimal_axis(m) == pytest.approx(measure_mean_axis(m), rel=1e-12)
    deg = optimal_axis(ground())
    assert deg.degenerate and deg.value == 0.5


@pytest.mark.parametrize("seed", range(8))
def test_optimal_axis_against_angle_grid(seed):
    m = random_moments(seed, half=4)
    g = covariance_matrix(m).matrix
    c = np.array([m.mean_c, m.mean_s])
    alphas = np.linspace(0.0, math.pi, 10_000, endpoint=False)
    x = np.stack([np.cos(alphas), np.sin(alphas)])
    ratios = (c @ x) ** 2 / np.einsum("in,ij,jn->n", x, g, x)
    best = optimal_axis(m)
    assert not best.degenerate
    assert best.robertson_ratio == pytest.approx(best.inverse_form, rel=1e-12)
    assert ratios.max() == pytest.approx(best.inverse_form, rel=1e-6)
    assert ratios.max() <= best.inverse_form * (1 + 1e-12)


def test_singular_covariance_flags_degeneracy():
    # angle supported on {0, pi}: var_s = 0 and c lies along the null direction
    m = Moments(0.0, 0.0, complex(0.6, 0.0), complex(1.0, 0.0))
    g = covariance_matrix(m)
    assert g.var_s == 0.0 and g.var_c == pytest.approx(0.64)
    res = optimal_axis(m)
    assert res.degenerate and res.value == 0.0
    assert np.allclose(np.abs(res.vector), [1.0, 0.0])


def test_rotated_moments():
    m = vm(1.5, alpha=0.4)
    mean_c, var = rotated_moments(m, 0.4)
    assert var == pytest.approx(measure_mean_axis(m), rel=1e-12)
    assert mean_c == pytest.approx(abs(m.mean_e), rel=1e-12)
    for a in np.linspace(-3, 3, 13):
        assert rotated_moments(ground(), a) == pytest.approx((0.0, 0.5), abs=1e-15)


@pytest.mark.parametrize("kappa", [0.1, 1.0, 10.0, 50.0])
def test_robertson_saturated_by_von_mises(kappa):
    m = vm(kappa)
    mean_c, var = rotated_moments(m, 0.0)
    assert m.var_l * var == pytest.approx(0.25 * mean_c**2, abs=1e-12)


def test_hierarchy_examples():
    rep = hierarchy(pair())
    assert rep.ordered and not rep.degenerate
    assert np.allclose([rep.dispersion, rep.gamma_plus, rep.mean_axis, rep.optimal_axis], [0.75, 0.5, 0.5, 0.5])
    rep = hierarchy(vm(4.0, alpha=2.0))
    assert rep.gamma_plus == pytest.approx(rep.mean_axis, rel=1e-12)
    assert rep.mean_axis == pytest.approx(rep.optimal_axis, rel=1e-12)
    rep = hierarchy(ground())
    assert rep.ordered and rep.degenerate


def test_hierarchy_csv_row():
    row = hierarchy(pair()).csv_row(seed=7)
    assert len(row) == len(HIERARCHY_CSV_HEADER)
    assert row[0] == 7 and row[-1] == "true"
    assert float(row[1]) == hierarchy(pair()).dispersion


@settings(max_examples=500, derandomize=True, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_hierarchy_random_pure(seed):
    m = random_moments(seed)
    rep = hierarchy(m)
    assert rep.ordered and min(rep.slacks) >= -1e-12
    # weak bound
    assert m.var_l * rep.dispersion >= 0.25 * (1 - rep.dispersion) - 1e-12


@settings(max_examples=200, derandomize=True, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_hierarchy_random_mixtures(seed):
    assert hierarchy(random_mixture(seed)).ordered


def test_inertia_examples():
    assert np.allclose(inertia_tensor(ground()), np.diag([0.5, 0.5, 1.0]), atol=0)
    with pytest.raises(DomainError):
        inertia_tensor(ground(), about="corner")


@pytest.mark.parametrize("seed", range(20))
def test_parallel_axis_both_ways(seed):
    m = random_moments(seed)
    a = center_of_mass(m)
    io, ig = inertia_tensor(m, "origin"), inertia_tensor(m)
    assert np.max(np.abs(io - (ig + parallel_axis_shift(a)))) <= 1e-14
    assert np.max(np.abs(ig - (io - parallel_axis_shift(a)))) <= 1e-14
    assert ig[2, 2] == pytest.approx(dispersion(m), abs=1e-15)
    assert np.all(ig[2, :2] == 0) and np.all(ig[:2, 2] == 0)
    assert np.linalg.eigvalsh(ig).min() >= -1e-14
    assert np.allclose(ig, ig.T)


def test_axis():
    with pytest.raises(DomainError):
        Axis(-0.1, 0.0)
    assert Axis(0.3, 3 * math.pi).phi_cap == pytest.approx(math.pi)
    assert np.linalg.norm(Axis(1.1, -2.0).vector) == pytest.approx(1.0, abs=1e-15)


def test_moment_about_axis_examples():
    m = random_moments(4)
    assert moment_about_axis(m, Axis(0.0, 1.0)) == pytest.approx(dispersion(m), abs=1e-14)
    phi = -np.angle(m.mean_e)
    assert moment_about_axis(m, Axis(math.pi / 2, phi)) == pytest.approx(measure_mean_axis(m), abs=1e-14)
    with pytest.raises(DomainError):
        moment_about_axis(m, Axis(0.0, 0.0), form="other")


@settings(max_examples=300, derandomize=True, deadline=None)
@given(seed=st.integers(0, 2**31), theta=st.floats(0, math.pi), phi=st.floats(-math.pi, math.pi))
def test_moment_forms_agree(seed, theta, phi):
    m = random_moments(seed)
    ax = Axis(theta, phi)
    ig = inertia_tensor(m)
    n = ax.vector
    oracle = float(np.einsum("i,ij,j->", n, ig, n))
    s, d, t = (moment_about_axis(m, ax, f) for f in ("sum", "deficit", "tensor"))
    assert abs(s - d) <= 1e-14 and abs(s - t) <= 1e-14 and abs(t - oracle) <= 1e-15
    gm = gamma_pm(m)[1]
    assert gm - 1e-14 <= s <= dispersion(m) + 1e-14


def test_mixture_composition_trivial():
    a, b = random_moments(1), random_moments(2)
    assert mixture_composition_check(0.0, a, b) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert mixture_composition_check(0.5, a, a) == pytest.approx((0.0, 0.0), abs=1e-15)
    with pytest.raises(DomainError):
        mixture_composition_check(1.5, a, b)


def test_mixture_composition_two_von_mises():
    first = von_mises_state(0, 0.0, 5.0)
    second = von_mises_state(0, 2 * math.pi / 5, 5.0)
    m1, m2 = moments(first), moments(second)
    residual, slack = mixture_composition_check(0.4, m1, m2)
    assert residual <= 1e-13
    assert slack >= -1e-12
    assert len(default_axes()) == 100
    # direct ensemble moments give the same tensor
    direct = moments(Ensemble.mixture(0.4, first, second))
    assert np.max(np.abs(inertia_tensor(direct) - inertia_tensor(m1.combine(0.4, m2)))) <= 1e-14
