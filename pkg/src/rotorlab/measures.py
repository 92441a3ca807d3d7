"""Angular uncertainty measures built from the moments of ``E``.

Every function takes a :class:`~rotorlab.states.Moments`, so pure states and
mixtures go through the same code.  The mean vector is ``c = (<C>, <S>)``
and an in-plane direction is ``x = (cos a, sin a)``, so that
``<C_a> = c . x`` and ``<(dS_a)^2> = x^T G x``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentMomentsError
from .states import wrap_angle

DEGENERATE_E = 1e-12
PSD_TOL = 1e-12
ORDER_SLACK = 1e-12

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class CovMatrix2:
    """Covariance of the sine and cosine operators.

    ``cov_sc`` is minus the symmetrised covariance of ``S`` and ``C``; with
    this sign ``x^T G x`` is the variance of ``S_a`` for ``x = (cos a, sin a)``.
    """

    var_s: float
    var_c: float
    cov_sc: float

    @property
    def matrix(self):
        return np.array([[self.var_s, self.cov_sc], [self.cov_sc, self.var_c]])

    @property
    def trace(self):
        return self.var_s + self.var_c

    @property
    def det(self):
        return self.var_s * self.var_c - self.cov_sc**2


@dataclass(frozen=True)
class Axis:
    """Unit axis with polar angle ``theta`` and azimuth ``phi_cap``."""

    theta: float
    phi_cap: float

    def __post_init__(self):
        theta = float(self.theta)
        if not 0.0 <= theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {theta}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi_cap", wrap_angle(float(self.phi_cap)))

    @property
    def vector(self):
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi_cap), st * math.sin(self.phi_cap), math.cos(self.theta)])


HIERARCHY_CSV_HEADER = ("seed", "D2", "gamma_plus", "mean_axis", "optimal_axis", "ordered")


@dataclass(frozen=True)
class HierarchyReport:
    dispersion: float
    gamma_plus: float
    mean_axis: float
    optimal_axis: float
    ordered: bool
    degenerate: bool

    @property
    def slacks(self):
        """Consecutive gaps of the chain; all are >= -1e-12 when ordered."""
        return (
            self.dispersion - self.gamma_plus,
            self.gamma_plus - self.mean_axis,
            self.mean_axis - self.optimal_axis,
        )

    def csv_row(self, seed=""):
        return [
            seed,
            repr(self.dispersion),
            repr(self.gamma_plus),
            repr(self.mean_axis),
            repr(self.optimal_axis),
            str(self.ordered).lower(),
        ]


@dataclass(frozen=True)
class OptimalAxis:
    """Minimising in-plane axis and its diagnostics.

    ``robertson_ratio`` is ``(c . x)^2 / (x^T G x)`` at the axis and
    ``inverse_form`` is ``c^T G^{-1} c``; the two agree for a regular ``G``.
    """

    vector: np.ndarray
    value: float
    degenerate: bool
    robertson_ratio: float
    inverse_form: float


def mean_vector(m):
    """``c = (<C>, <S>)``."""
    return np.array([m.mean_c, m.mean_s])


def dispersion(m):
    """``1 - |<E>|^2``."""
    return min(max(1.0 - abs(m.mean_e) ** 2, 0.0), 1.0)


def covariance_matrix(m):
    e2 = m.mean_e2
    c, s = m.mean_c, m.mean_s
    var_s = 0.5 * (1.0 - e2.real) - s * s
    var_c = 0.5 * (1.0 + e2.real) - c * c
    # <SC>_sym = -Im<E^2>/2
    cov = -(-0.5 * e2.imag - s * c)
    g = CovMatrix2(var_s, var_c, cov)
    if var_s < -PSD_TOL or var_c < -PSD_TOL or g.det < -PSD_TOL:
        raise InconsistentMomentsError(
            f"covariance matrix is not positive semidefinite: {var_s!r}, {var_c!r}, {cov!r}"
        )
    return g


def gamma_pm(m):
    """Eigenvalues ``(gamma_plus, gamma_minus)`` of the covariance matrix."""
    d2 = dispersion(m)
    split = abs(m.mean_e2 - m.mean_e**2)
    return 0.5 * (d2 + split), max(0.5 * (d2 - split), 0.0)


def _degenerate(m):
    return abs(m.mean_e) <= DEGENERATE_E


def measure_mean_axis(m):
    """Variance of the sine operator rotated onto the mean direction.

    Falls back to ``gamma_minus`` when ``|<E>| <= 1e-12``.
    """
    if _degenerate(m):
        return gamma_pm(m)[1]
    c = mean_vector(m)
    u = c / np.linalg.norm(c)
    return float(u @ covariance_matrix(m).matrix @ u)


def optimal_axis(m):
    g = covariance_matrix(m).matrix
    if _degenerate(m):
        gm = gamma_pm(m)[1]
        w, v = np.linalg.eigh(g)
        return OptimalAxis(v[:, 0], gm, True, 0.0, 0.0)
    c = mean_vector(m)
    adj = J @ g @ J.T
    x = adj @ c
    nx = np.linalg.norm(x)
    det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    if nx <= 1e-300:
        # G vanishes on the plane; nothing to optimise
        u = c / np.linalg.norm(c)
        return OptimalAxis(u, 0.0, True, math.inf, math.inf)
    x = x / nx
    value = float(x @ g @ x)
    if det <= PSD_TOL * PSD_TOL:
        return OptimalAxis(x, max(value, 0.0), True, math.inf, math.inf)
    ratio = float((c @ x) ** 2 / value)
    inverse_form = float(c @ np.linalg.solve(g, c))
    return OptimalAxis(x, value, False, ratio, inverse_form)


def measure_optimal_axis(m):
    """Variance of ``S_a`` along the axis that maximises ``<C_a>^2 / <(dS_a)^2>``."""
    return optimal_axis(m).value


def rotated_moments(m, alpha):
    """``(<C_a>, <(dS_a)^2>)`` for the operators rotated by ``alpha``."""
    x = np.array([math.cos(alpha), math.sin(alpha)])
    g = covariance_matrix(m).matrix
    return float(mean_vector(m) @ x), max(float(x @ g @ x), 0.0)


def hierarchy(m):
    d2 = dispersion(m)
    gp, _ = gamma_pm(m)
    ma = measure_mean_axis(m)
    oa = measure_optimal_axis(m)
    ordered = d2 - gp >= -ORDER_SLACK and gp - ma >= -ORDER_SLACK and ma - oa >= -ORDER_SLACK
    return HierarchyReport(d2, gp, ma, oa, bool(ordered), _degenerate(m))


def parallel_axis_shift(a):
    """``|a|^2 1 - a a^T``: the tensor added when moving away from the centre of mass."""
    a = np.asarray(a, dtype=float)
    return (a @ a) * np.eye(3) - np.outer(a, a)


def inertia_tensor(m, about="center_of_mass"):
    """Inertia tensor of the unit ring weighted by the angular distribution.

    ``about`` is ``"origin"`` or ``"center_of_mass"``.
    """
    if about == "origin":
        e2 = m.mean_e2
        s2 = 0.5 * (1.0 - e2.real)
        c2 = 0.5 * (1.0 + e2.real)
        sc = -0.5 * e2.imag
        return np.array([[s2, -sc, 0.0], [-sc, c2, 0.0], [0.0, 0.0, 1.0]])
    if about == "center_of_mass":
        out = np.zeros((3, 3))
        out[:2, :2] = covariance_matrix(m).matrix
        out[2, 2] = dispersion(m)
        return out
    raise DomainError(f"unknown reference point {about!r}")


def center_of_mass(m):
    return np.array([m.mean_c, m.mean_s, 0.0])


def moment_about_axis(m, axis, form="sum"):
    """Moment of inertia about ``axis`` through the centre of mass.

    ``form`` picks the evaluation route: ``"sum"`` adds the cosine variance
    weighted by ``cos^2 theta`` to the sine variance, ``"deficit"`` subtracts
    ``sin^2 theta`` times the cosine variance from ``D^2`` and ``"tensor"``
    contracts the full inertia tensor.
    """
    if form == "tensor":
        n = axis.vector
        return float(n @ inertia_tensor(m) @ n)
    g = covariance_matrix(m).matrix
    cp, sp = math.cos(axis.phi_cap), math.sin(axis.phi_cap)
    var_c = float(np.array([sp, -cp]) @ g @ np.array([sp, -cp]))
    if form == "sum":
        var_s = float(np.array([cp, sp]) @ g @ np.array([cp, sp]))
        return var_s + math.cos(axis.theta) ** 2 * var_c
    if form == "deficit":
        return dispersion(m) - math.sin(axis.theta) ** 2 * var_c
    raise DomainError(f"unknown form {form!r}")


def default_axes(n_theta=10, n_phi=10):
    """Product grid of ``n_theta * n_phi`` axes (100 by default)."""
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(-math.pi, math.pi, n_phi, endpoint=False) + math.pi / n_phi
    return [Axis(t, p) for t in thetas for p in phis]


def mixture_composition_check(p, m1, m2, axes=None):
    """Compare the mixture's inertia tensor with the weighted composition rule.

    Returns ``(tensor_residual, concavity_slack)``: the largest entry of the
    difference between the two tensors, and the smallest value of
    ``M(mix) - p M(1) - (1 - p) M(2)`` over ``axes``.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"weight must lie in [0, 1], got {p}")
    mix = m1.combine(p, m2)
    r = center_of_mass(m2) - center_of_mass(m1)
    composed = p * inertia_tensor(m1) + (1 - p) * inertia_tensor(m2) + p * (1 - p) * parallel_axis_shift(r)
    residual = float(np.max(np.abs(inertia_tensor(mix) - composed)))
    axes = default_axes() if axes is None else axes
    slack = min(
        moment_about_axis(mix, ax) - p * moment_about_axis(m1, ax) - (1 - p) * moment_about_axis(m2, ax)
        for ax in axes
    )
    return residual, float(slack)
