"""Simultaneous measurement of angle and momentum with an ancilla rotor.

The signal ``s`` and ancilla ``a`` are measured through the commuting pair
``L_s + L_a`` and ``E_s E_a^dagger``.  For a product input the joint
uncertainties follow from single-rotor moments; this module assembles them,
bounds the resulting products and searches the ancilla parameter for the
points where the best signal changes character.

The ancilla must be phase aligned: ``<E_a>`` and ``<E_a^2>`` real and
non-negative, which holds for Mathieu and von Mises states centred at
``phi = 0``.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import BracketError, DomainError, PreconditionError
from .measures import dispersion, measure_mean_axis
from .numerics import find_root, minimize_scalar
from .special import bessel_ratio
from .spectral import mathieu_ground
from .states import Moments, moments, wrap_angle

PHASE_TOL = 1e-10
MODES = ("dispersion", "sine")
FAMILIES = ("mathieu", "vonmises")
DEFAULT_FAMILY = {"dispersion": "mathieu", "sine": "vonmises"}
SIGNAL_FLOOR = 1e-4
SIGNAL_CAP = {"mathieu": 1e3, "vonmises": 1e2}
# ancilla ranges scanned for the critical points
SCAN_RANGE = {"mathieu": (0.5, 50.0), "vonmises": (0.3, 20.0)}


@dataclass(frozen=True)
class JointUncertainties:
    var_l_total: float
    dispersion_total: float
    var_s_total: float
    beta: float


@dataclass(frozen=True)
class BranchPair:
    a1: float
    a2: float


@dataclass(frozen=True)
class CriticalPoint:
    ancilla_param: float
    ancilla_dispersion_sq: float
    product: float
    kind: str


@dataclass(frozen=True)
class BoundRow:
    """One ancilla value of a bound curve.

    ``branch1`` is the momentum-eigenstate signal value, ``branch2`` the
    value with the signal fixed by the matching condition.  ``gap`` is
    ``bound - product_min`` when the minimum was computed.
    """

    ancilla_param: float
    ancilla_D2: float
    branch1: float
    branch2: float
    bound: float
    matched_signal_param: float
    product_min: float = math.nan
    gap: float = math.nan


BOUND_CSV_HEADER = (
    "ancilla_param", "ancilla_D2", "branch1", "branch2", "bound",
    "matched_signal_param", "product_min", "gap",
)
CRITICAL_CSV_HEADER = ("mode", "kind", "ancilla_param", "ancilla_D2", "product")


def _check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def _check_family(family):
    if family not in FAMILIES:
        raise DomainError(f"family must be one of {FAMILIES}, got {family!r}")


def check_ancilla_phase(ancilla):
    """Raise ``PreconditionError`` unless ``<E_a>`` and ``<E_a^2>`` are real and non-negative."""
    for name, value in (("arg<E_a>", ancilla.mean_e), ("arg<E_a^2>", ancilla.mean_e2)):
        if abs(value) <= PHASE_TOL:
            continue
        phase = float(np.angle(value))
        if abs(phase) > PHASE_TOL:
            raise PreconditionError(f"ancilla phase {name} = {phase!r} must vanish")


def _sine_var(m):
    return measure_mean_axis(m)


def joint_uncertainties(signal, ancilla):
    check_ancilla_phase(ancilla)
    d2_s, d2_a = dispersion(signal), dispersion(ancilla)
    ea = abs(ancilla.mean_e)
    beta = wrap_angle(float(np.angle(ancilla.mean_e) - np.angle(signal.mean_e)))
    return JointUncertainties(
        var_l_total=signal.var_l + ancilla.var_l,
        dispersion_total=min(ea * ea * d2_s + d2_a, 1.0),
        var_s_total=abs(ancilla.mean_e2) * _sine_var(signal) + _sine_var(ancilla),
        beta=beta,
    )


def product(signal, ancilla, mode):
    """Joint uncertainty product in the dispersion or sine measure."""
    _check_mode(mode)
    ju = joint_uncertainties(signal, ancilla)
    if mode == "dispersion":
        return ju.var_l_total * ju.dispersion_total
    return ju.var_l_total * ju.var_s_total


def branch_bounds(signal, ancilla, mode, b_s=None, b_a=None):
    """The two Cauchy-Schwarz lower bounds on the joint product.

    For ``mode="dispersion"`` the second branch uses ``b_s`` and ``b_a``,
    the single-rotor products ``<dL^2> D^2``; they default to the values of
    the given states.  The sine-mode formulas assume the signal's second
    moment is aligned with its first, as for the two state families.
    """
    _check_mode(mode)
    ls, la = math.sqrt(signal.var_l), math.sqrt(ancilla.var_l)
    es, ea = abs(signal.mean_e), abs(ancilla.mean_e)
    if mode == "dispersion":
        ds, da = math.sqrt(dispersion(signal)), math.sqrt(dispersion(ancilla))
        b_s = signal.var_l * dispersion(signal) if b_s is None else b_s
        b_a = ancilla.var_l * dispersion(ancilla) if b_a is None else b_a
        if b_s < 0 or b_a < 0:
            raise DomainError("branch inputs must be non-negative")
        return BranchPair((es * ls * da + la * ds) ** 2, (ea * math.sqrt(b_s) + math.sqrt(b_a)) ** 2)
    ss, sa = math.sqrt(_sine_var(signal)), math.sqrt(_sine_var(ancilla))
    e2s, e2a = abs(signal.mean_e2), abs(ancilla.mean_e2)
    return BranchPair((math.sqrt(e2s) * ls * sa + la * ss) ** 2, 0.25 * (math.sqrt(e2a) * es + ea) ** 2)


def matching_residual(signal, ancilla, which):
    """Signed ``lhs - rhs`` of a Cauchy-Schwarz saturation condition.

    ``which`` is one of ``d_sa``, ``d_as`` (dispersion) or ``s_sa``,
    ``s_as`` (sine).
    """
    ls, la = math.sqrt(signal.var_l), math.sqrt(ancilla.var_l)
    if which in ("d_sa", "d_as"):
        xs, xa = math.sqrt(dispersion(signal)), math.sqrt(dispersion(ancilla))
        ws, wa = abs(signal.mean_e), abs(ancilla.mean_e)
    elif which in ("s_sa", "s_as"):
        xs, xa = math.sqrt(_sine_var(signal)), math.sqrt(_sine_var(ancilla))
        ws, wa = math.sqrt(abs(signal.mean_e2)), math.sqrt(abs(ancilla.mean_e2))
    else:
        raise DomainError(f"unknown matching condition {which!r}")
    if which.endswith("sa"):
        return ls * xs - ws * la * xa
    return ls * xa - wa * la * xs


@lru_cache(maxsize=4096)
def _mathieu_moments(q):
    return moments(mathieu_ground(q).state)


def family_moments(family, param):
    """Moments of the ``param``-th member of a state family centred at ``phi = 0``.

    Von Mises moments come from Bessel ratios; Mathieu moments from the
    ground state (memoised).
    """
    _check_family(family)
    param = float(param)
    if param < 0 or not math.isfinite(param):
        raise DomainError(f"family parameter must be finite and non-negative, got {param!r}")
    if family == "mathieu":
        return _mathieu_moments(param)
    r1 = bessel_ratio(1, 2.0 * param)
    r2 = bessel_ratio(2, 2.0 * param)
    return Moments(0.0, 0.5 * param * r1, complex(r1, 0.0), complex(r2, 0.0))


def boundary_value(ancilla, mode):
    """Product for a momentum-eigenstate signal: ``<dL_a^2>``, halved in sine mode."""
    return ancilla.var_l if mode == "dispersion" else 0.5 * ancilla.var_l


def minimize_over_signal(ancilla_param, family=None, mode="dispersion", signal_family=None):
    """Smallest joint product over signals from ``signal_family``.

    The boundary signal (parameter 0, a momentum eigenstate) is compared
    with the best interior signal on ``[1e-4, cap]``.  Returns
    ``(signal_param, product_min)``.
    """
    _check_mode(mode)
    family = family or DEFAULT_FAMILY[mode]
    signal_family = signal_family or family
    ancilla = family_moments(family, ancilla_param)
    boundary = boundary_value(ancilla, mode)
    x, y = _interior_minimum(ancilla, signal_family, mode)
    if y < boundary:
        return x, y
    return 0.0, boundary


def _interior_minimum(ancilla, signal_family, mode):
    def f(x):
        return product(family_moments(signal_family, x), ancilla, mode)

    return minimize_scalar(f, SIGNAL_FLOOR, SIGNAL_CAP[signal_family])


def matched_signal_param(ancilla, mode, signal_family):
    """Signal parameter saturating the branch-2 Cauchy-Schwarz step."""
    if mode == "sine" and signal_family == "vonmises":
        # closed form of the s_as condition within the von Mises family
        # <dL^2> = kappa r1 / 2 recovers kappa_a from the moments
        if ancilla.var_l == 0.0:
            return 0.0
        kappa_a = 2.0 * ancilla.var_l / abs(ancilla.mean_e)
        return math.sqrt(abs(ancilla.mean_e2)) * kappa_a
    which = "d_as" if mode == "dispersion" else "s_as"
    if ancilla.var_l == 0.0:
        return 0.0

    def f(x):
        return matching_residual(family_moments(signal_family, x), ancilla, which)

    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > SIGNAL_CAP[signal_family] * 16:
            raise BracketError("matching condition has no root below the signal cap", [(hi, f(hi))])
    return find_root(f, 0.0, hi, abs_tol=1e-12 * hi)


def _branches(ancilla_param, mode, family, signal_family):
    ancilla = family_moments(family, ancilla_param)
    x = matched_signal_param(ancilla, mode, signal_family)
    signal = family_moments(signal_family, x)
    b1 = boundary_value(ancilla, mode)
    b2 = branch_bounds(signal, ancilla, mode).a2
    return ancilla, x, b1, b2


def bound_curve(ancilla_grid, mode, family=None, signal_family=None, with_minimum=False):
    """Piecewise bound over the ancilla parameter as a list of :class:`BoundRow`."""
    _check_mode(mode)
    family = family or DEFAULT_FAMILY[mode]
    signal_family = signal_family or family
    grid = [float(v) for v in ancilla_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("ancilla grid must be sorted")
    rows = []
    for p in grid:
        ancilla, x, b1, b2 = _branches(p, mode, family, signal_family)
        row = BoundRow(p, dispersion(ancilla), b1, b2, min(b1, b2), x)
        if with_minimum:
            _, pmin = minimize_over_signal(p, family, mode, signal_family)
            row = replace(row, product_min=pmin, gap=row.bound - pmin)
        rows.append(row)
    return rows


def _scan_root(g, lo, hi, n=24):
    xs = np.geomspace(lo, hi, n)
    ys = [g(x) for x in xs]
    for k in range(n - 1):
        if ys[k] == 0.0:
            return float(xs[k])
        if ys[k] * ys[k + 1] < 0.0:
            return find_root(g, float(xs[k]), float(xs[k + 1]), abs_tol=1e-10 * xs[k + 1])
    raise BracketError("no sign change found in the scanned ancilla range", list(zip(xs.tolist(), ys)))


def critical_points(mode, family=None, signal_family=None, scan=None):
    """Branch intersection and sharp point of the bound in ``mode``.

    The intersection is where the two branches of :func:`bound_curve`
    cross.  The sharp point is where the best interior signal starts to
    beat the momentum-eigenstate signal.  ``scan`` overrides the scanned
    ancilla range ``(lo, hi)``.
    """
    _check_mode(mode)
    family = family or DEFAULT_FAMILY[mode]
    signal_family = signal_family or family
    lo, hi = scan or SCAN_RANGE[family]

    def branch_gap(p):
        _, _, b1, b2 = _branches(p, mode, family, signal_family)
        return b1 - b2

    def sharp_gap(p):
        ancilla = family_moments(family, p)
        return _interior_minimum(ancilla, signal_family, mode)[1] - boundary_value(ancilla, mode)

    points = []
    for kind, g in (("intersection", branch_gap), ("sharp", sharp_gap)):
        p = _scan_root(g, lo, hi)
        ancilla = family_moments(family, p)
        points.append(CriticalPoint(p, dispersion(ancilla), boundary_value(ancilla, mode), kind))
    return tuple(points)
