"""Mathieu and Hill ground states and the dispersion/momentum bound curves.

Matrices use the standard Mathieu scaling in the angular-momentum basis:
diagonal ``4 l^2``, first band ``-q`` and second band ``r e^{i beta}``.
The characteristic value is therefore the usual ``a_0(q)`` (so
``a ~ -q^2/2`` for small ``q``), and the sign of the first band places
the potential minimum at ``phi = 0``, which makes ``<E>`` real and
positive.  Flipping that sign maps ``c_l -> (-1)^l c_l`` and leaves every
eigenvalue unchanged.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .numerics import BandedHermitian, find_root, ground_state
from .special import bessel_ratio
from .states import MAX_L, WIDEN_TAIL, PureState, Window, moments, von_mises_state

START_HALF_WIDTH = 16
EIGEN_TOL = 1e-12


@dataclass(frozen=True)
class ExtremalState:
    eigenvalue: float
    state: PureState
    q: float
    r: float
    beta: float
    tail_mass: float
    residual: float


@dataclass(frozen=True)
class CurvePoint:
    param: float
    dispersion_sq: float
    product: float


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


def hill_matrix(q, r, beta, window):
    """Banded matrix of the two-harmonic operator on ``window``."""
    l = window.indices.astype(float)
    n = window.size
    bands = [np.full(n - 1, -float(q))]
    if r != 0.0 and n > 2:
        bands.append(np.full(n - 2, float(r) * np.exp(1j * beta)))
    return BandedHermitian(4.0 * l * l, tuple(bands))


def mathieu_matrix(q, window):
    return hill_matrix(q, 0.0, 0.0, window)


def _fix_phase(v):
    # largest amplitude real and positive; ties go to the first index
    k = int(np.argmax(np.round(np.abs(v), 14)))
    phase = v[k] / abs(v[k])
    out = v / phase
    if np.all(np.abs(out.imag) <= 1e-15 * np.max(np.abs(out))):
        out = out.real
    return out


def hill_ground(q, r, beta, window=None):
    """Ground state of the Hill operator, widening ``window`` until converged.

    The window is doubled until the probability on its two edge sites is
    at most 1e-16.  Raises ``TruncationError`` past ``|l| = 2048``.
    """
    q, r, beta = float(q), float(r), float(beta)
    _check_finite(q=q, r=r, beta=beta)
    if window is None:
        window = Window.symmetric(START_HALF_WIDTH)
    while True:
        gs = ground_state(hill_matrix(q, r, beta, window), tol=EIGEN_TOL)
        amps = _fix_phase(gs.eigenvector)
        p = np.abs(amps) ** 2
        tail = float(p[0] + p[-1])
        if tail <= WIDEN_TAIL:
            break
        half = 2 * max(-window.l_min, window.l_max)
        if half > MAX_L:
            raise TruncationError(f"ground state not contained in |l| <= {MAX_L}", tail)
        window = Window.symmetric(half)
    state = PureState(window, amps / np.linalg.norm(amps))
    return ExtremalState(gs.eigenvalue, state, q, r, beta, tail, gs.residual_norm)


def mathieu_ground(q, window=None):
    """Ground state of the Mathieu operator for real ``q``.

    >>> round(mathieu_ground(0.01).eigenvalue / -5e-5, 3)
    1.0
    """
    return hill_ground(q, 0.0, 0.0, window)


def default_curve_grid(lo=1e-3, hi=1e3, n=200):
    return np.geomspace(lo, hi, n)


def mathieu_point(q):
    if q == 0.0:
        return CurvePoint(0.0, 1.0, 0.0)
    m = moments(mathieu_ground(q).state)
    d2 = 1.0 - abs(m.mean_e) ** 2
    return CurvePoint(float(q), d2, m.var_l * d2)


def mathieu_bound_curve(q_values):
    """Parametric samples ``(q, D^2, <dL^2> D^2)`` along the Mathieu family."""
    q_values = [float(q) for q in q_values]
    if any(q < 0 for q in q_values):
        raise DomainError("q values must be non-negative")
    if any(b < a for a, b in zip(q_values, q_values[1:])):
        raise DomainError("q values must be sorted")
    return [mathieu_point(q) for q in q_values]


def von_mises_point(kappa):
    kappa = float(kappa)
    if kappa < 0 or not math.isfinite(kappa):
        raise DomainError(f"kappa must be finite and non-negative, got {kappa!r}")
    r1 = bessel_ratio(1, 2.0 * kappa)
    d2 = (1.0 - r1) * (1.0 + r1)
    return CurvePoint(kappa, d2, 0.5 * kappa * r1 * d2)


def von_mises_bound_curve(kappa_values):
    """Closed-form ``(kappa, D^2, <dL^2> D^2)`` for von Mises states."""
    return [von_mises_point(k) for k in kappa_values]


def von_mises_residual(kappa, alpha, window=None, state=None):
    """Norm of ``(dL - i kappa dS_alpha) psi``, edge rows excluded.

    ``psi`` defaults to the von Mises state ``(0, alpha, kappa)``, which the
    operator annihilates; any other ``state`` gives a nonzero value.
    """
    if state is None:
        state = von_mises_state(0, alpha, kappa, window)
    c = state.amplitudes
    l = state.window.indices.astype(float)
    m = moments(state)
    # S_alpha c: (e^{-i alpha} c_{l-1} - e^{i alpha} c_{l+1}) / 2i
    sc = np.zeros_like(c, dtype=complex)
    sc[1:] += np.exp(-1j * alpha) * c[:-1]
    sc[:-1] -= np.exp(1j * alpha) * c[1:]
    sc /= 2j
    mean_s = float(np.real(np.vdot(c, sc)))
    v = (l - m.mean_l) * c - 1j * kappa * (sc - mean_s * c)
    return float(np.linalg.norm(v[1:-1]))


def _von_mises_dispersion(kappa):
    r1 = bessel_ratio(1, 2.0 * kappa)
    return (1.0 - r1) * (1.0 + r1)


def match_kappa(dispersion_sq):
    """The von Mises ``kappa`` whose dispersion equals ``dispersion_sq``."""
    if not 0.0 < dispersion_sq <= 1.0:
        raise DomainError(f"dispersion must lie in (0, 1], got {dispersion_sq!r}")
    if dispersion_sq == 1.0:
        return 0.0
    hi = 1.0
    while _von_mises_dispersion(hi) > dispersion_sq:
        hi *= 2.0
    return find_root(lambda k: _von_mises_dispersion(k) - dispersion_sq, 0.0, hi, abs_tol=1e-13 * hi)


def mathieu_vs_vonmises(q):
    """Equal-dispersion von Mises partner of the Mathieu state and their infidelity.

    Returns ``(kappa_matched, infidelity)`` with
    ``infidelity = 1 - |<mathieu|von Mises>|^2``.
    """
    q = float(q)
    if q < 0:
        raise DomainError("q must be non-negative")
    if q == 0.0:
        return 0.0, 0.0
    ce = mathieu_ground(q).state
    m = moments(ce)
    kappa = match_kappa(1.0 - abs(m.mean_e) ** 2)
    vm = von_mises_state(0, 0.0, kappa, ce.window)
    w = ce.window.union(vm.window)
    overlap = np.vdot(ce.on_window(w).amplitudes, vm.on_window(w).amplitudes)
    return kappa, max(0.0, 1.0 - abs(overlap) ** 2)
