"""Rotor states in a truncated angular-momentum basis.

Conventions used throughout the package:

* basis ``|l>`` for integers ``l`` in a window ``[l_min, l_max]`` containing 0;
* shift operator ``E|l> = |l - 1>``, so that ``[E, L] = E``;
* angle eigenstates ``|phi> = sum_l exp(-i l phi) |l> / sqrt(2 pi)``, so
  ``E`` acts as ``exp(-i phi)`` and ``C = cos(phi)``, ``S = sin(phi)``;
* displacement ``D(m, phi) = exp(-i L phi) E^{-m}``, acting on amplitudes as
  ``c_l -> exp(-i l phi) c_{l - m}``.

States are immutable.  Mixed states are weighted ensembles of pure states,
and every derived quantity is computed from :class:`Moments`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, TruncationError
from .special import bessel_ratios

NORM_TOL = 1e-12
CONVERGED_TAIL = 1e-14
WIDEN_TAIL = 1e-16
MAX_L = 2048


def wrap_angle(angle):
    """Map an angle into (-pi, pi]."""
    a = math.remainder(float(angle), 2.0 * math.pi)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class Window:
    l_min: int
    l_max: int

    def __post_init__(self):
        if not (self.l_min <= 0 <= self.l_max):
            raise DomainError(f"window [{self.l_min}, {self.l_max}] must contain 0")

    @classmethod
    def symmetric(cls, half_width):
        return cls(-int(half_width), int(half_width))

    @property
    def size(self):
        return self.l_max - self.l_min + 1

    @property
    def indices(self):
        return np.arange(self.l_min, self.l_max + 1)

    def __contains__(self, l):
        return self.l_min <= l <= self.l_max

    def union(self, other):
        return Window(min(self.l_min, other.l_min), max(self.l_max, other.l_max))

    def is_interior(self, other):
        """True when ``other`` lies inside this window."""
        return self.l_min <= other.l_min and other.l_max <= self.l_max


@dataclass(frozen=True)
class PureState:
    """Normalised amplitudes ``c_l`` on ``window``."""

    window: Window
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex)
        if c.shape != (self.window.size,):
            raise DomainError(f"expected {self.window.size} amplitudes, got {c.shape}")
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalised: |c|^2 sums to {norm!r}")
        c.setflags(write=False)
        object.__setattr__(self, "amplitudes", c)

    @classmethod
    def from_amplitudes(cls, window, amplitudes):
        """Build a state after normalising ``amplitudes``."""
        c = np.asarray(amplitudes, dtype=complex)
        return cls(window, c / np.linalg.norm(c))

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    @property
    def tail_mass(self):
        p = self.probabilities
        return float(p[0] + p[-1]) if p.size > 1 else float(p[0])

    @property
    def converged(self):
        return self.tail_mass <= CONVERGED_TAIL

    def amplitude(self, l):
        return self.amplitudes[l - self.window.l_min] if l in self.window else 0j

    def on_window(self, window):
        """Re-express the state on a window containing its own."""
        if not window.is_interior(self.window):
            raise PreconditionError("target window must contain the state's window")
        c = np.zeros(window.size, dtype=complex)
        start = self.window.l_min - window.l_min
        c[start : start + self.window.size] = self.amplitudes
        return PureState(window, c)


@dataclass(frozen=True)
class Ensemble:
    """Mixed state ``sum_k p_k |psi_k><psi_k|`` kept as weighted components."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise DomainError("an ensemble needs at least one component")
        weights = [w for w, _ in comps]
        if min(weights) < 0.0:
            raise DomainError("ensemble weights must be non-negative")
        if abs(math.fsum(weights) - 1.0) > NORM_TOL:
            raise DomainError(f"ensemble weights sum to {math.fsum(weights)!r}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def mixture(cls, p, first, second):
        return cls(((p, first), (1.0 - p, second)))


@dataclass(frozen=True)
class Moments:
    """First and second moments of ``L`` and ``E``."""

    mean_l: float
    mean_l2: float
    mean_e: complex
    mean_e2: complex

    @property
    def var_l(self):
        return max(self.mean_l2 - self.mean_l**2, 0.0)

    @property
    def mean_c(self):
        return self.mean_e.real

    @property
    def mean_s(self):
        return -self.mean_e.imag

    @property
    def delta(self):
        """``arg<E^2> - 2 arg<E>`` wrapped to (-pi, pi]."""
        return wrap_angle(np.angle(self.mean_e2) - 2.0 * np.angle(self.mean_e))

    def combine(self, weight, other):
        """Convex combination ``weight * self + (1 - weight) * other``."""
        w = float(weight)
        return Moments(
            w * self.mean_l + (1 - w) * other.mean_l,
            w * self.mean_l2 + (1 - w) * other.mean_l2,
            w * self.mean_e + (1 - w) * other.mean_e,
            w * self.mean_e2 + (1 - w) * other.mean_e2,
        )


def moments(source):
    """Moments of a pure state or an ensemble.

    ``<E> = sum_l conj(c_{l-1}) c_l`` and ``<E^2> = sum_l conj(c_{l-2}) c_l``.
    """
    if isinstance(source, Ensemble):
        parts = [(w, moments(s)) for w, s in source.components]
        return Moments(
            math.fsum(w * m.mean_l for w, m in parts),
            math.fsum(w * m.mean_l2 for w, m in parts),
            sum(w * m.mean_e for w, m in parts),
            sum(w * m.mean_e2 for w, m in parts),
        )
    c = source.amplitudes
    ls = source.window.indices
    p = np.abs(c) ** 2
    mean_e = complex(np.sum(np.conj(c[:-1]) * c[1:])) if c.size > 1 else 0j
    mean_e2 = complex(np.sum(np.conj(c[:-2]) * c[2:])) if c.size > 2 else 0j
    return Moments(float(np.sum(ls * p)), float(np.sum(ls.astype(float) ** 2 * p)), mean_e, mean_e2)


def momentum_eigenstate(l, window=None):
    l = int(l)
    if window is None:
        window = Window(min(l, 0), max(l, 0))
    if l not in window:
        raise DomainError(f"l = {l} lies outside [{window.l_min}, {window.l_max}]")
    c = np.zeros(window.size, dtype=complex)
    c[l - window.l_min] = 1.0
    return PureState(window, c)


def _von_mises_profile(kappa, needed=None):
    """``I_n(kappa) / I_0(kappa)`` for ``n = 0 .. N`` with N large enough for the tail target."""
    if kappa == 0.0:
        return np.array([1.0])
    n = max(16, int(4 * math.sqrt(kappa)) + 16, needed or 0)
    while True:
        rho = bessel_ratios(n, kappa)
        # |c_n|^2 relative to |c_0|^2; |c_0|^2 <= 1
        weight = rho**2 / (rho[0] ** 2 + 2.0 * np.sum(rho[1:] ** 2))
        if weight[-1] <= WIDEN_TAIL * 1e-4 or n >= MAX_L:
            return rho
        n = min(2 * n, MAX_L)


def von_mises_state(m, alpha, kappa, window=None, *, auto_widen=True, allow_truncation=False):
    """Von Mises state ``|m, alpha, kappa>``.

    Amplitudes ``c_l = exp(i (m - l) alpha) I_{m-l}(kappa) / sqrt(I_0(2 kappa))``.
    The normalisation is applied numerically, which equals the closed form
    once the window holds the support.  With ``auto_widen`` the window grows
    until the outermost probabilities fall below 1e-16.  Without it, a
    window that loses more than 1e-14 of the probability raises
    :class:`TruncationError` unless ``allow_truncation`` is set, in which
    case the truncated vector is renormalised and returned.
    """
    m = int(m)
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa < 0.0:
        raise DomainError(f"kappa must be finite and non-negative, got {kappa!r}")
    alpha = wrap_angle(alpha)
    if window is None:
        window = Window(min(m, 0), max(m, 0))
    rho = _von_mises_profile(kappa)
    full = rho**2
    full_norm = full[0] + 2.0 * np.sum(full[1:])

    if auto_widen:
        p = full / full_norm
        above = np.nonzero(p > WIDEN_TAIL)[0]
        radius = int(above[-1]) + 1 if above.size else 0
        if abs(m) + radius > MAX_L:
            raise TruncationError(f"von Mises support exceeds |l| <= {MAX_L}", float(np.sum(p[MAX_L - abs(m):])))
        window = window.union(Window(min(m - radius, 0), max(m + radius, 0)))

    ls = window.indices
    n = np.abs(m - ls)
    inside = n < rho.size
    amp = np.zeros(window.size)
    amp[inside] = rho[n[inside]]
    kept = float(np.sum(amp**2)) / full_norm
    lost = max(1.0 - kept, 0.0)
    if not auto_widen and lost > CONVERGED_TAIL and not allow_truncation:
        raise TruncationError("window too small for the von Mises state", lost)
    c = amp * np.exp(1j * (m - ls) * alpha)
    return PureState(window, c / np.linalg.norm(c))


def angular_amplitude(state, phi):
    """Wavefunction ``<phi|psi> = sum_l c_l exp(i l phi) / sqrt(2 pi)``; ``phi`` may be an array."""
    phi = np.asarray(phi, dtype=float)
    ls = state.window.indices
    phase = np.exp(1j * np.multiply.outer(phi, ls))
    return phase @ state.amplitudes / math.sqrt(2.0 * math.pi)


def displace(state, m, phi, *, auto_widen=True):
    """Apply ``D(m, phi) = exp(-i L phi) E^{-m}``: ``c_l -> exp(-i l phi) c_{l - m}``.

    Under this map ``<L> -> <L> + m`` and ``<E> -> exp(-i phi) <E>``.
    """
    m = int(m)
    phi = wrap_angle(phi)
    src = state.window
    if auto_widen:
        target = src.union(Window(min(src.l_min + m, 0), max(src.l_max + m, 0)))
        if max(abs(target.l_min), abs(target.l_max)) > MAX_L:
            raise TruncationError(f"displaced window exceeds |l| <= {MAX_L}", 0.0)
    else:
        target = src
    c = np.zeros(target.size, dtype=complex)
    ls = src.indices + m
    keep = (ls >= target.l_min) & (ls <= target.l_max)
    lost = float(np.sum(np.abs(state.amplitudes[~keep]) ** 2))
    if lost > WIDEN_TAIL:
        raise TruncationError(f"shift by {m} leaves the window", lost)
    c[ls[keep] - target.l_min] = state.amplitudes[keep]
    c *= np.exp(-1j * target.indices * phi)
    return PureState.from_amplitudes(target, c)


def povm_deviation(fiducial, probe_window):
    """Largest deviation from the identity of the displaced-fiducial POVM on ``probe_window``.

    The displacements run over ``m`` in the fiducial's window.  The angular
    integral removes every off-diagonal element, and the diagonal element at
    ``l`` collapses to ``sum_m |c_{l-m}|^2``, so the deviation is
    ``max_l |sum_m |c_{l-m}|^2 - 1|``.  A fiducial whose support is cut by its
    window, or a probe window too close to the edges, shows up as a
    non-zero deviation.
    """
    w = fiducial.window
    if not w.is_interior(probe_window):
        raise PreconditionError("probe window must lie inside the fiducial window")
    p = fiducial.probabilities
    cumulative = np.concatenate(([0.0], np.cumsum(p)))
    worst = 0.0
    for l in probe_window.indices:
        # j = l - m with m in [l_min, l_max]  ->  j in [l - l_max, l - l_min]
        lo = max(l - w.l_max, w.l_min) - w.l_min
        hi = min(l - w.l_min, w.l_max) - w.l_min
        total = cumulative[hi + 1] - cumulative[lo] if hi >= lo else 0.0
        worst = max(worst, abs(total - 1.0))
    return float(worst)


def random_state(seed, window):
    """Amplitudes drawn as independent complex normals from ``numpy.random.default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(window.size) + 1j * rng.standard_normal(window.size)
    return PureState.from_amplitudes(window, c)


# truncated operator matrices, rows and columns indexed by the window


def angular_momentum_matrix(window):
    return np.diag(window.indices.astype(float))


def shift_matrix(window):
    """``E`` with ``E|l> = |l - 1>`` truncated to the window."""
    return np.eye(window.size, k=1)


def rotated_sine_matrix(window, alpha):
    e = shift_matrix(window)
    return (np.exp(-1j * alpha) * e.T - np.exp(1j * alpha) * e) / 2j


def rotated_cosine_matrix(window, alpha):
    e = shift_matrix(window)
    return (np.exp(-1j * alpha) * e.T + np.exp(1j * alpha) * e) / 2


def state_to_dict(state):
    return {
        "window": [state.window.l_min, state.window.l_max],
        "re": [float(x) for x in state.amplitudes.real],
        "im": [float(x) for x in state.amplitudes.imag],
    }


def state_from_dict(doc):
    l_min, l_max = doc["window"]
    c = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    return PureState(Window(int(l_min), int(l_max)), c)
