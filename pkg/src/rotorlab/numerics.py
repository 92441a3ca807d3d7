"""Scalar minimisation, bisection and ground states of banded Hermitian matrices."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import BracketError, ConvergenceError, DomainError, NonFiniteError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BandedHermitian:
    """Hermitian matrix stored by its diagonal and upper bands.

    ``bands[k - 1][j]`` is the entry ``H[j, j + k]``; the lower triangle is
    implied by Hermiticity.
    """

    diagonal: np.ndarray
    bands: tuple = ()

    def __post_init__(self):
        diag = np.asarray(self.diagonal, dtype=float)
        n = diag.size
        if n < 1:
            raise DomainError("matrix dimension must be at least 1")
        bands = tuple(np.asarray(b) for b in self.bands)
        if len(bands) >= n:
            raise DomainError(f"bandwidth {len(bands)} too large for dimension {n}")
        for k, b in enumerate(bands, start=1):
            if b.shape != (n - k,):
                raise DomainError(f"band {k} must have length {n - k}, got {b.shape}")
        object.__setattr__(self, "diagonal", diag)
        object.__setattr__(self, "bands", bands)

    @property
    def dimension(self):
        return self.diagonal.size

    @property
    def bandwidth(self):
        return len(self.bands)

    @property
    def is_complex(self):
        return any(np.iscomplexobj(b) and np.any(b.imag != 0) for b in self.bands)

    def to_dense(self):
        dtype = complex if self.is_complex else float
        h = np.diag(self.diagonal).astype(dtype)
        for k, b in enumerate(self.bands, start=1):
            b = b if dtype is complex else b.real
            h += np.diag(b, k) + np.diag(np.conj(b), -k)
        return h

    def matvec(self, v):
        dtype = np.result_type(v, *self.bands) if self.bands else np.result_type(v, float)
        out = (self.diagonal * v).astype(dtype)
        for k, b in enumerate(self.bands, start=1):
            out[:-k] += b * v[k:]
            out[k:] += np.conj(b) * v[:-k]
        return out

    def gershgorin_lower(self):
        radius = np.zeros(self.dimension)
        for k, b in enumerate(self.bands, start=1):
            a = np.abs(b)
            radius[:-k] += a
            radius[k:] += a
        return float(np.min(self.diagonal - radius))

    def _upper_banded(self, shift):
        """LAPACK upper band storage of ``H - shift * I``."""
        u = self.bandwidth
        n = self.dimension
        dtype = complex if self.is_complex else float
        ab = np.zeros((u + 1, n), dtype=dtype)
        ab[u] = self.diagonal - shift
        for k, b in enumerate(self.bands, start=1):
            ab[u - k, k:] = b if dtype is complex else b.real
        return ab


@dataclass(frozen=True)
class GroundState:
    eigenvalue: float
    eigenvector: np.ndarray
    residual_norm: float
    iterations: int


def ground_state(matrix, tol=1e-12, max_iter=2000, polish=3):
    """Algebraically smallest eigenpair of a banded Hermitian matrix.

    Shifted inverse iteration: the shift sits one unit below the smallest
    Gershgorin bound, so ``H - shift`` is positive definite and is factored
    once by banded Cholesky.  The starting vector is fixed, which makes the
    result a deterministic function of the matrix.

    Iteration stops once ``||H v - a v|| <= tol * max(1, |a|)``, after
    which up to ``polish`` further steps are taken while the residual keeps
    falling; this pushes the eigenvector error to the rounding floor.
    """
    n = matrix.dimension
    if n == 1:
        return GroundState(float(matrix.diagonal[0]), np.ones(1), 0.0, 0)
    shift = matrix.gershgorin_lower() - 1.0
    factor = cholesky_banded(matrix._upper_banded(shift), lower=False)

    rng = np.random.default_rng(20240611)
    v = rng.standard_normal(n) + 1.0
    if matrix.is_complex:
        v = v + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)

    residual = math.inf
    for it in range(1, max_iter + 1):
        v = cho_solve_banded((factor, False), v)
        v /= np.linalg.norm(v)
        hv = matrix.matvec(v)
        a = float(np.real(np.vdot(v, hv)))
        residual = float(np.linalg.norm(hv - a * v))
        if residual <= tol * max(1.0, abs(a)):
            best = GroundState(a, v, residual, it)
            for extra in range(1, polish + 1):
                v = cho_solve_banded((factor, False), v)
                v /= np.linalg.norm(v)
                hv = matrix.matvec(v)
                a = float(np.real(np.vdot(v, hv)))
                residual = float(np.linalg.norm(hv - a * v))
                if residual >= best.residual_norm:
                    break
                best = GroundState(a, v, residual, it + extra)
            return best
    raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps", residual)


def _finite(f, x):
    y = f(x)
    y = float(y)
    if not math.isfinite(y):
        raise NonFiniteError("objective is not finite", x)
    return y


def golden_section(f, a, b, rel_tol=1e-10, max_iter=200):
    """Golden-section refinement of a unimodal ``f`` on ``[a, b]``."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = _finite(f, c), _finite(f, d)
    for _ in range(max_iter):
        if abs(b - a) <= rel_tol * 0.5 * (abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = _finite(f, c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = _finite(f, d)
        if b - a <= 0.0:
            break
    return (c, fc) if fc <= fd else (d, fd)


def minimize_scalar(f, lo, hi, rel_tol=1e-8, n_grid=64):
    """Locate the smallest value of ``f`` on ``[lo, hi]``.

    A grid of ``n_grid`` points (geometric when ``lo > 0``) is scanned first
    so that separated basins are all sampled; the best grid cell is then
    refined by golden section.  A minimum on the boundary is reported as the
    boundary point itself.

    Returns ``(argmin, min_value)``.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    n_grid = max(int(n_grid), 64)
    if lo > 0:
        xs = np.geomspace(lo, hi, n_grid)
    else:
        xs = np.linspace(lo, hi, n_grid)
    ys = np.array([_finite(f, x) for x in xs])
    i = int(np.argmin(ys))
    best_x, best_y = float(xs[i]), float(ys[i])
    left = xs[max(i - 1, 0)]
    right = xs[min(i + 1, n_grid - 1)]
    x, y = golden_section(f, float(left), float(right), rel_tol)
    if y < best_y:
        best_x, best_y = x, y
    return best_x, best_y


def find_root(f, lo, hi, abs_tol=1e-12, max_iter=400):
    """Bisection for a sign change of ``f`` on ``[lo, hi]``; returns the final midpoint."""
    flo, fhi = _finite(f, lo), _finite(f, hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if flo * fhi > 0.0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f = ({flo:.6g}, {fhi:.6g})",
            [(lo, flo), (hi, fhi)],
        )
    a, b = float(lo), float(hi)
    for _ in range(max_iter):
        if b - a <= abs_tol:
            break
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        fm = _finite(f, mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            a, flo = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)
