"""Characteristic matrix and determinant Delta(lambda) with exact derivatives.

The 2x2 matrix couples boundary-measure moments of the fundamental solutions
with their values at x = 1:

    m = [[ int y1 dnu0 - 1,      int y2 dnu0          ],
         [ int y1 dnu1 - y1(1),  int y2 dnu1 - y2(1)  ]]

lambda is an eigenvalue exactly when det m = 0, and the zero order equals the
algebraic multiplicity.  The lambda-derivatives of m come from the variational
components of the same basis, so one basis evaluation per lambda serves
Delta, Delta' and Delta''.

Expanding the determinant gives the equivalent antisymmetrized form

    Delta = II K dnu0 dnu1 - I K(., 1) dnu0 - I y2 dnu1 + y2(1),

with the pair kernel K(x, t) = y1(x)y2(t) - y2(x)y1(t).  On constant
coefficients K collapses to exp(-beta(x+t)) sin(mu(t-x))/mu, so the atom
contributions evaluate without the exponential cancellation that makes the
literal 2x2 determinant lose digits when solutions grow; the closed-form path
assembles Delta this way.
"""

from dataclasses import dataclass

import numpy as np

from .ode import ClosedFormBasis, basis_for
from .problem import require_valid
from .quad import gl_nodes
from .region import ContourRegion
from .settings import DEFAULT_TOL

_EPS = np.finfo(float).eps

#: selector -> index into the 12-component basis vector
_SELECTORS = {
    "y1": 0,
    "y2": 2,
    "y1_lam": 4,
    "y2_lam": 6,
    "y1_lam2": 8,
    "y2_lam2": 10,
}


def measure_moment(basis, measure, which):
    """Integral of a selected basis component against a boundary measure.

    which is one of 'y1', 'y2', 'y1_lam', 'y2_lam' (second lambda-derivatives
    'y1_lam2', 'y2_lam2' are accepted as well).  Atom contributions use dense
    output directly; density parts are integrated piecewise.
    """
    idx = _SELECTORS[which]
    total = 0.0 + 0.0j
    for x, w in measure.atoms:
        total += w * basis.point12(x)[idx]
    for a, b, v in measure.density_pieces():
        if v != 0.0:
            integ, _ = basis.integral_over(a, b)
            total += v * integ[idx]
    return total


def _part_moments(basis, measure, atoms_only=False, density_only=False):
    """Moments (and magnitude sums) of all 12 components for a measure part."""
    vals = np.zeros(12, dtype=complex)
    mags = np.zeros(12)
    if not density_only:
        for x, w in measure.atoms:
            pt = basis.point12(x)
            vals += w * pt
            mags += w * np.abs(pt)
    if not atoms_only:
        for a, b, v in measure.density_pieces():
            if v != 0.0:
                integ, integ_abs = basis.integral_over(a, b)
                vals += v * integ
                mags += v * integ_abs
    return vals, mags


def _moment_block(basis, measure):
    return _part_moments(basis, measure)


def _bilinear(u, v, umag, vmag):
    """(value, d/dlam, d2/dlam2, magnitude) of u[y1] v[y2] - u[y2] v[y1]."""
    val = u[0] * v[2] - u[2] * v[0]
    d1 = u[4] * v[2] + u[0] * v[6] - u[6] * v[0] - u[2] * v[4]
    d2 = (u[8] * v[2] + 2.0 * u[4] * v[6] + u[0] * v[10]
          - u[10] * v[0] - 2.0 * u[6] * v[4] - u[2] * v[8])
    mag = umag[0] * vmag[2] + umag[2] * vmag[0]
    return np.array([val, d1, d2]), mag


def _delta_antisymmetrized(basis, problem):
    """Cancellation-resistant Delta assembly for the closed-form basis.

    Atom-atom contributions go through the collapsed pair kernel; blocks that
    touch a density part fall back to factorized moment products (their
    cancellation only matters for large-density problems deep in the complex
    plane).  Returns (value/d1/d2 array, magnitude scale).
    """
    nu0, nu1 = problem.nu0, problem.nu1
    acc = np.zeros(3, dtype=complex)
    mag = 0.0

    for x, w0 in nu0.atoms:
        for t, w1 in nu1.atoms:
            k = basis.pair_kernel(x, t)
            acc += w0 * w1 * np.asarray(k)
            mag += w0 * w1 * abs(k[0])
    if nu0.has_density or nu1.has_density:
        a0 = _part_moments(basis, nu0, atoms_only=True)
        d0 = _part_moments(basis, nu0, density_only=True)
        a1 = _part_moments(basis, nu1, atoms_only=True)
        d1 = _part_moments(basis, nu1, density_only=True)
        # atom-atom is handled exactly above; density blocks factorize
        for left, right in ((a0, d1), (d0, a1), (d0, d1)):
            val, m = _bilinear(left[0], right[0], left[1], right[1])
            acc += val
            mag += m

    # - int K(x, 1) dnu0
    for x, w0 in nu0.atoms:
        k = basis.pair_kernel(x, 1.0)
        acc -= w0 * np.asarray(k)
        mag += w0 * abs(k[0])
    rate = basis.oscillation_rate()
    for a, b, v in nu0.density_pieces():
        if v == 0.0:
            continue
        n = max(1, int(np.ceil((b - a) * (rate + 1.0) / 1.2)))
        edges = np.linspace(a, b, n + 1)
        for lo, hi in zip(edges, edges[1:]):
            xs, ws = gl_nodes(lo, hi, 7)
            for xx, ww in zip(xs, ws):
                k = basis.pair_kernel(xx, 1.0)
                acc -= v * ww * np.asarray(k)
                mag += v * ww * abs(k[0])

    # - int y2 dnu1 + y2(1)
    m1, s1 = _moment_block(basis, nu1)
    end = basis.at_one()
    acc -= m1[[2, 6, 10]]
    acc += end[[2, 6, 10]]
    mag += s1[2] + abs(end[2])
    return acc, mag


@dataclass(frozen=True)
class CharMatrix:
    """Characteristic matrix with elementwise first and second
    lambda-derivatives plus magnitude scales used for noise-floor estimates."""

    lam: complex
    m: np.ndarray
    m_prime: np.ndarray
    m_second: np.ndarray
    scale: np.ndarray
    _delta3: np.ndarray
    _delta_mag: float

    @property
    def delta(self):
        return self._delta3[0]

    @property
    def delta_prime(self):
        return self._delta3[1]

    @property
    def delta_second(self):
        return self._delta3[2]

    def noise_floor(self, rtol=0.0):
        """Estimated roundoff (plus integration error) floor of |delta|.

        Scales with the magnitude sums accumulated during assembly, not with
        the possibly tiny result."""
        return float((4.0 * _EPS + 10.0 * rtol) * self._delta_mag)


def char_matrix(problem, lam, tol=None):
    """Assemble the characteristic matrix at lambda from one basis evaluation."""
    tol = tol or DEFAULT_TOL
    require_valid(problem)
    basis = basis_for(problem, lam, tol)
    m0, g0 = _moment_block(basis, problem.nu0)
    m1, g1 = _moment_block(basis, problem.nu1)
    end = basis.at_one()
    end_abs = np.abs(end)

    m = np.array([
        [m0[0] - 1.0, m0[2]],
        [m1[0] - end[0], m1[2] - end[2]],
    ])
    m_prime = np.array([
        [m0[4], m0[6]],
        [m1[4] - end[4], m1[6] - end[6]],
    ])
    m_second = np.array([
        [m0[8], m0[10]],
        [m1[8] - end[8], m1[10] - end[10]],
    ])
    scale = np.array([
        [g0[0] + 1.0, g0[2]],
        [g1[0] + end_abs[0], g1[2] + end_abs[2]],
    ])

    if isinstance(basis, ClosedFormBasis):
        delta3, mag = _delta_antisymmetrized(basis, problem)
    else:
        delta3 = np.array([
            m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0],
            (m_prime[0, 0] * m[1, 1] + m[0, 0] * m_prime[1, 1]
             - m_prime[0, 1] * m[1, 0] - m[0, 1] * m_prime[1, 0]),
            (m_second[0, 0] * m[1, 1] + 2.0 * m_prime[0, 0] * m_prime[1, 1]
             + m[0, 0] * m_second[1, 1] - m_second[0, 1] * m[1, 0]
             - 2.0 * m_prime[0, 1] * m_prime[1, 0] - m[0, 1] * m_second[1, 0]),
        ])
        mag = (scale[0, 0] * abs(m[1, 1]) + abs(m[0, 0]) * scale[1, 1]
               + scale[0, 1] * abs(m[1, 0]) + abs(m[0, 1]) * scale[1, 0])
    return CharMatrix(lam=complex(lam), m=m, m_prime=m_prime, m_second=m_second,
                      scale=scale, _delta3=delta3, _delta_mag=float(mag))


def delta(problem, lam, tol=None):
    """Characteristic determinant at lambda."""
    return char_matrix(problem, lam, tol).delta


def delta_with_prime(problem, lam, tol=None):
    """Delta and its exact lambda-derivative (product rule on m, m')."""
    cm = char_matrix(problem, lam, tol)
    return cm.delta, cm.delta_prime


@dataclass(frozen=True)
class GridSample:
    """Delta sampled over a rectangle on a regular nx-by-ny grid, row-major
    with the real direction as the outer index."""

    rectangle: ContourRegion
    nx: int
    ny: int
    values: np.ndarray  # shape (nx, ny), complex

    def __post_init__(self):
        if self.values.shape != (self.nx, self.ny):
            raise ValueError("grid dimensions do not match value count")


def delta_grid(problem, region, nx, ny, tol=None):
    """Sample Delta on a regular grid over the rectangle (for plot emission)."""
    if nx < 2 or ny < 2:
        raise ValueError("grid needs nx, ny >= 2")
    res = np.linspace(region.re_min, region.re_max, nx)
    ims = np.linspace(region.im_min, region.im_max, ny)
    vals = np.empty((nx, ny), dtype=complex)
    for i, re in enumerate(res):
        for j, im in enumerate(ims):
            vals[i, j] = delta(problem, complex(re, im), tol)
    return GridSample(rectangle=region, nx=nx, ny=ny, values=vals)
