"""Fundamental system integrator for b0*y'' + b1*y' = lambda*y at complex lambda.

The state carries six second-order pairs: the fundamental solutions y1, y2
(initial data (1,0) and (0,1)), their first lambda-derivatives z_i (variational
equation b0*z'' + b1*z' = lambda*z + y, zero initial data) and their second
lambda-derivatives w_i (b0*w'' + b1*w' = lambda*w + 2*z, zero initial data).

Integration uses an embedded Dormand-Prince 5(4) pair with quartic dense
output; steps never straddle master-mesh breakpoints.  Constant-coefficient
problems also have an exact closed form used as a fast path and as a
cross-check for the integrator.
"""

import cmath
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import StiffnessError
from .problem import require_valid
from .quad import gl_nodes
from .settings import DEFAULT_TOL

# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) tableau with FSAL and the standard quartic interpolant.

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = _A[6]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_MIN_STEP = 1e-14
_MAX_STEPS = 500_000

#: component layout of the 12-vector
#: [y1, y1', y2, y2', dl y1, dl y1', dl y2, dl y2', dl2 y1, dl2 y1', dl2 y2, dl2 y2']
N_COMPONENTS = 12

_IC = np.zeros(N_COMPONENTS, dtype=complex)
_IC[0] = 1.0  # y1(0)
_IC[3] = 1.0  # y2'(0)


class BasisPoint(NamedTuple):
    """Values of the fundamental pair and its lambda-derivatives at one x."""

    y1: complex
    y1_x: complex
    y2: complex
    y2_x: complex
    y1_lam: complex
    y1_x_lam: complex
    y2_lam: complex
    y2_x_lam: complex


def _compiled_coeff(c):
    if c.is_constant:
        v = c.value
        return lambda x, _v=v: _v
    bps = list(c.breakpoints)
    polys = [tuple(p) for p in c.polys]
    n = len(polys)

    def ev(x, _bps=bps, _polys=polys, _n=n):
        i = bisect_right(_bps, x) - 1
        if i >= _n:
            i = _n - 1
        elif i < 0:
            i = 0
        acc = 0.0
        for coef in reversed(_polys[i]):
            acc = acc * x + coef
        return acc

    return ev


def _make_rhs(problem, lam):
    b0 = _compiled_coeff(problem.b0)
    b1 = _compiled_coeff(problem.b1)

    def rhs(x, u, out):
        b0v = b0(x)
        b1v = b1(x)
        out[0::2] = u[1::2]
        p = u[0::2]
        q = lam * p
        q[2] += p[0]
        q[3] += p[1]
        q[4] += 2.0 * p[2]
        q[5] += 2.0 * p[3]
        out[1::2] = (q - b1v * u[1::2]) / b0v
        return out

    return rhs


def _error_norm(e, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(e / scale) ** 2)))


def _initial_step(rhs, x0, y0, f0, x_end, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, x_end - x0)
    y1 = y0 + h0 * f0
    f1 = rhs(x0 + h0, y1, np.empty_like(y0))
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, x_end - x0)


@dataclass(frozen=True)
class FundamentalBasis:
    """Dense-output record of one integration: accepted-step mesh plus a
    quartic interpolant per step.  Immutable; evaluation is thread-safe."""

    lam: complex
    x0s: np.ndarray        # accepted step start points, shape (n,)
    hs: np.ndarray         # step sizes, shape (n,)
    y0s: np.ndarray        # state at step starts, shape (n, 12)
    qs: np.ndarray         # interpolant coefficients, shape (n, 12, 4)
    y_end: np.ndarray      # state at x = 1, shape (12,)
    n_steps: int
    n_rejected: int
    n_rhs: int

    @property
    def mesh(self):
        """Accepted-step mesh including both endpoints."""
        return np.append(self.x0s, 1.0)

    def _segment(self, x):
        i = int(np.searchsorted(self.x0s, x, side="right")) - 1
        return min(max(i, 0), len(self.hs) - 1)

    def point12(self, x):
        if not (0.0 <= x <= 1.0):
            raise ValueError(f"x={x} outside [0, 1]")
        if x == 1.0:
            return self.y_end.copy()
        i = self._segment(x)
        th = (x - self.x0s[i]) / self.hs[i]
        tp = np.array([th, th * th, th**3, th**4])
        return self.y0s[i] + self.hs[i] * (self.qs[i] @ tp)

    def at_one(self):
        return self.y_end

    def integral_over(self, a, b):
        """Integral (and integral of |.|) of all 12 components over [a, b].

        Exact per dense-output piece: Gauss-Legendre 7 on each accepted-step
        overlap integrates the quartic interpolant without error.
        """
        acc = np.zeros(N_COMPONENTS, dtype=complex)
        acc_abs = np.zeros(N_COMPONENTS)
        ends = self.mesh
        i0 = self._segment(a)
        for i in range(i0, len(self.hs)):
            lo = max(a, self.x0s[i])
            hi = min(b, ends[i + 1])
            if hi <= lo:
                if self.x0s[i] >= b:
                    break
                continue
            xs, ws = gl_nodes(lo, hi, 7)
            th = (xs - self.x0s[i]) / self.hs[i]
            tp = np.vstack([th, th**2, th**3, th**4])           # (4, 7)
            vals = self.y0s[i][:, None] + self.hs[i] * (self.qs[i] @ tp)
            acc += vals @ ws
            acc_abs += np.abs(vals) @ ws
        return acc, acc_abs


def integrate_basis(problem, lam, tol=None):
    """Integrate the fundamental system at complex lambda over [0, 1].

    Adaptive RK 5(4) with mixed error control; restarts at every master-mesh
    breakpoint so the formal order survives coefficient discontinuities.
    Raises StiffnessError if the step size underflows.
    """
    require_valid(problem)
    tol = tol or DEFAULT_TOL
    lam = complex(lam)
    rhs = _make_rhs(problem, lam)
    mesh = problem.master_mesh

    x0s, hs, y0s, qs = [], [], [], []
    y = _IC.copy()
    n_steps = n_rej = n_rhs = 0
    k = np.empty((7, N_COMPONENTS), dtype=complex)
    scratch = np.empty(N_COMPONENTS, dtype=complex)

    for xa, xb in zip(mesh, mesh[1:]):
        x = float(xa)
        f = rhs(x, y, np.empty(N_COMPONENTS, dtype=complex))
        n_rhs += 1
        h = _initial_step(rhs, x, y, f, xb, tol.rtol, tol.atol)
        n_rhs += 1
        while x < xb:
            h = min(h, xb - x)
            if h < _MIN_STEP:
                raise StiffnessError(x, lam)
            k[0] = f
            for s in range(1, 7):
                ys = y + h * (_A[s] @ k[:s])
                rhs(x + _C[s] * h, ys, scratch)
                k[s] = scratch
            n_rhs += 6
            y_new = ys  # stage 7 evaluates at x + h with the 5th-order weights
            err = _error_norm(h * (_E @ k), y, y_new, tol.rtol, tol.atol)
            if err <= 1.0:
                x0s.append(x)
                hs.append(h)
                y0s.append(y.copy())
                qs.append(k.T @ _P)
                x += h
                y = y_new.copy()
                f = k[6].copy()  # FSAL
                n_steps += 1
                factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
                h *= max(0.2, factor)
            else:
                n_rej += 1
                h *= max(0.2, 0.9 * err ** -0.2)
            if n_steps > _MAX_STEPS:
                raise StiffnessError(x, lam, "step budget exhausted")

    return FundamentalBasis(
        lam=lam,
        x0s=np.array(x0s),
        hs=np.array(hs),
        y0s=np.array(y0s),
        qs=np.array(qs),
        y_end=y,
        n_steps=n_steps,
        n_rejected=n_rej,
        n_rhs=n_rhs,
    )


def eval_basis(basis, x):
    """Dense-output interpolation of the 8 spec components at x in [0, 1]."""
    return BasisPoint(*basis.point12(x)[:8])


# ---------------------------------------------------------------------------
# Constant-coefficient closed form.
#
# With beta = b1/(2 b0) and s = -lam/b0 - beta^2 the transformed equation is
# v'' = -s v, so everything reduces to C(x) = cos(sqrt(s) x) and
# S(x) = sin(sqrt(s) x)/sqrt(s) and their s-derivatives.  Both are entire in
# s; near s = 0 the closed expressions lose digits, so a truncated power
# series takes over.

_SERIES_TERMS = 14


def _cs_pair(s, x):
    """C, S and their first and second derivatives with respect to s."""
    if abs(s) * x * x <= 1.0:
        C = S = Cs = Ss = Css = Sss = 0.0 + 0.0j
        xx = x * x
        term = 1.0 + 0.0j  # (-s)^k x^(2k) / (2k)!
        for kk in range(_SERIES_TERMS):
            C += term
            S += term * x / (2 * kk + 1)
            term *= -s * xx / ((2 * kk + 1) * (2 * kk + 2))
        term = 1.0 + 0.0j
        for j in range(_SERIES_TERMS):
            base = term * xx / ((2 * j + 1) * (2 * j + 2))      # (-s)^j x^(2j+2)/(2j+2)!
            Cs -= (j + 1) * base
            Ss -= (j + 1) * base * x / (2 * j + 3)
            base2 = base * xx / ((2 * j + 3) * (2 * j + 4))     # (-s)^j x^(2j+4)/(2j+4)!
            Css += (j + 2) * (j + 1) * base2
            Sss += (j + 2) * (j + 1) * base2 * x / (2 * j + 5)
            term *= -s * xx / ((2 * j + 1) * (2 * j + 2))
        return C, S, Cs, Ss, Css, Sss
    sq = cmath.sqrt(s)
    z = sq * x
    C = cmath.cos(z)
    S = cmath.sin(z) / sq
    Ss = (x * C - S) / (2.0 * s)
    Cs = -0.5 * x * S
    Css = -0.5 * x * Ss
    Sss = (3.0 * S - 3.0 * x * C - s * x * x * S) / (4.0 * s * s)
    return C, S, Cs, Ss, Css, Sss


def closed_form_point12(b0, b1, lam, x):
    """Exact 12-component state for constant coefficients."""
    beta = b1 / (2.0 * b0)
    sig = -1.0 / b0
    s = lam * sig - beta * beta
    C, S, Cs, Ss, Css, Sss = _cs_pair(s, x)
    E = np.exp(-beta * x)
    lob = lam / b0
    out = np.empty(N_COMPONENTS, dtype=complex)
    out[0] = E * (C + beta * S)
    out[1] = lob * E * S
    out[2] = E * S
    out[3] = E * (C - beta * S)
    out[4] = E * (Cs + beta * Ss) * sig
    out[5] = (E * S / b0) + lob * E * Ss * sig
    out[6] = E * Ss * sig
    out[7] = E * (Cs - beta * Ss) * sig
    out[8] = E * (Css + beta * Sss) * sig * sig
    out[9] = 2.0 * (E * Ss / b0) * sig + lob * E * Sss * sig * sig
    out[10] = E * Sss * sig * sig
    out[11] = E * (Css - beta * Sss) * sig * sig
    return out


def closed_form_basis(b0, b1, lam, x):
    """Exact constant-coefficient fundamental values at one point.

    Requires b0 < 0; returns the same 8-component record as eval_basis.
    """
    if b0 >= 0:
        raise ValueError(f"b0={b0} must be negative")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x={x} outside [0, 1]")
    return BasisPoint(*closed_form_point12(b0, b1, complex(lam), x)[:8])


class ClosedFormBasis:
    """Closed-form stand-in for FundamentalBasis on constant coefficients."""

    def __init__(self, b0, b1, lam):
        if b0 >= 0:
            raise ValueError(f"b0={b0} must be negative")
        self.b0 = float(b0)
        self.b1 = float(b1)
        self.lam = complex(lam)
        beta = self.b1 / (2.0 * self.b0)
        self._s = -self.lam / self.b0 - beta * beta
        self._mu = abs(cmath.sqrt(self._s))
        self._end = None

    def point12(self, x):
        if not (0.0 <= x <= 1.0):
            raise ValueError(f"x={x} outside [0, 1]")
        return closed_form_point12(self.b0, self.b1, self.lam, x)

    def at_one(self):
        if self._end is None:
            self._end = self.point12(1.0)
        return self._end

    def integral_over(self, a, b):
        """Composite Gauss-Legendre 7 with oscillation-scaled panels."""
        n = max(1, int(np.ceil((b - a) * (self._mu + 1.0) / 1.2)))
        acc = np.zeros(N_COMPONENTS, dtype=complex)
        acc_abs = np.zeros(N_COMPONENTS)
        edges = np.linspace(a, b, n + 1)
        for lo, hi in zip(edges, edges[1:]):
            xs, ws = gl_nodes(lo, hi, 7)
            for xx, ww in zip(xs, ws):
                v = self.point12(xx)
                acc += ww * v
                acc_abs += ww * np.abs(v)
        return acc, acc_abs

    def pair_kernel(self, x, t):
        """K = y1(x)y2(t) - y2(x)y1(t) and its lambda-derivatives.

        The products collapse to exp(-beta(x+t)) sin(mu(t-x))/mu, which sidesteps
        the catastrophic cancellation of the literal difference when solutions
        grow exponentially.  Returns (K, dK/dlam, d2K/dlam2).
        """
        beta = self.b1 / (2.0 * self.b0)
        sig = -1.0 / self.b0
        d = t - x
        _, S, _, Ss, _, Sss = _cs_pair(self._s, d)
        e2 = np.exp(-beta * (x + t))
        return e2 * S, e2 * Ss * sig, e2 * Sss * sig * sig

    def oscillation_rate(self):
        return self._mu


def basis_for(problem, lam, tol=None):
    """Pick the evaluation route: closed form for constant coefficients
    unless the settings force integration."""
    tol = tol or DEFAULT_TOL
    if problem.constant_coefficients and not tol.force_integration:
        require_valid(problem)
        return ClosedFormBasis(problem.b0.value, problem.b1.value, lam)
    return integrate_basis(problem, lam, tol)
