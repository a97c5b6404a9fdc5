"""Operator data: coefficients, boundary measures, and the Wronskian weight.

A problem is the pair of diffusion coefficients (b0, b1) together with two
boundary probability measures (nu0, nu1) on (0, 1).  The operator acts as
b0*y'' + b1*y' with the nonlocal conditions y(0) = integral of y against nu0
and y(1) = integral of y against nu1.

Coefficients are either constants or piecewise polynomials of degree <= 3 on
a breakpoint mesh spanning [0, 1]; measures are finite mixtures of interior
atoms and a piecewise-constant density.  Objects are immutable after
construction and validation reports violations as data instead of raising.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import quad

from .errors import InvalidProblemError

#: default floor: b0 must stay <= -B0_FLOOR everywhere
B0_FLOOR = 1e-8

#: accepted deviation of a measure's total mass from 1
MASS_TOL = 1e-12


@dataclass(frozen=True)
class Coefficient:
    """Constant or piecewise-polynomial coefficient on [0, 1].

    Parameters
    ----------
    kind : {"constant", "piecewise"}
    value : float
        Used when kind == "constant".
    breakpoints : tuple of float
        Strictly increasing, first 0 and last 1 (piecewise only).
    polys : tuple of tuple of float
        One coefficient list per interval, ascending degree, variable is the
        absolute coordinate x (not shifted per interval).
    """

    kind: str
    value: float = 0.0
    breakpoints: tuple = ()
    polys: tuple = ()

    @staticmethod
    def constant(value):
        return Coefficient(kind="constant", value=float(value))

    @staticmethod
    def piecewise(breakpoints, polys):
        bp = tuple(float(b) for b in breakpoints)
        ps = tuple(tuple(float(c) for c in p) for p in polys)
        return Coefficient(kind="piecewise", breakpoints=bp, polys=ps)

    @property
    def is_constant(self):
        return self.kind == "constant"

    def interior_breakpoints(self):
        if self.is_constant:
            return ()
        return self.breakpoints[1:-1]

    def __call__(self, x):
        return eval_coeff(self, x)

    def extrema(self):
        """Exact range (min, max) over [0, 1].

        Pieces have degree <= 3, so per-piece extrema come from the (at most
        quadratic) derivative roots plus the interval endpoints.
        """
        if self.is_constant:
            return self.value, self.value
        lo, hi = np.inf, -np.inf
        for (a, b), coeffs in zip(zip(self.breakpoints, self.breakpoints[1:]), self.polys):
            xs = [a, b]
            der = np.polynomial.polynomial.polyder(np.asarray(coeffs, float))
            if len(der) > 1 or (len(der) == 1 and der[0] != 0.0):
                for r in np.roots(der[::-1]):
                    if abs(r.imag) < 1e-14 and a < r.real < b:
                        xs.append(r.real)
            vals = [np.polynomial.polynomial.polyval(x, coeffs) for x in xs]
            lo = min(lo, min(vals))
            hi = max(hi, max(vals))
        return lo, hi


@dataclass(frozen=True)
class BoundaryMeasure:
    """Probability measure on (0, 1): interior atoms plus an optional
    piecewise-constant density.

    atoms : tuple of (location, weight)
    density_breakpoints / density_values : piecewise-constant density on a
        mesh of [0, 1]; empty tuples mean no density part.
    """

    atoms: tuple = ()
    density_breakpoints: tuple = ()
    density_values: tuple = ()

    @staticmethod
    def point(x, w=1.0):
        """Single atom of weight w at x."""
        return BoundaryMeasure(atoms=((float(x), float(w)),))

    @staticmethod
    def mixture(atoms=(), density_breakpoints=(), density_values=()):
        return BoundaryMeasure(
            atoms=tuple((float(x), float(w)) for x, w in atoms),
            density_breakpoints=tuple(float(b) for b in density_breakpoints),
            density_values=tuple(float(v) for v in density_values),
        )

    @property
    def has_density(self):
        return len(self.density_values) > 0

    def mass(self):
        m = sum(w for _, w in self.atoms)
        if self.has_density:
            bp = np.asarray(self.density_breakpoints)
            m += float(np.sum(np.asarray(self.density_values) * np.diff(bp)))
        return m

    def density_pieces(self):
        """Yield (a, b, value) for each density interval."""
        for i, v in enumerate(self.density_values):
            yield self.density_breakpoints[i], self.density_breakpoints[i + 1], v


@dataclass(frozen=True)
class Problem:
    """Full operator description; immutable and safe to share across workers."""

    b0: Coefficient
    b1: Coefficient
    nu0: BoundaryMeasure
    nu1: BoundaryMeasure
    b0_floor: float = B0_FLOOR

    @cached_property
    def master_mesh(self):
        """Sorted union of every breakpoint of b0, b1 and both densities.

        Integrators never step across these points, so each sub-interval sees
        smooth data.
        """
        pts = {0.0, 1.0}
        for c in (self.b0, self.b1):
            pts.update(c.interior_breakpoints())
        for m in (self.nu0, self.nu1):
            pts.update(b for b in m.density_breakpoints if 0.0 < b < 1.0)
        return np.array(sorted(pts))

    @property
    def constant_coefficients(self):
        return self.b0.is_constant and self.b1.is_constant

    @cached_property
    def _drift_anchors(self):
        """Cumulative integral of b1/b0 at each master-mesh point."""
        ratio = lambda t: eval_coeff(self.b1, t) / eval_coeff(self.b0, t)
        mesh = self.master_mesh
        anchors = [0.0]
        for a, b in zip(mesh, mesh[1:]):
            val, _ = quad(ratio, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
            anchors.append(anchors[-1] + val)
        return np.array(anchors)

    @cached_property
    def _drift_pieces(self):
        """Per-interval Chebyshev antiderivative of b1/b0 (fast path for the
        Wronskian inside kernel quadratures).

        The ratio is analytic on each master interval because b0 stays away
        from zero, so a moderate-degree fit reaches machine accuracy; its
        value is pinned to the adaptive-quadrature anchors at the left end.
        """
        cheb = np.polynomial.chebyshev
        mesh = self.master_mesh
        pieces = []
        for a, b in zip(mesh, mesh[1:]):
            for deg in (32, 64, 96):
                t = np.cos((2 * np.arange(deg + 1) + 1) * np.pi / (2 * (deg + 1)))
                xs = 0.5 * (a + b) + 0.5 * (b - a) * t
                vals = np.array([eval_coeff(self.b1, x) / eval_coeff(self.b0, x)
                                 for x in xs])
                coef = cheb.chebfit(t, vals, deg=deg)
                tail = np.max(np.abs(coef[-3:]))
                if tail <= 1e-14 * max(1.0, np.max(np.abs(coef))):
                    break
            anti = cheb.chebint(coef) * (0.5 * (b - a))
            pieces.append((anti, cheb.chebval(-1.0, anti)))
        return pieces


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which field, which rule, human-readable message."""

    field: str
    rule: str
    message: str

    def __str__(self):
        return f"{self.field}: [{self.rule}] {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, field_name, rule, message):
        self.violations.append(Violation(field_name, rule, message))

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def __str__(self):
        return "\n".join(str(v) for v in self.violations) if self.violations else "ok"


def _check_coefficient(c, name, report):
    if c.kind not in ("constant", "piecewise"):
        report.add(name, "kind", f"unknown coefficient kind {c.kind!r}")
        return False
    if c.is_constant:
        if not np.isfinite(c.value):
            report.add(name, "finite", "constant value is not finite")
            return False
        return True
    bp = c.breakpoints
    if len(bp) < 2:
        report.add(name, "breakpoints", "need at least two breakpoints")
        return False
    if any(not np.isfinite(b) for b in bp):
        report.add(name, "breakpoints", "non-finite breakpoint")
        return False
    if bp[0] != 0.0 or bp[-1] != 1.0:
        report.add(name, "breakpoints", "breakpoints must span exactly [0, 1]")
        return False
    if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
        report.add(name, "breakpoints", "breakpoints must be strictly increasing")
        return False
    if len(c.polys) != len(bp) - 1:
        report.add(name, "polys", "one polynomial required per interval")
        return False
    for i, p in enumerate(c.polys):
        if len(p) == 0 or len(p) > 4:
            report.add(name, "degree", f"interval {i}: degree must be <= 3")
            return False
        if any(not np.isfinite(v) for v in p):
            report.add(name, "finite", f"interval {i}: non-finite coefficient")
            return False
    return True


def _check_measure(m, name, report):
    seen = set()
    for x, w in m.atoms:
        if not (0.0 < x < 1.0):
            report.add(name, "atom-location", f"atom at x={x} must lie strictly inside (0, 1)")
        if w <= 0.0 or not np.isfinite(w):
            report.add(name, "atom-weight", f"atom at x={x} has non-positive weight {w}")
        if x in seen:
            report.add(name, "atom-distinct", f"duplicate atom location x={x}")
        seen.add(x)
    nb, nv = len(m.density_breakpoints), len(m.density_values)
    if nv or nb:
        if nb != nv + 1:
            report.add(name, "density-shape", f"{nb} breakpoints need {nb - 1} values, got {nv}")
            return
        bp = m.density_breakpoints
        if bp[0] != 0.0 or bp[-1] != 1.0:
            report.add(name, "density-breakpoints", "density mesh must span exactly [0, 1]")
            return
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            report.add(name, "density-breakpoints", "density breakpoints must be strictly increasing")
            return
        if any(v < 0 or not np.isfinite(v) for v in m.density_values):
            report.add(name, "density-sign", "density values must be nonnegative and finite")
            return
    mass = m.mass()
    if abs(mass - 1.0) > MASS_TOL:
        report.add(name, "mass", f"measure mass {mass!r} != 1")


def validate(problem):
    """Check every invariant; returns a report (empty iff valid).

    Pure and idempotent: violations are data, not faults.
    """
    report = ValidationReport()
    b0_ok = _check_coefficient(problem.b0, "b0", report)
    _check_coefficient(problem.b1, "b1", report)
    if b0_ok:
        _, hi = problem.b0.extrema()
        if not (hi <= -problem.b0_floor):
            report.add("b0", "sign", f"b0 must be <= -{problem.b0_floor:g} everywhere; max is {hi:g}")
    _check_measure(problem.nu0, "nu0", report)
    _check_measure(problem.nu1, "nu1", report)
    return report


def require_valid(problem):
    """Raise InvalidProblemError unless the problem validates cleanly."""
    report = validate(problem)
    if not report.ok:
        raise InvalidProblemError(report.violations)


def eval_coeff(c, x):
    """Evaluate a coefficient at x in [0, 1].

    At interior breakpoints the right-hand interval's polynomial is used;
    x = 1 evaluates the last interval at its right endpoint.
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x={x} outside [0, 1]")
    if c.is_constant:
        return c.value
    idx = int(np.searchsorted(c.breakpoints, x, side="right")) - 1
    idx = min(max(idx, 0), len(c.polys) - 1)
    return float(np.polynomial.polynomial.polyval(x, np.asarray(c.polys[idx])))


def drift_integral(problem, x):
    """Integral of b1/b0 from 0 to x.

    Anchored at master-mesh points by adaptive quadrature; within an interval
    the cached Chebyshev antiderivative supplies the remainder.
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x={x} outside [0, 1]")
    if problem.b1.is_constant and problem.b0.is_constant:
        return problem.b1.value / problem.b0.value * x
    mesh = problem.master_mesh
    anchors = problem._drift_anchors
    j = int(np.searchsorted(mesh, x, side="right")) - 1
    j = min(max(j, 0), len(mesh) - 2)
    if x == mesh[j]:
        return float(anchors[j])
    a, b = mesh[j], mesh[j + 1]
    anti, left = problem._drift_pieces[j]
    t = 2.0 * (x - a) / (b - a) - 1.0
    return float(anchors[j] + np.polynomial.chebyshev.chebval(t, anti) - left)


def wronskian(problem, x):
    """exp(-integral of b1/b0 from 0 to x), the Wronskian of the fundamental pair."""
    require_valid(problem)
    return float(np.exp(-drift_integral(problem, x)))
