"""Closed forms for the two explicitly solvable problem families.

Three-point family: -y'' = lam*y with y(0) = y(a) = y(1) (unit diffusion, no
drift, both boundary measures a single atom at a).  Its determinant factors
into three sines, so the spectrum and all multiplicities can be enumerated.

Midpoint-drift family: b0*y'' + b1*y' = lam*y with y(0) = y(1/2) = y(1)
(constant coefficients, both measures an atom at 1/2).  After the exponential
substitution the determinant reduces to a sinc-times-shifted-cosine product
whose zeros give three explicit eigenvalue branches, all simple when b1 != 0.

These serve both as user-facing fast paths and as independent references for
the numerical spectrum machinery.
"""

import cmath
import math
from dataclasses import dataclass

from .errors import NotFoundError
from .problem import BoundaryMeasure, Coefficient, Problem

__all__ = [
    "ThreePointSpec",
    "MidpointDriftSpec",
    "DriftFreeReduction",
    "three_point_delta",
    "three_point_spectrum",
    "three_point_problem",
    "midpoint_drift_spectrum",
    "midpoint_drift_gap",
    "midpoint_drift_delta_reduced",
    "midpoint_drift_problem",
]

_MERGE_RTOL = 1e-9


class DriftFreeReduction(NotFoundError):
    """Signals that a drift-free midpoint problem reduces to the three-point
    family (a = 1/2) and should be handled there."""


@dataclass(frozen=True)
class ThreePointSpec:
    """Interior return point a of the drift-free three-point problem."""

    a: float

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ValueError(f"a={self.a} must lie in (0, 1)")


@dataclass(frozen=True)
class MidpointDriftSpec:
    """Constant coefficients of the midpoint-return problem; b0 < 0."""

    b0: float
    b1: float

    def __post_init__(self):
        if self.b0 >= 0.0:
            raise ValueError(f"b0={self.b0} must be negative")


def _sinc(z):
    """sin(z)/z, entire; series branch keeps full accuracy near 0."""
    z = complex(z)
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 + z2 * (-1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 * (-1.0 / 5040.0 + z2 / 362880.0)))
    return cmath.sin(z) / z


def three_point_delta(spec, lam):
    """Characteristic determinant of the three-point problem.

    Equals -(4/sqrt(lam)) sin(sqrt(lam)(1-a)/2) sin(sqrt(lam) a/2)
    sin(sqrt(lam)/2), written as a sinc product so the value is exact at
    lam = 0 and independent of the square-root branch (the expression is even
    in sqrt(lam)).
    """
    a = spec.a
    s = cmath.sqrt(complex(lam))
    return (-lam * a * (1.0 - a) / 2.0
            * _sinc(s * (1.0 - a) / 2.0) * _sinc(s * a / 2.0) * _sinc(s / 2.0))


def three_point_spectrum(spec, re_max):
    """All eigenvalues in (0, re_max] plus the trivial one at 0.

    Enumerates the zeros of each sine factor, merges coincidences, and assigns
    multiplicity 3 exactly when all three factors vanish together (which
    happens precisely at common squared multiples, forcing a rational).
    Returns a list of (lambda, multiplicity) sorted by lambda.
    """
    if re_max <= 0:
        raise ValueError("re_max must be positive")
    a = spec.a
    hits = []  # (lambda, factor tag)
    for tag, period in (("whole", 2.0 * math.pi),
                        ("left", 2.0 * math.pi / a),
                        ("right", 2.0 * math.pi / (1.0 - a))):
        k = 1
        while (k * period) ** 2 <= re_max * (1.0 + 1e-12):
            hits.append(((k * period) ** 2, tag))
            k += 1
    hits.sort()
    out = [(0.0, 1)]
    group, tags = [], set()
    for lam, tag in hits + [(float("inf"), "sentinel")]:
        if group and lam > group[-1] * (1.0 + _MERGE_RTOL):
            mult = 3 if {"whole", "left", "right"} <= tags else len(group)
            out.append((sum(group) / len(group), mult))
            group, tags = [], set()
        if tag != "sentinel":
            group.append(lam)
            tags.add(tag)
    return out


def three_point_problem(spec):
    """The same operator as a general Problem (for the numerical machinery)."""
    atom = BoundaryMeasure.point(spec.a)
    return Problem(b0=Coefficient.constant(-1.0), b1=Coefficient.constant(0.0),
                   nu0=atom, nu1=atom)


def midpoint_drift_delta_reduced(spec, u):
    """Reduced determinant of the midpoint-drift problem in the variable
    u = -lam/b0 - q with q = (b1/(2 b0))^2:

        -2 A^2 (sin(sqrt(u)/2)/sqrt(u)) ((A^2+1)/(2A) - cos(sqrt(u)/2)),

    A = exp(-b1/(4 b0)).  Substituting u recovers Delta(lam) exactly.
    """
    A = math.exp(-spec.b1 / (4.0 * spec.b0))
    s = cmath.sqrt(complex(u))
    return -A * A * _sinc(s / 2.0) * ((A * A + 1.0) / (2.0 * A) - cmath.cos(s / 2.0))


def midpoint_drift_spectrum(spec, n_max):
    """Eigenvalues of the midpoint-drift problem, all simple (b1 != 0).

    Three branches: lam_{n,1} = -4 b0 n^2 pi^2 - b1^2/(4 b0) for n >= 1,
    lam_{n,2} = -16 b0 n^2 pi^2 - 4 b1 n pi i for n >= 1, and
    lam_{n,3} = -16 b0 n^2 pi^2 + 4 b1 n pi i for n >= 0 (so 0 is included).

    The complex branches come from the cosine-factor zeros of the reduced
    determinant, sqrt(u) = 4 n pi +- 2 i r with cosh(r) = (A^2+1)/(2A), i.e.
    r = -b1/(4 b0); substituting u back gives the imaginary part 4 b1 n pi.
    Raises DriftFreeReduction when b1 == 0: that case is the three-point
    problem at a = 1/2 in disguise and has triple eigenvalues.
    """
    if spec.b1 == 0.0:
        raise DriftFreeReduction(
            "b1 = 0 reduces to the three-point family at a = 1/2 "
            "(use three_point_spectrum with lambda scaled by -b0)")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    b0, b1 = spec.b0, spec.b1
    out = [complex(-16.0 * b0 * n * n * math.pi**2, 4.0 * b1 * n * math.pi)
           for n in range(0, n_max + 1)]
    out += [complex(-4.0 * b0 * n * n * math.pi**2 - b1 * b1 / (4.0 * b0), 0.0)
            for n in range(1, n_max + 1)]
    out += [complex(-16.0 * b0 * n * n * math.pi**2, -4.0 * b1 * n * math.pi)
            for n in range(1, n_max + 1)]
    return sorted(out, key=lambda z: (z.real, z.imag))


def midpoint_drift_gap(spec):
    """Spectral gap (smallest nonzero eigenvalue real part), in closed form.

    Piecewise in |b1|: the real branch -4 b0 pi^2 - b1^2/(4 b0) wins up to
    |b1| = -4 sqrt(3) b0 pi, after that the complex pair at -16 b0 pi^2 takes
    over; the b1 = 0 case is included.
    """
    b0, b1 = spec.b0, spec.b1
    if abs(b1) <= -4.0 * math.sqrt(3.0) * b0 * math.pi:
        return -4.0 * b0 * math.pi**2 - b1 * b1 / (4.0 * b0)
    return -16.0 * b0 * math.pi**2


def midpoint_drift_problem(spec):
    """The same operator as a general Problem."""
    atom = BoundaryMeasure.point(0.5)
    return Problem(b0=Coefficient.constant(spec.b0), b1=Coefficient.constant(spec.b1),
                   nu0=atom, nu1=atom)
