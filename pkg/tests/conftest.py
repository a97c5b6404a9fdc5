"""Shared helpers: randomized problems with piecewise coefficients and
mixed atom/density measures."""

import numpy as np
import pytest

from jumpspec import (
    BoundaryMeasure,
    Coefficient,
    MidpointDriftSpec,
    Problem,
    ThreePointSpec,
    midpoint_drift_problem,
    three_point_problem,
    validate,
)


def random_b0(rng):
    if rng.random() < 0.4:
        return Coefficient.constant(-rng.uniform(0.5, 2.5))
    cuts = np.sort(rng.uniform(0.2, 0.8, rng.integers(1, 3)))
    bp = [0.0, *cuts, 1.0]
    polys = []
    for _ in range(len(bp) - 1):
        c0 = -rng.uniform(0.8, 2.2)
        rest = rng.uniform(-0.15, 0.15, rng.integers(0, 4))
        polys.append([c0, *rest])
    return Coefficient.piecewise(bp, polys)


def random_b1(rng):
    if rng.random() < 0.4:
        return Coefficient.constant(rng.uniform(-1.5, 1.5))
    cuts = np.sort(rng.uniform(0.2, 0.8, rng.integers(1, 3)))
    bp = [0.0, *cuts, 1.0]
    polys = [list(rng.uniform(-1.0, 1.0, rng.integers(1, 5)))
             for _ in range(len(bp) - 1)]
    return Coefficient.piecewise(bp, polys)


def random_measure(rng):
    n_atoms = int(rng.integers(0, 3))
    xs = []
    while len(xs) < n_atoms:
        x = rng.uniform(0.08, 0.92)
        if all(abs(x - y) > 0.05 for y in xs):
            xs.append(x)
    atoms = [(x, rng.uniform(0.2, 1.0)) for x in xs]
    bp, vals = (), ()
    if rng.random() < 0.7 or not atoms:
        k = int(rng.integers(1, 4))
        cuts = np.sort(rng.uniform(0.15, 0.85, k - 1)) if k > 1 else []
        bp = [0.0, *cuts, 1.0]
        vals = list(rng.uniform(0.1, 1.0, k))
    mass = sum(w for _, w in atoms)
    if vals:
        mass += float(np.sum(np.asarray(vals) * np.diff(bp)))
    atoms = [(x, w / mass) for x, w in atoms]
    vals = [v / mass for v in vals]
    return BoundaryMeasure.mixture(atoms, bp, vals)


def random_problem(rng):
    p = Problem(b0=random_b0(rng), b1=random_b1(rng),
                nu0=random_measure(rng), nu1=random_measure(rng))
    assert validate(p).ok
    return p


@pytest.fixture
def unit_problem():
    """-y'' = lam y with both measures an atom at 1/2."""
    return three_point_problem(ThreePointSpec(0.5))


@pytest.fixture
def drift_problem():
    """-y'' + y' = lam y with both measures an atom at 1/2."""
    return midpoint_drift_problem(MidpointDriftSpec(-1.0, 1.0))
