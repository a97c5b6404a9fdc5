import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from jumpspec import (
    BoundaryMeasure,
    Coefficient,
    InvalidProblemError,
    Problem,
    eval_coeff,
    require_valid,
    validate,
    wronskian,
)
from jumpspec.problem import drift_integral

from conftest import random_problem


def make(b0=-1.0, b1=0.0, nu0=None, nu1=None):
    return Problem(
        b0=Coefficient.constant(b0) if np.isscalar(b0) else b0,
        b1=Coefficient.constant(b1) if np.isscalar(b1) else b1,
        nu0=nu0 or BoundaryMeasure.point(0.5),
        nu1=nu1 or BoundaryMeasure.point(0.5),
    )


class TestValidate:
    def test_unit_problem_clean(self):
        assert validate(make()).ok

    def test_measure_mass_violation(self):
        p = make(nu0=BoundaryMeasure.point(0.5, 0.5))
        report = validate(p)
        assert not report.ok
        assert any(v.field == "nu0" and v.rule == "mass" for v in report)

    def test_b0_sign_violation(self):
        report = validate(make(b0=1.0))
        assert any(v.field == "b0" and v.rule == "sign" for v in report)

    def test_b0_floor_with_piecewise_dip(self):
        # max over [0,1] of -0.5 + 0.6 x is 0.1 > -floor, caught exactly
        c = Coefficient.piecewise([0.0, 1.0], [[-0.5, 0.6]])
        assert any(v.rule == "sign" for v in validate(make(b0=c)))

    def test_atom_on_boundary_rejected(self):
        for x in (0.0, 1.0):
            p = make(nu0=BoundaryMeasure.point(x))
            assert any(v.rule == "atom-location" for v in validate(p))

    def test_duplicate_atoms_rejected(self):
        m = BoundaryMeasure.mixture([(0.5, 0.5), (0.5, 0.5)])
        assert any(v.rule == "atom-distinct" for v in validate(make(nu0=m)))

    def test_negative_density_rejected(self):
        m = BoundaryMeasure.mixture([], [0.0, 1.0], [-1.0])
        assert any(v.rule == "density-sign" for v in validate(make(nu0=m)))

    def test_breakpoints_must_span_unit_interval(self):
        c = Coefficient.piecewise([0.0, 0.9], [[-1.0]])
        assert any(v.rule == "breakpoints" for v in validate(make(b0=c)))

    def test_idempotent(self):
        p = make(nu0=BoundaryMeasure.point(0.5, 0.7))
        r1, r2 = validate(p), validate(p)
        assert [str(v) for v in r1] == [str(v) for v in r2]

    def test_random_problems_valid(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            assert validate(random_problem(rng)).ok

    def test_require_valid_raises(self):
        with pytest.raises(InvalidProblemError):
            require_valid(make(b0=1.0))


class TestEvalCoeff:
    def test_constant(self):
        assert eval_coeff(Coefficient.constant(-1.0), 0.3) == -1.0

    def test_piecewise(self):
        c = Coefficient.piecewise([0.0, 0.5, 1.0], [[0.0, 2.0], [1.0]])
        assert eval_coeff(c, 0.25) == pytest.approx(0.5, abs=1e-15)

    def test_interior_breakpoint_uses_right_interval(self):
        c = Coefficient.piecewise([0.0, 0.5, 1.0], [[0.0, 2.0], [1.0]])
        assert eval_coeff(c, 0.5) == 1.0

    def test_endpoints(self):
        c = Coefficient.piecewise([0.0, 0.5, 1.0], [[0.0, 2.0], [3.0, -1.0]])
        assert eval_coeff(c, 0.0) == 0.0
        assert eval_coeff(c, 1.0) == 2.0

    def test_domain_error(self):
        with pytest.raises(ValueError):
            eval_coeff(Coefficient.constant(-1.0), 1.5)


class TestWronskian:
    def test_zero_drift(self):
        p = make()
        for x in (0.0, 0.3, 1.0):
            assert wronskian(p, x) == pytest.approx(1.0, rel=1e-14)

    def test_constant_drift_hand_integral(self):
        # -int_0^1 (1 / -1) dt = 1, so W(1) = e
        p = make(b0=-1.0, b1=1.0)
        assert wronskian(p, 1.0) == pytest.approx(np.e, rel=1e-12)

    def test_at_zero_is_one(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            assert wronskian(random_problem(rng), 0.0) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(b0=st.floats(-10.0, -0.1), b1=st.floats(-5.0, 5.0), x=st.floats(0.0, 1.0))
    def test_constant_coefficients_closed_form(self, b0, b1, x):
        p = make(b0=b0, b1=b1)
        assert wronskian(p, x) == pytest.approx(np.exp(-(b1 / b0) * x), rel=1e-12)

    def test_invalid_problem_rejected(self):
        with pytest.raises(InvalidProblemError):
            wronskian(make(b0=1.0), 0.5)

    def test_piecewise_drift_matches_adaptive_quadrature(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            p = random_problem(rng)
            ratio = lambda t: eval_coeff(p.b1, t) / eval_coeff(p.b0, t)
            for x in rng.uniform(0.05, 1.0, 4):
                ref, _ = quad(ratio, 0.0, x, epsabs=1e-14, epsrel=1e-13,
                              limit=300, points=[b for b in p.master_mesh if b < x])
                assert drift_integral(p, x) == pytest.approx(ref, abs=1e-12)


class TestMasterMesh:
    def test_merges_all_breakpoints(self):
        b0 = Coefficient.piecewise([0.0, 0.4, 1.0], [[-1.0], [-1.0]])
        b1 = Coefficient.piecewise([0.0, 0.7, 1.0], [[0.0], [0.0]])
        nu = BoundaryMeasure.mixture([], [0.0, 0.25, 1.0], [2.0, 2 / 3])
        p = Problem(b0=b0, b1=b1, nu0=nu, nu1=BoundaryMeasure.point(0.5))
        assert list(p.master_mesh) == [0.0, 0.25, 0.4, 0.7, 1.0]

    def test_atoms_not_in_mesh(self):
        p = make(nu0=BoundaryMeasure.point(0.3))
        assert list(p.master_mesh) == [0.0, 1.0]


class TestMeasureMass:
    def test_accepted_mass_within_tolerance(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            p = random_problem(rng)
            for m in (p.nu0, p.nu1):
                assert abs(m.mass() - 1.0) <= 1e-12
