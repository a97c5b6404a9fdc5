import mpmath as mp
import numpy as np
import pytest

from jumpspec import (
    Coefficient,
    DEFAULT_TOL,
    Problem,
    StiffnessError,
    closed_form_basis,
    eval_basis,
    integrate_basis,
    wronskian,
)
from jumpspec.ode import ClosedFormBasis, _cs_pair, closed_form_point12

from conftest import random_problem


def const_problem(b0, b1, nu_x=0.5):
    from jumpspec import BoundaryMeasure
    return Problem(b0=Coefficient.constant(b0), b1=Coefficient.constant(b1),
                   nu0=BoundaryMeasure.point(nu_x), nu1=BoundaryMeasure.point(nu_x))


class TestInitialConditions:
    def test_at_zero(self, unit_problem):
        basis = integrate_basis(unit_problem, 3.0 + 1.0j)
        pt = eval_basis(basis, 0.0)
        assert pt == pytest.approx((1, 0, 0, 1, 0, 0, 0, 0), abs=1e-14)

    def test_lambda_zero_keeps_constants(self, unit_problem):
        basis = integrate_basis(unit_problem, 0.0)
        for x in np.linspace(0, 1, 7):
            assert basis.point12(x)[0] == 1.0  # y1 identically 1, exactly


class TestClosedFormValues:
    def test_cos_sin_at_pi_squared(self, unit_problem):
        basis = integrate_basis(unit_problem, np.pi**2)
        end = basis.at_one()
        assert end[0] == pytest.approx(-1.0, abs=1e-9)   # cos(pi)
        assert abs(end[2]) < 1e-9                        # sin(pi)/pi

    def test_closed_form_matches_trig(self):
        pt = closed_form_basis(-1.0, 0.0, np.pi**2, 1.0)
        assert pt.y1 == pytest.approx(-1.0, abs=1e-14)
        assert abs(pt.y2) < 1e-14

    def test_midpoint_at_4pi2(self):
        pt = closed_form_basis(-1.0, 0.0, 4 * np.pi**2, 0.5)
        assert pt.y1 == pytest.approx(-1.0, abs=1e-13)
        assert abs(pt.y2) < 1e-13

    def test_degenerate_mu_gives_linear_y2(self):
        # lam chosen so mu^2 = 0: y2(x) = x * exp(-beta x)
        b0, b1 = -1.0, 1.0
        beta = b1 / (2 * b0)
        lam = -b0 * beta**2  # s = -lam/b0 - beta^2 = 0
        for x in (0.2, 0.7, 1.0):
            pt = closed_form_basis(b0, b1, lam, x)
            assert pt.y2 == pytest.approx(x * np.exp(-beta * x), rel=1e-13)

    def test_rejects_nonnegative_b0(self):
        with pytest.raises(ValueError):
            closed_form_basis(1.0, 0.0, 1.0, 0.5)

    def test_series_branch_matches_mpmath(self):
        mp.mp.dps = 40
        rng = np.random.default_rng(2)
        for _ in range(20):
            s = complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) * 10.0 ** rng.integers(-9, 1)
            x = rng.uniform(0.1, 1.0)
            C, S, Cs, Ss, Css, Sss = _cs_pair(s, x)
            sm = mp.mpc(s)
            mu = mp.sqrt(sm)
            C_ref = mp.cos(mu * x)
            S_ref = mp.sin(mu * x) / mu if sm != 0 else mp.mpf(x)
            assert abs(C - complex(C_ref)) < 1e-14 * (1 + abs(C))
            assert abs(S - complex(S_ref)) < 1e-14 * (1 + abs(S))
            # derivative formulas against mpmath central differences in s
            h = 1e-18  # exact in 40-digit arithmetic
            dS = (mp.sin(mp.sqrt(sm + h) * x) / mp.sqrt(sm + h)
                  - mp.sin(mp.sqrt(sm - h) * x) / mp.sqrt(sm - h)) / (2 * h)
            assert abs(Ss - complex(dS)) < 1e-12 * (1 + abs(Ss))


class TestIntegratorVsClosedForm:
    def test_random_lambda_agreement(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            b0 = -rng.uniform(0.4, 2.0)
            b1 = rng.uniform(-2.0, 2.0)
            lam = rng.uniform(0, 2000) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            basis = integrate_basis(const_problem(b0, b1), lam)
            for x in rng.uniform(0, 1, 4):
                got = basis.point12(x)
                want = closed_form_point12(b0, b1, lam, x)
                assert np.max(np.abs(got - want) / (1 + np.abs(want))) < 1e-8

    def test_dense_output_matches_breakpoint_aligned_run(self, unit_problem):
        # re-integration that stops exactly at x: insert x as a mesh breakpoint
        lam = 700.0 - 40.0j
        basis = integrate_basis(unit_problem, lam)
        for x in (0.311, 0.73):
            split = Problem(
                b0=Coefficient.piecewise([0.0, x, 1.0], [[-1.0], [-1.0]]),
                b1=unit_problem.b1, nu0=unit_problem.nu0, nu1=unit_problem.nu1)
            aligned = integrate_basis(split, lam)
            diff = np.max(np.abs(basis.point12(x) - aligned.point12(x)))
            assert diff < 1e-9


class TestLambdaDerivatives:
    def test_against_finite_differences_integrated(self):
        rng = np.random.default_rng(3)
        tol = DEFAULT_TOL.with_(rtol=1e-12, atol=1e-14)
        for _ in range(4):
            p = random_problem(rng)
            lam = complex(rng.uniform(-30, 80), rng.uniform(-30, 30))
            h = 1e-5 * (1 + abs(lam))
            b0 = integrate_basis(p, lam, tol)
            bp = integrate_basis(p, lam + h, tol)
            bm = integrate_basis(p, lam - h, tol)
            for x in (0.37, 1.0):
                v, vp, vm = b0.point12(x), bp.point12(x), bm.point12(x)
                fd = (vp[:4] - vm[:4]) / (2 * h)
                assert np.max(np.abs(v[4:8] - fd) / (1 + np.abs(fd))) < 1e-6

    def test_second_derivatives_closed_form_fd(self):
        b0v, b1v = -1.3, 0.7
        lam = 55.0 + 9.0j
        h = 1e-4 * (1 + abs(lam))
        v = closed_form_point12(b0v, b1v, lam, 0.8)
        vp = closed_form_point12(b0v, b1v, lam + h, 0.8)
        vm = closed_form_point12(b0v, b1v, lam - h, 0.8)
        fd2 = (vp[:4] - 2 * v[:4] + vm[:4]) / h**2
        assert np.max(np.abs(v[8:12] - fd2) / (1 + np.abs(fd2))) < 1e-6

    def test_dl_y2_at_one_value(self):
        # central finite difference oracle, frozen: dl y2(1) at lam = pi^2
        lam, h = np.pi**2, 1e-5
        f = lambda l: closed_form_point12(-1.0, 0.0, l, 1.0)[2]
        fd = (f(lam + h) - f(lam - h)) / (2 * h)
        basis = integrate_basis(const_problem(-1.0, 0.0), lam)
        assert basis.at_one()[6] == pytest.approx(fd, abs=1e-7)
        assert basis.at_one()[6] == pytest.approx(-1.0 / (2 * np.pi**2), abs=1e-9)


class TestStructure:
    def test_wronskian_identity_along_mesh(self):
        # relative to the size of the products: when solutions grow, the
        # difference of ~|y|^2 terms cannot beat roundoff relative to W itself
        rng = np.random.default_rng(8)
        for _ in range(4):
            p = random_problem(rng)
            lam = rng.uniform(0, 1e4) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            basis = integrate_basis(p, lam)
            for x in basis.mesh[:: max(1, len(basis.mesh) // 12)]:
                pt = basis.point12(float(x))
                w = wronskian(p, float(x))
                scale = max(abs(w), abs(pt[0] * pt[3]) + abs(pt[1] * pt[2]))
                assert abs(pt[0] * pt[3] - pt[1] * pt[2] - w) <= 1e-8 * scale

    def test_wronskian_identity_relative_in_oscillatory_regime(self):
        # for positive real lambda the solutions stay O(1) and the identity
        # holds relative to W itself
        rng = np.random.default_rng(81)
        for _ in range(3):
            p = random_problem(rng)
            lam = rng.uniform(10, 1e4)
            basis = integrate_basis(p, lam)
            for x in basis.mesh[:: max(1, len(basis.mesh) // 10)]:
                pt = basis.point12(float(x))
                w = wronskian(p, float(x))
                assert abs(pt[0] * pt[3] - pt[1] * pt[2] - w) <= 1e-8 * abs(w)

    def test_entire_in_lambda_cauchy_mean(self, unit_problem):
        # mean over a small circle equals the center value for entire functions
        lam0 = 37.0 + 5.0j
        x = 0.63
        center = integrate_basis(unit_problem, lam0).point12(x)[0]
        pts = lam0 + 1e-2 * np.exp(2j * np.pi * np.arange(64) / 64)
        mean = np.mean([integrate_basis(unit_problem, lam).point12(x)[0] for lam in pts])
        assert abs(mean - center) < 1e-8 * (1 + abs(center))

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(4)
        p = random_problem(rng)
        lam = 23.0 + 17.0j
        b1 = integrate_basis(p, lam)
        b2 = integrate_basis(p, np.conj(lam))
        for x in (0.2, 0.9):
            assert np.allclose(b2.point12(x), np.conj(b1.point12(x)), rtol=0, atol=1e-12)

    def test_eval_outside_domain(self, unit_problem):
        basis = integrate_basis(unit_problem, 1.0)
        with pytest.raises(ValueError):
            eval_basis(basis, 1.2)

    def test_step_underflow_raises_with_location(self, unit_problem):
        tol = DEFAULT_TOL.with_(rtol=1e-300, atol=1e-300)
        with pytest.raises(StiffnessError) as err:
            integrate_basis(unit_problem, 1e4, tol)
        assert 0.0 <= err.value.x <= 1.0

    def test_integral_over_quadratic_exact(self):
        # dense-output moments: int_0^1 y2 dx at lam = 0 is int x dx = 1/2
        basis = integrate_basis(const_problem(-1.0, 0.0), 0.0)
        integ, _ = basis.integral_over(0.0, 1.0)
        assert integ[2] == pytest.approx(0.5, abs=1e-13)
        cf = ClosedFormBasis(-1.0, 0.0, 0.0)
        integ_cf, _ = cf.integral_over(0.0, 1.0)
        assert integ_cf[2] == pytest.approx(0.5, abs=1e-13)
