"""Tolerance and algorithm knobs shared by the integrator and the root finder."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ToleranceSettings:
    """Numerical tolerances.

    rtol/atol drive the adaptive Runge-Kutta error control.  The remaining
    fields tune the argument-principle machinery and are rarely touched.
    """

    rtol: float = 1e-10
    atol: float = 1e-12

    # winding-number quadrature: absolute target on N and accepted distance
    # from the nearest integer
    winding_target: float = 1e-4
    integer_residual: float = 1e-3

    # contour edge clearance: min |Delta| on an edge must exceed
    # clearance_ratio * median |Delta|, sampled at clearance_samples points
    clearance_ratio: float = 1e-6
    clearance_samples: int = 33
    max_clearance_attempts: int = 8

    # Newton refinement
    newton_max_iter: int = 50
    newton_step_tol: float = 1e-12

    # quadtree localization
    isolation_factor: float = 1e-2
    max_depth: int = 40
    multiplicity_cap: int = 8

    # set to force the Runge-Kutta path even for constant coefficients
    force_integration: bool = False

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT_TOL = ToleranceSettings()
