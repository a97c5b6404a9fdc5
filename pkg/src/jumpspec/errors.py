"""Exception types shared across the package."""


class JumpspecError(Exception):
    """Base class for all package-specific failures."""


class InvalidProblemError(JumpspecError):
    """An operation received a problem that fails validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid problem: {lines}")


class ProblemFormatError(JumpspecError):
    """A problem description document could not be parsed."""


class StiffnessError(JumpspecError):
    """Adaptive step size underflowed; carries the failure location."""

    def __init__(self, x, lam, message=None):
        self.x = x
        self.lam = lam
        super().__init__(message or f"step size underflow at x={x:.6g} (lambda={lam})")


class ContourError(JumpspecError):
    """Base class for argument-principle contour failures."""


class ContourThroughZeroError(ContourError):
    """Edge clearance could not be established after all perturbation attempts."""


class WindingAccuracyError(ContourError):
    """Contour integral failed to settle near an integer at the requested accuracy."""

    def __init__(self, winding, residual, message=None):
        self.winding = winding
        self.residual = residual
        super().__init__(
            message
            or f"winding {winding} has non-integer residual {residual:.3e}"
        )


class SubdivisionDepthError(ContourError):
    """Quadtree subdivision exceeded the maximum depth (pathological clustering)."""


class RefinementError(JumpspecError):
    """Newton refinement failed to converge inside its box."""


class MultiplicityInconsistencyError(JumpspecError):
    """Winding count around a refined zero disagrees with the box count."""

    def __init__(self, location, winding, expected):
        self.location = location
        self.winding = winding
        self.expected = expected
        super().__init__(
            f"winding {winding} around {location} does not match box count {expected}"
        )


class NearSingularityError(JumpspecError):
    """Resolvent requested too close to a spectral point; carries the small scale."""

    def __init__(self, lam, magnitude, what, message=None):
        self.lam = lam
        self.magnitude = magnitude
        self.what = what
        super().__init__(
            message
            or f"{what} too small at lambda={lam}: |{what}|={magnitude:.3e}"
        )


class NotFoundError(JumpspecError):
    """A search produced no result (e.g. empty spectrum in a gap region)."""
