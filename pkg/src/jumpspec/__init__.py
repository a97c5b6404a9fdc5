"""Spectra of 1-D diffusion operators with nonlocal (jump) boundary conditions.

The operator b0(x) y'' + b1(x) y' on (0, 1) with boundary conditions tying
the endpoint values to interior averages, y(0) = int y dnu0 and
y(1) = int y dnu1, has a purely discrete spectrum given by the zeros of an
entire characteristic determinant; the order of each zero equals the
algebraic multiplicity of the eigenvalue.  This package evaluates that
determinant from the fundamental ODE system, locates its zeros with the
argument principle, counts multiplicities by winding numbers, and applies
the resolvent through its Dirichlet-plus-rank-one decomposition.
"""

from .characteristic import (
    CharMatrix,
    GridSample,
    char_matrix,
    delta,
    delta_grid,
    delta_with_prime,
    measure_moment,
)
from .errors import (
    ContourError,
    ContourThroughZeroError,
    InvalidProblemError,
    JumpspecError,
    MultiplicityInconsistencyError,
    NearSingularityError,
    NotFoundError,
    ProblemFormatError,
    RefinementError,
    StiffnessError,
    SubdivisionDepthError,
    WindingAccuracyError,
)
from .io import (
    load_problem,
    problem_from_dict,
    problem_to_dict,
    save_problem,
)
from .ode import (
    BasisPoint,
    ClosedFormBasis,
    FundamentalBasis,
    basis_for,
    closed_form_basis,
    eval_basis,
    integrate_basis,
)
from .oracles import (
    DriftFreeReduction,
    MidpointDriftSpec,
    ThreePointSpec,
    midpoint_drift_delta_reduced,
    midpoint_drift_gap,
    midpoint_drift_problem,
    midpoint_drift_spectrum,
    three_point_delta,
    three_point_problem,
    three_point_spectrum,
)
from .problem import (
    BoundaryMeasure,
    Coefficient,
    Problem,
    ValidationReport,
    Violation,
    eval_coeff,
    require_valid,
    validate,
    wronskian,
)
from .region import ContourRegion
from .resolvent import (
    SampledFunction,
    green_dirichlet_apply,
    green_dirichlet_evaluator,
    measure_apply,
    operator_residual,
    resolvent_apply,
    resolvent_evaluator,
    tilde_resolvent_apply,
    tilde_resolvent_evaluator,
)
from .rootfinder import (
    Eigenvalue,
    SpectrumResult,
    count_zeros,
    count_zeros_detailed,
    find_spectrum,
    localize,
    refine,
    spectral_gap,
    split_region_clear,
)
from .settings import DEFAULT_TOL, ToleranceSettings

__version__ = "0.1.0"
