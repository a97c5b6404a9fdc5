"""Command-line front end.

Subcommands: validate, eigs, mult, grid, resolve, gap.  Exit codes are
stable: 0 success, 1 validation failure, 2 parse failure, 3 numerical
failure, 4 not-found.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as jio
from .characteristic import GridSample, delta
from .errors import (
    InvalidProblemError,
    JumpspecError,
    NotFoundError,
    ProblemFormatError,
)
from .oracles import (
    DriftFreeReduction,
    MidpointDriftSpec,
    ThreePointSpec,
    midpoint_drift_delta_reduced,
    midpoint_drift_gap,
    midpoint_drift_spectrum,
    three_point_delta,
    three_point_spectrum,
)
from .problem import validate
from .region import ContourRegion
from .resolvent import SampledFunction, resolvent_apply
from .rootfinder import (
    Eigenvalue,
    SpectrumResult,
    count_zeros_detailed,
    find_spectrum,
    localize,
    refine,
    spectral_gap,
)
from .settings import DEFAULT_TOL

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_NUMERICAL = 3
EXIT_NOT_FOUND = 4


def _add_common(sp):
    sp.add_argument("problem", help="problem description file (JSON)")
    sp.add_argument("--rtol", type=float, default=DEFAULT_TOL.rtol,
                    help="relative ODE tolerance")
    sp.add_argument("--atol", type=float, default=DEFAULT_TOL.atol,
                    help="absolute ODE tolerance")
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads for grid sampling")
    sp.add_argument("--out", metavar="PATH", default=None,
                    help="write output here instead of stdout")
    sp.add_argument("--format", choices=("csv", "json-doc"), default="csv",
                    help="output format")


def _add_region(sp, required=True):
    sp.add_argument("--region", nargs=4, type=float, required=required,
                    metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jumpspec",
        description="Eigenvalues, multiplicities and resolvents of diffusion "
                    "operators with nonlocal boundary conditions.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="check a problem file")
    _add_common(sp)

    sp = sub.add_parser("eigs", help="find all eigenvalues in a rectangle")
    _add_common(sp)
    _add_region(sp)
    sp.add_argument("--oracle", choices=("dexin", "de"), default=None,
                    help="closed-form reference family instead of the numerical "
                         "search: 'dexin' = drift-free single-return-point "
                         "problem, 'de' = constant-drift midpoint-return problem")

    sp = sub.add_parser("mult", help="multiplicity of the zero nearest a point")
    _add_common(sp)
    sp.add_argument("--lambda", dest="lam", nargs=2, type=float, required=True,
                    metavar=("RE", "IM"))

    sp = sub.add_parser("grid", help="sample the determinant on a grid (plot data)")
    _add_common(sp)
    _add_region(sp)
    sp.add_argument("--nx", type=int, default=64)
    sp.add_argument("--ny", type=int, default=64)

    sp = sub.add_parser("resolve", help="apply the resolvent to a right-hand side")
    _add_common(sp)
    sp.add_argument("--lambda", dest="lam", nargs=2, type=float, required=True,
                    metavar=("RE", "IM"))
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--f", metavar="PATH", help="right-hand side as CSV x,re_f,im_f")
    group.add_argument("--f-const", type=float, default=None,
                       help="constant right-hand side")
    sp.add_argument("--nodes", type=int, default=257, help="output mesh size")

    sp = sub.add_parser("gap", help="spectral gap (closed form when available)")
    _add_common(sp)
    _add_region(sp, required=False)
    return parser


def _tol_from(args):
    return DEFAULT_TOL.with_(rtol=args.rtol, atol=args.atol)


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    problem, unknown = jio.load_problem(args.problem)
    report = validate(problem)
    report.violations[:0] = unknown
    return problem, report


def cmd_validate(args):
    _, report = _load(args)
    if report.ok:
        return EXIT_OK
    _emit(args, "\n".join(str(v) for v in report) + "\n")
    return EXIT_VALIDATION


def _require_valid_cli(args):
    problem, report = _load(args)
    if not report.ok:
        sys.stderr.write("\n".join(str(v) for v in report) + "\n")
        raise InvalidProblemError(report.violations)
    return problem


def _single_atom(measure):
    if len(measure.atoms) == 1 and not measure.has_density:
        return measure.atoms[0]
    return None


def _oracle_spectrum(problem, region, which):
    """Spectrum from a closed-form family, filtered to the region."""
    a0 = _single_atom(problem.nu0)
    a1 = _single_atom(problem.nu1)
    shape_ok = (problem.constant_coefficients and a0 is not None and a1 is not None
                and a0 == a1 and abs(a0[1] - 1.0) <= 1e-12)
    if not shape_ok:
        raise InvalidProblemError(
            [jio.Violation("problem", "oracle-shape",
                           f"problem does not match the {which!r} oracle family")])
    b0v, b1v = problem.b0.value, problem.b1.value
    atom_x = a0[0]
    eigs = []
    if which == "dexin":
        if b1v != 0.0:
            raise InvalidProblemError(
                [jio.Violation("b1", "oracle-shape", "dexin oracle requires b1 == 0")])
        spec = ThreePointSpec(atom_x)
        scale = -b0v  # -b0 y'' = lam y rescales the unit-diffusion spectrum
        for lam_unit, mult in three_point_spectrum(spec, region.re_max / scale + 1.0):
            lam = scale * lam_unit
            if region.contains(complex(lam, 0.0)):
                eigs.append(Eigenvalue(
                    location=complex(lam, 0.0), multiplicity=mult,
                    residual=abs(scale * three_point_delta(spec, lam_unit))))
    else:
        if abs(atom_x - 0.5) > 1e-12:
            raise InvalidProblemError(
                [jio.Violation("nu0", "oracle-shape", "de oracle requires the atom at 1/2")])
        spec = MidpointDriftSpec(b0v, b1v)
        n_max = int(np.ceil(np.sqrt(max(region.re_max, 1.0)
                                    / (-4.0 * b0v * np.pi**2)))) + 1
        try:
            cands = midpoint_drift_spectrum(spec, n_max)
        except DriftFreeReduction:
            return _oracle_spectrum(problem, region, "dexin")
        q = (b1v / (2.0 * b0v)) ** 2
        for lam in cands:
            if region.contains(lam):
                u = -lam / b0v - q
                eigs.append(Eigenvalue(
                    location=lam, multiplicity=1,
                    residual=abs(midpoint_drift_delta_reduced(spec, u))))
    eigs.sort(key=lambda e: (e.location.real, e.location.imag))
    return SpectrumResult(region=region, eigenvalues=tuple(eigs),
                          total_count=sum(e.multiplicity for e in eigs),
                          diagnostics={"method": f"oracle-{which}"})


def cmd_eigs(args):
    problem = _require_valid_cli(args)
    region = ContourRegion(*args.region)
    if args.oracle:
        result = _oracle_spectrum(problem, region, args.oracle)
    else:
        result = find_spectrum(problem, region, _tol_from(args))
    text = jio.spectrum_to_json(result) if args.format == "json-doc" else jio.spectrum_to_csv(result)
    _emit(args, text)
    return EXIT_OK


def cmd_mult(args):
    problem = _require_valid_cli(args)
    tol = _tol_from(args)
    center = complex(args.lam[0], args.lam[1])
    half = 2e-2
    box = ContourRegion(center.real - half, center.real + half,
                        center.imag - half, center.imag + half)
    detail = count_zeros_detailed(problem, box, tol)
    if detail.count == 0:
        sys.stderr.write(f"no zero within {half:g} of {center}\n")
        return EXIT_NOT_FOUND
    boxes = localize(problem, detail.region, tol)
    eigs = [refine(problem, b, c, tol) for b, c in boxes]
    best = min(eigs, key=lambda e: abs(e.location - center))
    text = (jio.eigenvalue_to_json(best) if args.format == "json-doc"
            else jio.eigenvalue_to_csv(best))
    _emit(args, text)
    return EXIT_OK


def cmd_grid(args):
    problem = _require_valid_cli(args)
    tol = _tol_from(args)
    region = ContourRegion(*args.region)
    if args.nx < 2 or args.ny < 2:
        raise ProblemFormatError("grid needs --nx and --ny >= 2")
    res = np.linspace(region.re_min, region.re_max, args.nx)
    ims = np.linspace(region.im_min, region.im_max, args.ny)

    def row(re):
        return [delta(problem, complex(re, im), tol) for im in ims]

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(row, res))
    else:
        rows = [row(re) for re in res]
    grid = GridSample(rectangle=region, nx=args.nx, ny=args.ny,
                      values=np.array(rows))
    text = jio.grid_to_json(grid) if args.format == "json-doc" else jio.grid_to_csv(grid)
    _emit(args, text)
    return EXIT_OK


def cmd_resolve(args):
    problem = _require_valid_cli(args)
    tol = _tol_from(args)
    lam = complex(args.lam[0], args.lam[1])
    if args.f is not None:
        f = jio.sampled_from_csv(args.f)
    else:
        f = SampledFunction.constant(args.f_const)
    nodes = np.linspace(0.0, 1.0, args.nodes)
    u = resolvent_apply(problem, lam, f, tol, nodes=nodes)
    text = jio.sampled_to_json(u) if args.format == "json-doc" else jio.sampled_to_csv(u)
    _emit(args, text)
    return EXIT_OK


def cmd_gap(args):
    problem = _require_valid_cli(args)
    a0 = _single_atom(problem.nu0)
    a1 = _single_atom(problem.nu1)
    closed = (problem.constant_coefficients and a0 is not None and a0 == a1
              and abs(a0[0] - 0.5) <= 1e-12 and abs(a0[1] - 1.0) <= 1e-12)
    if closed:
        gap = midpoint_drift_gap(MidpointDriftSpec(problem.b0.value, problem.b1.value))
        method = "closed-form"
    else:
        if args.region is None:
            raise ProblemFormatError("gap needs --region unless the problem matches "
                                     "the constant-coefficient midpoint-return family")
        gap = spectral_gap(problem, ContourRegion(*args.region), _tol_from(args))
        method = "search"
    if args.format == "json-doc":
        import json
        text = json.dumps({"gap": gap, "method": method}, indent=2) + "\n"
    else:
        text = f"gap,method\n{gap:.16e},{method}\n"
    _emit(args, text)
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "eigs": cmd_eigs,
    "mult": cmd_mult,
    "grid": cmd_grid,
    "resolve": cmd_resolve,
    "gap": cmd_gap,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ProblemFormatError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except InvalidProblemError:
        return EXIT_VALIDATION
    except NotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_FOUND
    except JumpspecError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
