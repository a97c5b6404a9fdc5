"""File formats: problem description JSON, spectrum/grid/function CSV and JSON.

Numbers in CSV output carry 17 significant digits so values round-trip
through double precision; identical inputs produce byte-identical output.
"""

import json

import numpy as np

from .errors import ProblemFormatError
from .problem import BoundaryMeasure, Coefficient, Problem, Violation
from .region import ContourRegion
from .resolvent import SampledFunction

PROBLEM_VERSION = 1


def _fmt(x):
    return f"{x:.16e}"


# ---------------------------------------------------------------------------
# problem description documents

def _coeff_from_dict(doc, name, unknown):
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{name}: expected an object")
    kind = doc.get("type")
    if kind == "constant":
        known = {"type", "value"}
        if "value" not in doc or not isinstance(doc["value"], (int, float)):
            raise ProblemFormatError(f"{name}: constant coefficient needs a numeric 'value'")
        coeff = Coefficient.constant(doc["value"])
    elif kind == "piecewise":
        known = {"type", "breakpoints", "polys"}
        bp = doc.get("breakpoints")
        polys = doc.get("polys")
        if (not isinstance(bp, list) or not all(isinstance(b, (int, float)) for b in bp)
                or not isinstance(polys, list)
                or not all(isinstance(p, list) and all(isinstance(c, (int, float)) for c in p)
                           for p in polys)):
            raise ProblemFormatError(f"{name}: piecewise coefficient needs numeric "
                                     "'breakpoints' and 'polys' lists")
        coeff = Coefficient.piecewise(bp, polys)
    else:
        raise ProblemFormatError(f"{name}: unknown coefficient type {kind!r}")
    for key in doc:
        if key not in known:
            unknown.append(Violation(name, "unknown-key", f"unknown key {key!r}"))
    return coeff


def _measure_from_dict(doc, name, unknown):
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{name}: expected an object")
    known = {"atoms", "density"}
    for key in doc:
        if key not in known:
            unknown.append(Violation(name, "unknown-key", f"unknown key {key!r}"))
    atoms = []
    for i, a in enumerate(doc.get("atoms", [])):
        if (not isinstance(a, dict) or not isinstance(a.get("x"), (int, float))
                or not isinstance(a.get("w"), (int, float))):
            raise ProblemFormatError(f"{name}: atom {i} needs numeric 'x' and 'w'")
        for key in a:
            if key not in {"x", "w"}:
                unknown.append(Violation(name, "unknown-key", f"atom {i}: unknown key {key!r}"))
        atoms.append((a["x"], a["w"]))
    density = doc.get("density")
    bp, vals = (), ()
    if density is not None:
        if not isinstance(density, dict):
            raise ProblemFormatError(f"{name}: 'density' must be an object")
        for key in density:
            if key not in {"breakpoints", "values"}:
                unknown.append(Violation(name, "unknown-key", f"density: unknown key {key!r}"))
        bp = density.get("breakpoints")
        vals = density.get("values")
        if (not isinstance(bp, list) or not isinstance(vals, list)
                or not all(isinstance(v, (int, float)) for v in bp + vals)):
            raise ProblemFormatError(f"{name}: density needs numeric 'breakpoints' and 'values'")
    return BoundaryMeasure.mixture(atoms, bp or (), vals or ())


def problem_from_dict(doc):
    """Build a Problem from a parsed document.

    Returns (problem, violations) where violations records unknown keys;
    structural damage raises ProblemFormatError instead.
    """
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem document must be an object")
    version = doc.get("version")
    if version != PROBLEM_VERSION:
        raise ProblemFormatError(f"unsupported or missing version {version!r} "
                                 f"(expected {PROBLEM_VERSION})")
    for key in ("b0", "b1", "nu0", "nu1"):
        if key not in doc:
            raise ProblemFormatError(f"missing required key {key!r}")
    unknown = []
    for key in doc:
        if key not in {"version", "b0", "b1", "nu0", "nu1"}:
            unknown.append(Violation("problem", "unknown-key", f"unknown key {key!r}"))
    problem = Problem(
        b0=_coeff_from_dict(doc["b0"], "b0", unknown),
        b1=_coeff_from_dict(doc["b1"], "b1", unknown),
        nu0=_measure_from_dict(doc["nu0"], "nu0", unknown),
        nu1=_measure_from_dict(doc["nu1"], "nu1", unknown),
    )
    return problem, unknown


def _coeff_to_dict(c):
    if c.is_constant:
        return {"type": "constant", "value": c.value}
    return {"type": "piecewise", "breakpoints": list(c.breakpoints),
            "polys": [list(p) for p in c.polys]}


def _measure_to_dict(m):
    doc = {"atoms": [{"x": x, "w": w} for x, w in m.atoms]}
    if m.has_density:
        doc["density"] = {"breakpoints": list(m.density_breakpoints),
                          "values": list(m.density_values)}
    return doc


def problem_to_dict(problem):
    return {
        "version": PROBLEM_VERSION,
        "b0": _coeff_to_dict(problem.b0),
        "b1": _coeff_to_dict(problem.b1),
        "nu0": _measure_to_dict(problem.nu0),
        "nu1": _measure_to_dict(problem.nu1),
    }


def load_problem(path):
    """Read a problem file; returns (problem, unknown-key violations)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemFormatError(f"cannot parse {path}: {exc}") from exc
    return problem_from_dict(doc)


def save_problem(problem, path):
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# result documents

def region_to_dict(region):
    return {"re_min": region.re_min, "re_max": region.re_max,
            "im_min": region.im_min, "im_max": region.im_max}


def region_from_dict(doc):
    return ContourRegion(doc["re_min"], doc["re_max"], doc["im_min"], doc["im_max"])


def _eig_dict(e):
    return {"re": e.location.real, "im": e.location.imag,
            "multiplicity": e.multiplicity, "residual": e.residual}


def spectrum_to_json(result):
    doc = {
        "region": region_to_dict(result.region),
        "eigenvalues": [_eig_dict(e) for e in result.eigenvalues],
        "total_count": result.total_count,
        "diagnostics": result.diagnostics,
    }
    return json.dumps(doc, indent=2) + "\n"


def spectrum_to_csv(result):
    lines = ["re,im,multiplicity,residual"]
    for e in result.eigenvalues:
        lines.append(f"{_fmt(e.location.real)},{_fmt(e.location.imag)},"
                     f"{e.multiplicity},{_fmt(e.residual)}")
    return "\n".join(lines) + "\n"


def eigenvalue_to_json(e):
    return json.dumps(_eig_dict(e), indent=2) + "\n"


def eigenvalue_to_csv(e):
    return ("re,im,multiplicity,residual\n"
            f"{_fmt(e.location.real)},{_fmt(e.location.imag)},"
            f"{e.multiplicity},{_fmt(e.residual)}\n")


def grid_to_csv(grid):
    lines = ["re_lambda,im_lambda,re_delta,im_delta"]
    res = np.linspace(grid.rectangle.re_min, grid.rectangle.re_max, grid.nx)
    ims = np.linspace(grid.rectangle.im_min, grid.rectangle.im_max, grid.ny)
    for i in range(grid.nx):
        for j in range(grid.ny):
            v = grid.values[i, j]
            lines.append(f"{_fmt(res[i])},{_fmt(ims[j])},{_fmt(v.real)},{_fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def grid_to_json(grid):
    doc = {
        "region": region_to_dict(grid.rectangle),
        "nx": grid.nx,
        "ny": grid.ny,
        "re_delta": grid.values.real.tolist(),
        "im_delta": grid.values.imag.tolist(),
    }
    return json.dumps(doc, indent=2) + "\n"


def sampled_to_csv(sf):
    lines = ["x,re_f,im_f"]
    for x, v in zip(sf.nodes, sf.values):
        lines.append(f"{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def sampled_to_json(sf):
    doc = {"x": sf.nodes.tolist(), "re_f": sf.values.real.tolist(),
           "im_f": sf.values.imag.tolist()}
    return json.dumps(doc, indent=2) + "\n"


def sampled_from_csv(path):
    xs, vs = [], []
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "x,re_f,im_f":
                raise ProblemFormatError(f"{path}: expected header 'x,re_f,im_f'")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 3:
                    raise ProblemFormatError(f"{path}: malformed row {line!r}")
                xs.append(float(parts[0]))
                vs.append(complex(float(parts[1]), float(parts[2])))
    except OSError as exc:
        raise ProblemFormatError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc
    return SampledFunction(np.array(xs), np.array(vs))
