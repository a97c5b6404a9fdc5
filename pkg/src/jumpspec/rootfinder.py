"""Zero location and multiplicity counting for the characteristic determinant.

Counting uses the argument principle: the contour integral of Delta'/Delta
around a rectangle, divided by 2*pi*i, is the number of zeros inside counted
with multiplicity, and that multiplicity equals the algebraic multiplicity of
the eigenvalue.  Rectangles are subdivided quadtree-style until each box
isolates one zero cluster; Newton iteration on Delta/Delta' (quadratic at
multiple zeros) refines the location, a small-circle winding count fixes the
multiplicity, and a final Newton pass on the (m-1)-th derivative recovers full
accuracy at multiple zeros.
"""

import heapq
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .characteristic import char_matrix
from .errors import (
    ContourThroughZeroError,
    MultiplicityInconsistencyError,
    NotFoundError,
    RefinementError,
    SubdivisionDepthError,
    WindingAccuracyError,
)
from .problem import require_valid
from .quad import kronrod_line
from .region import ContourRegion
from .settings import DEFAULT_TOL

__all__ = [
    "ContourRegion",
    "Eigenvalue",
    "SpectrumResult",
    "CountResult",
    "count_zeros",
    "count_zeros_detailed",
    "localize",
    "refine",
    "find_spectrum",
    "spectral_gap",
    "split_region_clear",
]

_GOLDEN = 0.6180339887498949
_MAX_SEGMENTS = 4096
_NOISE_SAFETY = 100.0


@dataclass(frozen=True)
class Eigenvalue:
    """A located zero of Delta: position, multiplicity and diagnostics."""

    location: complex
    multiplicity: int
    residual: float
    separation: float | None = None
    iterations: int = 0
    flags: tuple = ()


@dataclass(frozen=True)
class SpectrumResult:
    region: ContourRegion
    eigenvalues: tuple
    total_count: int
    diagnostics: dict


@dataclass(frozen=True)
class CountResult:
    count: int
    residual: float
    region: ContourRegion
    clearance_attempts: int
    segments: int


class _Evaluator:
    """Caching Delta evaluator: one basis solve yields (d, d', d'', floor).

    Counting (winding integrals, clearance sampling) only needs a few digits,
    so on non-constant problems it runs at a relaxed ODE tolerance; Newton
    refinement and residuals always use the requested one.
    """

    _FAST_RTOL = 1e-7
    _FAST_ATOL = 1e-9

    def __init__(self, problem, tol):
        self.problem = problem
        self.tol = tol
        closed = problem.constant_coefficients and not tol.force_integration
        self._rtol = 0.0 if closed else tol.rtol
        self._cache = {}
        if closed or tol.rtol >= self._FAST_RTOL:
            self.fast_tol = tol
            self._fast_rtol = self._rtol
            self._fcache = self._cache
        else:
            self.fast_tol = tol.with_(rtol=max(tol.rtol, self._FAST_RTOL),
                                      atol=max(tol.atol, self._FAST_ATOL))
            self._fast_rtol = self.fast_tol.rtol
            self._fcache = {}

    def _eval(self, lam, tol, rtol, cache):
        lam = complex(lam)
        hit = cache.get(lam)
        if hit is not None:
            return hit
        cm = char_matrix(self.problem, lam, tol)
        out = (cm.delta, cm.delta_prime, cm.delta_second, cm.noise_floor(rtol))
        if len(cache) > 200_000:
            cache.clear()
        cache[lam] = out
        return out

    def full(self, lam):
        return self._eval(lam, self.tol, self._rtol, self._cache)

    def fast(self, lam):
        return self._eval(lam, self.fast_tol, self._fast_rtol, self._fcache)

    def delta(self, lam):
        return self.full(lam)[0]

    def fast_delta(self, lam):
        return self.fast(lam)[0]

    def logderiv(self, lam):
        d, dp, _, _ = self.fast(lam)
        if d == 0.0:
            raise ContourThroughZeroError(f"Delta vanishes exactly on the contour at {lam}")
        return dp / d


class _FunctionEvaluator:
    """Evaluator over plain callables; used to unit-test the machinery."""

    def __init__(self, f, fp, fpp):
        self.f, self.fp, self.fpp = f, fp, fpp

    def full(self, lam):
        d = self.f(lam)
        return d, self.fp(lam), self.fpp(lam), np.finfo(float).eps * (1.0 + abs(d))

    def delta(self, lam):
        return self.f(lam)

    fast = full
    fast_delta = delta

    def logderiv(self, lam):
        return self.fp(lam) / self.f(lam)


def _frac(x):
    return x - math.floor(x)


def _sample_segment(ev, z0, z1, n):
    ts = np.linspace(0.0, 1.0, n)
    return np.array([abs(ev.fast_delta(z0 + t * (z1 - z0))) for t in ts])


def _edge_clearance_ok(ev, region, tol):
    mags = np.concatenate([_sample_segment(ev, z0, z1, tol.clearance_samples)
                           for z0, z1 in region.edges()])
    med = float(np.median(mags))
    return med > 0.0 and float(mags.min()) >= tol.clearance_ratio * med


def _resolve_region(ev, region, tol):
    """Return a clearance-safe region, dilating outward with jittered
    anisotropy when the boundary runs too close to a zero."""
    if _edge_clearance_ok(ev, region, tol):
        return region, 0
    for j in range(1, tol.max_clearance_attempts + 1):
        g = 2.0 ** (j - 1 - tol.max_clearance_attempts)
        cand = region.dilated(1.0 + g * (0.7 + 0.6 * _frac(j * _GOLDEN)),
                              1.0 + g * (0.7 + 0.6 * _frac(j * _GOLDEN * _GOLDEN)))
        if _edge_clearance_ok(ev, cand, tol):
            return cand, j
    raise ContourThroughZeroError(
        f"no clear contour after {tol.max_clearance_attempts} dilation attempts around {region}")


def _winding_rectangle(ev, region, tol):
    """Adaptive GK 7-15 integral of Delta'/Delta over the boundary.

    Returns (count, integer residual, number of segments).  Splits the
    segment with the largest error estimate until the absolute target on the
    winding number is met.
    """
    target = tol.winding_target * 2.0 * math.pi
    heap = []
    serial = 0
    total = 0.0 + 0.0j
    total_err = 0.0
    for z0, z1 in region.edges():
        val, err = kronrod_line(ev.logderiv, z0, z1)
        heapq.heappush(heap, (-err, serial, z0, z1, val))
        serial += 1
        total += val
        total_err += err
    while total_err > target and len(heap) < _MAX_SEGMENTS:
        neg_err, _, z0, z1, val = heapq.heappop(heap)
        total -= val
        total_err += neg_err  # neg_err is negative
        zm = 0.5 * (z0 + z1)
        for a, b in ((z0, zm), (zm, z1)):
            v, e = kronrod_line(ev.logderiv, a, b)
            heapq.heappush(heap, (-e, serial, a, b, v))
            serial += 1
            total += v
            total_err += e
    if total_err > target:
        raise WindingAccuracyError(None, total_err / (2 * math.pi),
                                   "contour quadrature failed to converge")
    w = total / (2.0j * math.pi)
    n = int(round(w.real))
    residual = abs(w - n)
    if residual > tol.integer_residual:
        raise WindingAccuracyError(w, residual)
    if n < 0:
        raise WindingAccuracyError(w, residual, f"negative winding {n} for an entire function")
    return n, residual, len(heap)


def count_zeros(problem, region, tol=None):
    """Number of zeros of Delta inside the rectangle, with multiplicity.

    If the boundary runs too close to a zero the region is dilated first;
    use count_zeros_detailed to see the region actually counted.
    """
    return count_zeros_detailed(problem, region, tol).count


def count_zeros_detailed(problem, region, tol=None):
    tol = tol or DEFAULT_TOL
    require_valid(problem)
    ev = _Evaluator(problem, tol)
    eff, attempts = _resolve_region(ev, region, tol)
    n, residual, segs = _winding_rectangle(ev, eff, tol)
    return CountResult(count=n, residual=residual, region=eff,
                       clearance_attempts=attempts, segments=segs)


def _clear_cut(ev, region, axis, tol, jitter=0):
    """Pick a split coordinate near the middle whose line avoids zeros.

    Candidates are golden-ratio jittered, never the exact midpoint: zeros of
    real-coefficient problems sit on the real axis, and a cut along it would
    run straight through them.
    """
    if axis == "re":
        lo, hi = region.re_min, region.re_max
        seg = lambda c: (complex(c, region.im_min), complex(c, region.im_max))
    else:
        lo, hi = region.im_min, region.im_max
        seg = lambda c: (complex(region.re_min, c), complex(region.re_max, c))
    for j in range(jitter + 1, jitter + 10):
        off = (_frac(j * _GOLDEN) - 0.5) * 0.4
        cut = lo + (hi - lo) * (0.5 + off)
        mags = _sample_segment(ev, *seg(cut), tol.clearance_samples)
        med = float(np.median(mags))
        if med > 0.0 and float(mags.min()) >= tol.clearance_ratio * med:
            return cut
    raise ContourThroughZeroError(f"no clear {axis} split line inside {region}")


def _localize(ev, region, count, tol, isolation, diag, depth=0):
    """Quadtree subdivision until each surviving box caps one zero cluster."""
    out = []
    queue = [(region, count, depth)]
    while queue:
        box, cnt, d = queue.pop()
        if cnt == 0:
            continue
        if box.diameter < isolation:
            out.append((box, cnt))
            continue
        if d >= tol.max_depth:
            raise SubdivisionDepthError(
                f"subdivision depth {d} exceeded at {box} (count {cnt})")
        for attempt in range(3):
            try:
                re_cut = _clear_cut(ev, box, "re", tol, jitter=9 * attempt)
                im_cut = _clear_cut(ev, box, "im", tol, jitter=9 * attempt)
                children = [(child, *_winding_rectangle(ev, child, tol)[:2])
                            for child in box.split(re_cut, im_cut)]
                break
            except ContourThroughZeroError:
                if attempt == 2:
                    raise
        total = 0
        for child, n, residual in children:
            diag.setdefault("winding_residuals", []).append(residual)
            total += n
            if n > 0:
                queue.append((child, n, d + 1))
        if total != cnt:
            raise WindingAccuracyError(
                total, abs(total - cnt),
                f"child counts {total} do not sum to parent count {cnt} in {box}")
    return out


def localize(problem, region, tol=None):
    """Sub-rectangles each containing exactly one distinct zero (with count)."""
    tol = tol or DEFAULT_TOL
    require_valid(problem)
    ev = _Evaluator(problem, tol)
    eff, _ = _resolve_region(ev, region, tol)
    n, _, _ = _winding_rectangle(ev, eff, tol)
    diag = {}
    return _localize(ev, eff, n, tol, tol.isolation_factor * eff.diameter, diag)


class _NeedsSplit(Exception):
    """Internal: a refine box turned out to hold several distinct zeros."""

    def __init__(self, box, count):
        self.box = box
        self.count = count
        super().__init__("box holds a cluster of distinct zeros")


def _circle_winding(ev, center, r):
    """Winding number of Delta along a circle by phase tracking.

    Returns (winding, min |Delta| on the circle, resolved flag); doubling the
    sample count until every phase increment stays below pi/2.
    """
    m = 64
    while m <= 4096:
        pts = center + r * np.exp(2j * np.pi * np.arange(m + 1) / m)
        vals = np.array([ev.fast_delta(z) for z in pts])
        if np.any(vals == 0.0):
            return 0, 0.0, False
        ratios = vals[1:] / vals[:-1]
        incs = np.angle(ratios)
        if np.max(np.abs(incs)) < 0.5 * np.pi:
            total = float(np.sum(incs)) / (2.0 * np.pi)
            return int(round(total)), float(np.min(np.abs(vals))), True
        m *= 2
    return 0, float(np.min(np.abs(vals))), False


def _newton_to_zero(ev, start, box, tol, guard_radius):
    """Newton on u = Delta/Delta' (simple zero of u for any multiplicity)."""
    lam = complex(start)
    last_step = abs(guard_radius)
    for it in range(tol.newton_max_iter):
        d, dp, d2, _ = ev.full(lam)
        if d == 0.0:
            return lam, 0.0, it + 1
        if dp == 0.0:
            lam += 1e-9 * (1.0 + abs(lam)) * (1.0 + 1.0j)
            continue
        u = d / dp
        uprime = 1.0 - d * d2 / (dp * dp)
        step = -u / uprime if abs(uprime) > 0.05 else -u
        lam += step
        last_step = abs(step)
        if not box.dilated(2.0).contains(lam):
            return None, last_step, it + 1
        if last_step < tol.newton_step_tol * (1.0 + abs(lam)):
            return lam, last_step, it + 1
    return lam, last_step, tol.newton_max_iter


def _polish(ev, lam, mult, trust, tol):
    """Final Newton/secant pass on the (m-1)-th derivative of Delta.

    Multiple zeros of Delta are simple zeros of that derivative, which keeps
    full double-precision accuracy where Delta itself is noise-limited.
    """
    pick = min(mult, 3) - 1  # 0 -> Delta, 1 -> Delta', 2 -> Delta''
    g = lambda z: ev.full(z)[pick]
    best = lam
    if mult <= 2:
        gp = lambda z: ev.full(z)[pick + 1]
        for it in range(30):
            gv = g(best)
            gpv = gp(best)
            if gv == 0.0 or gpv == 0.0:
                break
            step = -gv / gpv
            if abs(step) > trust:
                break
            best += step
            if abs(step) < tol.newton_step_tol * (1.0 + abs(best)):
                break
        return best, it + 1
    # secant on Delta'' (no exact third derivative available)
    z0 = best
    z1 = best + 1e-7 * (1.0 + abs(best))
    g0, g1 = g(z0), g(z1)
    for it in range(40):
        if g1 == g0:
            break
        z2 = z1 - g1 * (z1 - z0) / (g1 - g0)
        if abs(z2 - lam) > trust:
            break
        z0, g0, z1, g1 = z1, g1, z2, g(z2)
        if abs(z1 - z0) < tol.newton_step_tol * (1.0 + abs(z1)):
            break
    return z1, it + 1


def _refine_impl(ev, box, count, tol, r_cap=None):
    radius = 0.5 * box.diameter
    starts = [box.center]
    for j in (1, 2, 3):
        starts.append(box.center + radius * 0.5 * complex(
            _frac(j * _GOLDEN) - 0.5, _frac(j * _GOLDEN * _GOLDEN) - 0.5))
    lam = None
    for start in starts:
        lam, last_step, its = _newton_to_zero(ev, start, box, tol, radius)
        if lam is not None:
            break
    if lam is None:
        raise _NeedsSplit(box, count)

    # multiplicity from the winding of Delta around a small circle; the
    # radius grows until |Delta| on the circle clears the noise floor
    flags = []
    cap = r_cap if r_cap is not None else max(box.diameter, 1e-6 * (1.0 + abs(lam)))
    r = max(10.0 * last_step, 1e-8 * (1.0 + abs(lam)))
    r = min(r, cap)
    winding = None
    while True:
        w, min_abs, resolved = _circle_winding(ev, lam, r)
        floor = ev.fast(lam + r)[3]
        if resolved and min_abs > _NOISE_SAFETY * floor:
            winding = w
            break
        if r >= cap:
            if resolved:
                winding = w
                flags.append("winding-noise-limited")
                break
            raise MultiplicityInconsistencyError(lam, None, count)
        r = min(r * 4.0, cap)

    if winding > tol.multiplicity_cap:
        warnings.warn(f"winding {winding} at {lam} exceeds the sanity cap "
                      f"{tol.multiplicity_cap}; possible contour pathology",
                      stacklevel=2)
        flags.append("multiplicity-above-cap")
    if winding < count:
        raise _NeedsSplit(box, count)
    if winding > count:
        raise MultiplicityInconsistencyError(lam, winding, count)

    if winding > 1:
        lam, extra = _polish(ev, lam, winding, r, tol)
        its += extra
    residual = abs(ev.delta(lam))
    return Eigenvalue(location=lam, multiplicity=winding, residual=residual,
                      iterations=its, flags=tuple(flags))


def refine(problem, box, count, tol=None):
    """Refine the single zero cluster in a localize box to an Eigenvalue."""
    tol = tol or DEFAULT_TOL
    require_valid(problem)
    ev = _Evaluator(problem, tol)
    current = [(box, count)]
    for _ in range(8):
        b, c = current[0]
        try:
            return _refine_impl(ev, b, c, tol)
        except _NeedsSplit:
            diag = {}
            pieces = _localize(ev, b, c, tol, b.diameter / 8.0, diag)
            if len(pieces) != 1:
                raise RefinementError(
                    f"box {b} holds {len(pieces)} separate zeros; re-run localize")
            current = pieces
    raise RefinementError(f"refinement did not converge in box {box}")


def _separations(eigs):
    out = []
    for i, e in enumerate(eigs):
        others = [abs(e.location - f.location) for j, f in enumerate(eigs) if j != i]
        out.append(replace(e, separation=min(others) if others else None))
    return out


def find_spectrum(problem, region, tol=None):
    """All eigenvalues (locations and multiplicities) inside a rectangle."""
    tol = tol or DEFAULT_TOL
    require_valid(problem)
    ev = _Evaluator(problem, tol)
    eff, attempts = _resolve_region(ev, region, tol)
    diag = {"clearance_attempts": attempts, "winding_residuals": [], "notes": []}
    if attempts:
        diag["notes"].append(
            f"boundary dilated after {attempts} clearance attempt(s); "
            f"counting over {eff}")
    total, residual, _ = _winding_rectangle(ev, eff, tol)
    diag["winding_residuals"].append(residual)
    if total == 0:
        return SpectrumResult(region=eff, eigenvalues=(), total_count=0, diagnostics=diag)

    isolation = tol.isolation_factor * eff.diameter
    queue = _localize(ev, eff, total, tol, isolation, diag)
    eigs = []
    guard = 0
    while queue:
        box, cnt = queue.pop()
        others = [b.center for b, _ in queue] + [e.location for e in eigs]
        r_cap = None
        if others:
            r_cap = 0.45 * min(abs(box.center - o) for o in others)
            r_cap = max(r_cap, 1e-8 * (1.0 + abs(box.center)))
        try:
            eigs.append(_refine_impl(ev, box, cnt, tol, r_cap=r_cap))
        except _NeedsSplit as e:
            guard += 1
            if guard > 64 or box.diameter < 1e-10 * (1.0 + abs(box.center)):
                raise MultiplicityInconsistencyError(box.center, None, cnt)
            queue.extend(_localize(ev, e.box, e.count, tol, e.box.diameter / 8.0, diag))

    found = sum(e.multiplicity for e in eigs)
    if found != total:
        raise MultiplicityInconsistencyError(eff.center, found, total)
    eigs.sort(key=lambda e: (e.location.real, e.location.imag))
    eigs = _separations(eigs)
    return SpectrumResult(region=eff, eigenvalues=tuple(eigs),
                          total_count=total, diagnostics=diag)


def spectral_gap(problem, search, tol=None):
    """Smallest real part among eigenvalues found in the search region.

    The region must exclude a disk of radius 1e-6 around the trivial
    eigenvalue 0 and is expected to contain the lowest nonzero-real-part
    eigenvalues.
    """
    tol = tol or DEFAULT_TOL
    if search.distance_to(0.0 + 0.0j) < 1e-6:
        raise ValueError("search region must exclude a disk of radius 1e-6 around 0")
    result = find_spectrum(problem, search, tol)
    if not result.eigenvalues:
        raise NotFoundError(
            f"no eigenvalues found in {search}; enlarge the search region")
    return min(e.location.real for e in result.eigenvalues)


def split_region_clear(problem, region, parts=2, tol=None):
    """Partition a rectangle into 2 or 4 children along zero-free lines.

    Children tile the parent exactly, so argument-principle counts add up.
    """
    if parts not in (2, 4):
        raise ValueError("parts must be 2 or 4")
    tol = tol or DEFAULT_TOL
    ev = _Evaluator(problem, tol)
    if parts == 4:
        return region.split(_clear_cut(ev, region, "re", tol),
                            _clear_cut(ev, region, "im", tol))
    axis = "re" if region.width >= region.height else "im"
    cut = _clear_cut(ev, region, axis, tol)
    return region.split(re_cut=cut) if axis == "re" else region.split(im_cut=cut)
