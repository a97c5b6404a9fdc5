"""Quadrature helpers: Gauss-Legendre panels and the Gauss-Kronrod 7-15 pair."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gl_nodes(a, b, n=7):
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def panels(points, max_len=np.inf):
    """Split the gaps between sorted points into chunks of length <= max_len.

    Returns an array of panel edges containing every input point.
    """
    pts = np.asarray(points, dtype=float)
    out = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        if b <= a:
            continue
        k = max(1, int(np.ceil((b - a) / max_len)))
        out.extend(np.linspace(a, b, k + 1)[1:])
    return np.array(out)


# Kronrod-15 nodes on [-1, 1] and weights, with the embedded Gauss-7 rule on
# the odd-indexed nodes (Piessens' classical values).
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])


def kronrod_line(f, z0, z1):
    """GK 7-15 estimate of the contour integral of f along the segment z0->z1.

    Returns (integral, error_estimate); f maps complex -> complex.
    """
    dz = z1 - z0
    vals = np.array([f(z0 + 0.5 * (x + 1.0) * dz) for x in _XK])
    k = 0.5 * dz * np.dot(_WK, vals)
    g = 0.5 * dz * np.dot(_WG, vals[1::2])
    return k, abs(k - g)
