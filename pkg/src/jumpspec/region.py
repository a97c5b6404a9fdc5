"""Axis-aligned rectangles in the complex plane."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContourRegion:
    """Complex rectangle [re_min, re_max] x [im_min, im_max]."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("region bounds must satisfy re_min < re_max and im_min < im_max")

    @property
    def width(self):
        return self.re_max - self.re_min

    @property
    def height(self):
        return self.im_max - self.im_min

    @property
    def diameter(self):
        return float(np.hypot(self.width, self.height))

    @property
    def center(self):
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def corners(self):
        """Counterclockwise corners starting at the lower left."""
        return (
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        )

    def edges(self):
        """Counterclockwise boundary segments as (start, end) pairs."""
        c = self.corners()
        return tuple((c[i], c[(i + 1) % 4]) for i in range(4))

    def contains(self, z, margin=0.0):
        return (self.re_min - margin <= z.real <= self.re_max + margin
                and self.im_min - margin <= z.imag <= self.im_max + margin)

    def distance_to(self, z):
        """Euclidean distance from z to the rectangle (0 if inside)."""
        dx = max(self.re_min - z.real, 0.0, z.real - self.re_max)
        dy = max(self.im_min - z.imag, 0.0, z.imag - self.im_max)
        return float(np.hypot(dx, dy))

    def boundary_distance(self, z):
        """Distance from an interior point to the nearest edge."""
        return min(z.real - self.re_min, self.re_max - z.real,
                   z.imag - self.im_min, self.im_max - z.imag)

    def dilated(self, scale_re, scale_im=None):
        """Rectangle grown about its center by the given per-axis factors."""
        if scale_im is None:
            scale_im = scale_re
        c = self.center
        hw = 0.5 * self.width * scale_re
        hh = 0.5 * self.height * scale_im
        return ContourRegion(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh)

    def split(self, re_cut=None, im_cut=None):
        """Children from cutting at the given coordinates (quadtree when both)."""
        res = [self.re_min, self.re_max] if re_cut is None else [self.re_min, re_cut, self.re_max]
        ims = [self.im_min, self.im_max] if im_cut is None else [self.im_min, im_cut, self.im_max]
        out = []
        for a, b in zip(res, res[1:]):
            for c, d in zip(ims, ims[1:]):
                out.append(ContourRegion(a, b, c, d))
        return out
