"""Euclidean primitives: halfspace projection, reflection, circumcenters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, DimensionMismatch

# relative threshold below which two points are treated as the same point
DUPLICATE_RTOL = 1e-14
# pivot threshold of the 2x2 Gram elimination, relative to max |G_ij|
PIVOT_RTOL = 1e-13


def _as_point(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 1-d vector, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class Halfspace:
    """The closed halfspace ``{y : normal @ y <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = _as_point(self.normal, "normal")
        norm2 = float(a @ a)
        if not norm2 > 0.0:
            raise ValueError("halfspace normal must be nonzero")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.size

    def contains(self, x, atol=0.0) -> bool:
        return bool(self.normal @ _as_point(x) <= self.offset + atol)


def project_halfspace(h: Halfspace, x) -> np.ndarray:
    """Orthogonal projection of `x` onto `h`.

    Points already in the halfspace are returned unchanged; otherwise the
    result is ``x - (a @ x - alpha) / |a|^2 * a``.
    """
    x = _as_point(x)
    a = h.normal
    if x.size != a.size:
        raise DimensionMismatch(f"point has dimension {x.size}, halfspace {a.size}")
    excess = float(a @ x) - h.offset
    if excess <= 0.0:
        return x.copy()
    return x - (excess / float(a @ a)) * a


def reflect(h: Halfspace, x) -> np.ndarray:
    """Reflection ``2 P_h(x) - x``."""
    x = _as_point(x)
    return 2.0 * project_halfspace(h, x) - x


def _same(p, q, scale):
    return float(np.linalg.norm(p - q)) <= DUPLICATE_RTOL * scale


def circumcenter3(x, y, z, tol=1e-8) -> np.ndarray:
    """Circumcenter of three points inside the affine hull they span.

    Coincident points are merged first, so three equal points give `x` and
    two distinct points give their midpoint. For three distinct points the
    coefficients of ``c = x + s (y - x) + t (z - x)`` solve the 2x2 Gram
    system of the two equidistance conditions.

    Raises
    ------
    DegenerateConfiguration
        If the points are distinct and (numerically) collinear, or if the
        computed center misses equidistance by more than
        ``tol * (1 + max pairwise distance)``.
    """
    x = _as_point(x, "x")
    y = _as_point(y, "y")
    z = _as_point(z, "z")
    if not (x.size == y.size == z.size):
        raise DimensionMismatch(f"dimensions {x.size}, {y.size}, {z.size} differ")

    scale = 1.0 + float(np.linalg.norm(x))
    xy, xz, yz = _same(x, y, scale), _same(x, z, scale), _same(y, z, scale)
    if xy and xz:
        return x.copy()
    if xy or xz:
        other = z if xy else y
        return 0.5 * (x + other)
    if yz:
        return 0.5 * (x + y)

    u = y - x
    v = z - x
    g00 = float(u @ u)
    g01 = float(u @ v)
    g11 = float(v @ v)
    r0 = 0.5 * g00
    r1 = 0.5 * g11
    thresh = PIVOT_RTOL * max(g00, abs(g01), g11)

    # partial pivoting on the first column
    if g00 >= abs(g01):
        p, q, rp, rq = (g00, g01), (g01, g11), r0, r1
    else:
        p, q, rp, rq = (g01, g11), (g00, g01), r1, r0
    if abs(p[0]) <= thresh:
        raise DegenerateConfiguration("Gram system is singular")
    factor = q[0] / p[0]
    piv2 = q[1] - factor * p[1]
    if abs(piv2) <= thresh:
        raise DegenerateConfiguration("Gram system is singular: points are collinear")
    t = (rq - factor * rp) / piv2
    s = (rp - p[1] * t) / p[0]
    c = x + s * u + t * v

    dx = np.linalg.norm(c - x)
    dy = np.linalg.norm(c - y)
    dz = np.linalg.norm(c - z)
    spread = max(dx, dy, dz) - min(dx, dy, dz)
    diam = max(np.linalg.norm(u), np.linalg.norm(v), np.linalg.norm(z - y))
    if spread > tol * (1.0 + diam):
        raise DegenerateConfiguration(
            f"circumcenter misses equidistance by {spread:.3e}; configuration is ill-conditioned"
        )
    return c
