"""Radial geometry of hyperbolic 3-space and its Euclidean counterpart.

Radial functions on H^3 (curvature -1) are functions of the geodesic
distance r to a base point.  The volume element is 4*pi*sinh(r)^2 dr, so
every radial integral reduces to a half-line integral against the weight
sinh(r)^2.  The flat model R^3 uses r^2 instead.  This module collects the
grid bookkeeping, the metric weights, the geodesic distance between two
points given the angle between them, and the admissible exponent pairs used
by the dispersive estimates.

Everything works on a uniform grid on [0, R] with the endpoints excluded:
radial fields we care about vanish at r=0 (after multiplication by the
reduction weight) and are negligible at r=R, which is exactly the Dirichlet
setting of the discrete sine transform used in `transforms`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Below this radius the quotients sinh(r)/r and r*coth(r) are evaluated by
# their even Taylor expansions to avoid 0/0 and loss of significance.
_SMALL_RADIUS = 1.0e-4


class Geometry(enum.Enum):
    """The two radial geometries supported by the package."""

    HYPERBOLIC3 = "hyperbolic3"
    EUCLIDEAN3 = "euclidean3"

    @classmethod
    def from_name(cls, name):
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown geometry {name!r}; expected 'hyperbolic3' or 'euclidean3'"
            ) from None


def sinhc(r):
    """sinh(r)/r, stable at the origin (degree-6 Taylor below r=1e-4)."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = np.abs(r) < _SMALL_RADIUS
    rs = r[small]
    r2 = rs * rs
    out[small] = 1.0 + r2 / 6.0 + r2 * r2 / 120.0 + r2 * r2 * r2 / 5040.0
    rl = r[~small]
    out[~small] = np.sinh(rl) / rl
    return out if out.ndim else float(out)


def r_coth_r(r):
    """r*coth(r), stable at the origin (even Taylor below r=1e-4)."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = np.abs(r) < _SMALL_RADIUS
    rs = r[small]
    r2 = rs * rs
    out[small] = 1.0 + r2 / 3.0 - r2 * r2 / 45.0 + 2.0 * r2 * r2 * r2 / 945.0
    rl = r[~small]
    out[~small] = rl / np.tanh(rl)
    return out if out.ndim else float(out)


def volume_weight(geometry, r):
    """Radial density of the volume element (without the angular 4*pi).

    Args:
        geometry: a `Geometry` member.
        r: radius, scalar or array.

    Returns:
        sinh(r)^2 for hyperbolic space, r^2 for Euclidean space.
    """
    r = np.asarray(r, dtype=float)
    if geometry is Geometry.HYPERBOLIC3:
        with np.errstate(over="ignore"):
            w = np.sinh(r) ** 2
    elif geometry is Geometry.EUCLIDEAN3:
        w = r * r
    else:
        raise ValueError(f"unsupported geometry {geometry!r}")
    return w if w.ndim else float(w)


def reduction_weight(geometry, r):
    """Weight m(r) with m(r)^2 = volume_weight: sinh(r) or r.

    Multiplying a radial field by m(r) turns the three-dimensional radial
    Laplacian into a one-dimensional operator with Dirichlet boundary at the
    origin; all transforms work on v = m*u.

    On hyperbolic space the weight overflows double precision beyond
    r ~ 710 and the result is +inf there; overflow warnings are suppressed
    because several callers combine m with decaying factors and handle the
    inf limit explicitly (see `log_reduction_weight` for the stable form).
    """
    r = np.asarray(r, dtype=float)
    if geometry is Geometry.HYPERBOLIC3:
        with np.errstate(over="ignore"):
            w = np.sinh(r)
    elif geometry is Geometry.EUCLIDEAN3:
        w = r.copy() if r.ndim else float(r)
    else:
        raise ValueError(f"unsupported geometry {geometry!r}")
    return w if np.ndim(w) else float(w)


def log_reduction_weight(geometry, r):
    """log m(r), finite for every r > 0 no matter how large.

    log sinh(r) = r - log 2 + log1p(-e^{-2r}) avoids the overflow of
    sinh itself, so quantities like |u|^q m(r)^2 = |v|^q m^{2-q} can be
    assembled on boxes far beyond the r ~ 710 horizon where sinh(r)
    stops being representable.
    """
    r = np.asarray(r, dtype=float)
    if geometry is Geometry.HYPERBOLIC3:
        with np.errstate(divide="ignore"):
            w = r - math.log(2.0) + np.log1p(-np.exp(-2.0 * r))
    elif geometry is Geometry.EUCLIDEAN3:
        with np.errstate(divide="ignore"):
            w = np.log(r)
    else:
        raise ValueError(f"unsupported geometry {geometry!r}")
    return w if np.ndim(w) else float(w)


def strichartz_weight(n, r):
    """Dispersive comparison weight w_n(r) on hyperbolic n-space, n in {2, 3}.

    w_3(r) = sinh(r)/r and w_2(r) = (sinh(r)/(r*(1+r)))**(1/2).  Both tend
    to 1 at the origin and grow like e^{c r} at infinity; they measure the
    extra decay of the hyperbolic free propagator over the Euclidean one.
    """
    r = np.asarray(r, dtype=float)
    if n == 3:
        w = sinhc(r)
    elif n == 2:
        w = np.sqrt(np.asarray(sinhc(r)) / (1.0 + r))
    else:
        raise ValueError("strichartz_weight is defined for n in {2, 3}")
    return w if np.ndim(w) else float(w)


def hyperbolic_distance(r, r2, x):
    """Geodesic distance between points at radii r, r2 with angle cosine x.

    Uses cosh(a) = cosh(r)cosh(r2) - x sinh(r)sinh(r2).  The argument of
    arccosh is clamped up to 1 when it undershoots by a rounding error; an
    undershoot beyond 1e-12 is a genuine domain error and raises.

    Args:
        r, r2: radii (scalars or broadcastable arrays), >= 0.
        x: cosine of the angle between the two directions, in [-1, 1].

    Returns:
        The geodesic distance a(r, r2, x) >= 0.
    """
    r = np.asarray(r, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("angle cosine out of [-1, 1]")
    c = np.cosh(r) * np.cosh(r2) - np.clip(x, -1.0, 1.0) * np.sinh(r) * np.sinh(r2)
    if np.any(c < 1.0 - 1e-12):
        raise ValueError("cosh of a distance evaluated below 1")
    a = np.arccosh(np.maximum(c, 1.0))
    return a if a.ndim else float(a)


def distance_derivative(r, r2, x):
    """Partial derivative of hyperbolic_distance with respect to r.

    d a / d r = (sinh(r)cosh(r2) - x cosh(r)sinh(r2)) / sinh(a).  At a = 0
    (coincident points) the derivative is not defined; callers keep their
    quadrature nodes away from the diagonal.
    """
    r = np.asarray(r, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    x = np.asarray(x, dtype=float)
    a = np.asarray(hyperbolic_distance(r, r2, x))
    num = np.sinh(r) * np.cosh(r2) - np.clip(x, -1.0, 1.0) * np.cosh(r) * np.sinh(r2)
    out = num / np.sinh(np.where(a == 0.0, 1.0, a))
    out = np.where(a == 0.0, np.nan, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid on [0, R] with N intervals, endpoints excluded.

    The interior nodes are r_j = j*h for j = 1..N-1 with h = R/N, and the
    dual frequencies are lambda_k = k*pi/R for k = 1..N-1.  These are
    exactly the nodes and modes of the orthonormal type-I discrete sine
    transform, so transform round trips are unitary to machine precision.
    """

    R: float
    N: int

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError("grid radius R must be positive and finite")
        if self.N < 4:
            raise ValueError("grid needs at least 4 intervals")

    @property
    def h(self):
        return self.R / self.N

    @cached_property
    def nodes(self):
        return self.h * np.arange(1, self.N)

    @cached_property
    def frequencies(self):
        return (np.pi / self.R) * np.arange(1, self.N)

    @property
    def size(self):
        """Number of interior nodes (= number of retained modes)."""
        return self.N - 1


def delta_exponent(q, d=3):
    """Scaling exponent delta(q) = d*(1/2 - 1/q) of the dispersive estimates."""
    if q < 2:
        raise ValueError("q must be >= 2")
    return d * (0.5 - 1.0 / q)


@dataclass(frozen=True)
class AdmissiblePair:
    """Schrodinger-admissible exponent pair (p, q) in dimension d.

    Requires 2/p + d/q = d/2 with p, q >= 2 and (p, q, d) != (2, inf, 2);
    in d = 3 the endpoint q = 6 corresponds to p = 2.
    """

    d: int
    p: float
    q: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be >= 2")
        if self.p < 2 or self.q < 2:
            raise ValueError("admissible exponents require p, q >= 2")
        if math.isinf(self.q):
            lhs = 2.0 / self.p
        else:
            lhs = 2.0 / self.p + self.d / self.q
        if abs(lhs - self.d / 2.0) > 1e-12:
            raise ValueError("not an admissible pair: 2/p + d/q != d/2")
        if self.d == 2 and self.p == 2:
            raise ValueError("the endpoint (2, inf) is forbidden in dimension 2")

    @classmethod
    def from_q(cls, d, q):
        """Admissible pair with the given spatial exponent q."""
        if math.isinf(q):
            p = 4.0 / d
        else:
            denom = d / 2.0 - d / q
            if denom <= 0:
                raise ValueError(f"no admissible p for q={q} in dimension {d}")
            p = 2.0 / denom
        return cls(d=d, p=p, q=q)

    @property
    def delta(self):
        return delta_exponent(self.q, self.d)
