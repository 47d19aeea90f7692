"""The quaternionic projective line and its round 2-spheres.

Points of HP^1 are right H-lines in H^2; the affine chart used everywhere is
x -> the line through (x, 1)^T, with the missing point "infinity" = the line
through (1, 0)^T.  GL(2, H) acts on lines from the left, giving the Moebius
action x -> (a x + b)(c x + d)^-1 on the chart.

A round (possibly degenerate to a plane) oriented 2-sphere is encoded by a
trace-free S in GL(2, H) with S^2 = -I; its points are the fixed lines of S.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistencyError
from .qmatrix import QMat2, QVec2
from .quaternion import Quaternion, ZERO

_SPHERE_TOL = 1e-9      # tolerance for the Sphere2 structure equations
_INCIDENCE_TOL = 1e-8   # default incidence tolerance factor


@dataclass(frozen=True)
class HPoint:
    """A point of HP^1 in the affine chart: a quaternion or infinity."""

    value: Quaternion | None = None

    @staticmethod
    def finite(q: Quaternion) -> "HPoint":
        return HPoint(q)

    @staticmethod
    def infinity() -> "HPoint":
        return HPoint(None)

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def __repr__(self) -> str:
        return "HPoint(inf)" if self.is_infinity else f"HPoint({self.value})"


INFINITY = HPoint.infinity()


def moebius_apply(g: QMat2, p: HPoint) -> HPoint:
    """Apply x -> (a x + b)(c x + d)^-1; infinity maps to a c^-1.

    The zero locus of (c x + d) maps to infinity.  ``g`` is assumed
    invertible; singular g is caught when the caller inverts it.
    """
    if p.is_infinity:
        if g.a21.norm_sq() == 0.0:
            return INFINITY
        return HPoint(g.a11 * g.a21.inverse())
    x = p.value
    den = g.a21 * x + g.a22
    if den.norm_sq() == 0.0:
        return INFINITY
    return HPoint((g.a11 * x + g.a12) * den.inverse())


@dataclass(frozen=True)
class Sphere2:
    """An oriented round 2-sphere in HP^1, encoded by S with S^2 = -I.

    The sphere is the fixed-point set of the Moebius involution-like action
    of S; orientation is carried by the sign of S.
    """

    matrix: QMat2

    def __post_init__(self) -> None:
        s2 = self.matrix @ self.matrix
        defect = (s2 + QMat2.identity()).max_norm()
        scale = max(self.matrix.max_norm() ** 2, 1.0)
        if defect > _SPHERE_TOL * scale:
            raise InconsistencyError(
                f"sphere matrix violates S^2 = -I by {defect:.3e} "
                f"(tolerance {_SPHERE_TOL:g} * {scale:.3g})")

    def contains(self, p: HPoint, tol: float = _INCIDENCE_TOL) -> bool:
        return sphere_contains(self, p, tol)[0]


def sphere_encode(n: Quaternion, r: Quaternion, h: Quaternion = ZERO,
                  *, tol: float = _SPHERE_TOL) -> Sphere2:
    """Encode normal data (N, R, H) as the sphere matrix [[N, 0], [-H, -R]].

    Requires N^2 = R^2 = -1 and the compatibility R H = H N (within ``tol``),
    which together make S^2 = -I.  With H = 0 the fixed-point set is the
    plane {x : N x + x R = 0} together with infinity (the solution set of
    :func:`quatsurf.qmatrix.solve_sylvester` for the homogeneous system); a
    nonzero H bends the plane into the sphere through the origin with
    mean-curvature datum H there.
    """
    for name, q in (("N", n), ("R", r)):
        if ((q * q) + Quaternion.from_real(1.0)).norm() > tol:
            raise DomainError(f"{name}^2 = -1 violated by "
                              f"{((q * q) + Quaternion.from_real(1.0)).norm():.3e}")
    compat = (r * h - h * n).norm()
    if compat > tol * max(h.norm(), 1.0):
        raise DomainError(f"R H = H N violated by {compat:.3e}")
    return Sphere2(QMat2(n, ZERO, -h, -r))


def sphere_contains(sphere: Sphere2, p: HPoint,
                    tol: float = _INCIDENCE_TOL) -> tuple[bool, float]:
    """Test incidence of a point with a sphere; returns (incident, residual).

    For finite p the residual is |(a p + b) - p (c p + d)| with S =
    [[a, b], [c, d]] — zero exactly when S fixes the line (p, 1)^T — and the
    point is incident when the residual is at most tol * (1 + |p|^2) * |S|.
    Infinity is incident when the lower-left entry vanishes at the same
    relative tolerance.
    """
    s = sphere.matrix
    scale = max(s.max_norm(), 1.0)
    if p.is_infinity:
        residual = s.a21.norm()
        return residual <= tol * scale, residual
    x = p.value
    residual = ((s.a11 * x + s.a12) - x * (s.a21 * x + s.a22)).norm()
    bound = tol * (1.0 + x.norm_sq()) * scale
    return residual <= bound, residual


def induced_metric(p: HPoint, v: Quaternion, w: Quaternion,
                   model: str = "fubini-study") -> float:
    """Evaluate a model metric on tangent vectors v, w at a finite point.

    ``fubini-study``: the round metric of S^4 in the affine chart,
    <v, w> / (1 + |p|^2)^2.  ``hyperbolic``: the metric of the open chart
    half-space {Re p != 0} modeling hyperbolic 4-space, <v, w> / (2 Re p)^2;
    points on the boundary Re p = 0 raise
    :class:`~quatsurf.errors.DomainError`.
    """
    if p.is_infinity:
        raise DomainError("the affine-chart metric needs a finite point")
    x = p.value
    if model == "fubini-study":
        return v.dot(w) / (1.0 + x.norm_sq()) ** 2
    if model == "hyperbolic":
        if x.real == 0.0 or abs(x.real) < 1e-300:
            raise DomainError(
                "hyperbolic metric is undefined on the boundary Re p = 0")
        return v.dot(w) / (2.0 * x.real) ** 2
    raise DomainError(f"unknown metric model {model!r}")


def qmat_from_array(m: np.ndarray) -> QMat2:
    """Build a QMat2 from an array of shape (2, 2, 4)."""
    return QMat2(Quaternion.from_array(m[0, 0]), Quaternion.from_array(m[0, 1]),
                 Quaternion.from_array(m[1, 0]), Quaternion.from_array(m[1, 1]))


def qmat_to_array(m: QMat2) -> np.ndarray:
    out = np.empty((2, 2, 4))
    out[0, 0] = m.a11.to_array()
    out[0, 1] = m.a12.to_array()
    out[1, 0] = m.a21.to_array()
    out[1, 1] = m.a22.to_array()
    return out
