"""Twistor lifts: surfaces whose conformal structure comes from a
complex curve.

A point of the quaternionic projective line lifts to complex projective
3-space by viewing each fiber H^2 as C^4 through the right-module
splitting x = w1 + j w2.  A conformal immersion admits a canonical lift
built from any section q of the bundle solving R q = -q i: the line
spanned by (f q, q) depends only on the surface, and the surface is
super-conformal exactly when that lift is a holomorphic curve.  The
concrete section used here is q = 1 + R i, which degenerates only where
R = i (mask, never NaN); the complementary branch (surfaces with N
playing the role of R) is reached through the conjugated chart.

Graphs f = z + j g(z) with g holomorphic are the model case: their
right normal is the constant -i, the section is constant, and the lift
is the holomorphic curve [z : g(z) : 1 : 0].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qarray as qa
from .chart import SurfaceChart, conjugate_chart
from .errors import InputError
from .frames import SurfaceGeometry
from .functionals import stencil_interior_mask, super_conformal_classify

_SECTION_FLOOR = 1e-9          # of the max |q|^2: "R = i here"
_PLANE_RANK_TOL = 1e-8         # sigma_3/sigma_1 for a lift inside a line
_DEFECT_THRESHOLD = 0.05       # verdict cut for the CR residual


def quat_to_c2(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split x = z1 + z2 j into its left complex coefficients.

    The first component collects 1 and i, the second j and k:
    i + 2j + 3k -> (i, 2 + 3i).
    """
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def c2_to_quat(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Inverse of :func:`quat_to_c2`."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    shape = np.broadcast_shapes(z1.shape, z2.shape)
    out = np.empty(shape + (4,))
    out[..., 0], out[..., 1] = np.broadcast_to(z1.real, shape), \
        np.broadcast_to(z1.imag, shape)
    out[..., 2], out[..., 3] = np.broadcast_to(z2.real, shape), \
        np.broadcast_to(z2.imag, shape)
    return out


def right_module_coords(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates (w1, w2) with x = w1 + j w2.

    Right multiplication by a complex number acts complex-linearly on
    (w1, w2), which is what makes the C^4 picture of H^2 projective:
    w1 = z1 and w2 = conj(z2) in terms of the left coefficients.
    """
    z1, z2 = quat_to_c2(q)
    return z1, np.conj(z2)


def from_right_module(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """Inverse of :func:`right_module_coords`."""
    return c2_to_quat(w1, np.conj(w2))


def complex_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hermitian product of two quaternion fields in right-module
    coordinates: conj(w1(a)) w1(b) + conj(w2(a)) w2(b)."""
    a1, a2 = right_module_coords(a)
    b1, b2 = right_module_coords(b)
    return np.conj(a1) * b1 + np.conj(a2) * b2


@dataclass(frozen=True)
class TwistorLift:
    """A lift of the chart to complex projective 3-space."""

    c4: np.ndarray
    section: np.ndarray
    mask: np.ndarray
    branch: str
    metadata: dict = field(default_factory=dict)


def _as_geometry(source: SurfaceChart | SurfaceGeometry) -> SurfaceGeometry:
    if isinstance(source, SurfaceGeometry):
        return source
    return SurfaceGeometry(source, strict=False)


def twistor_section(source: SurfaceChart | SurfaceGeometry
                    ) -> tuple[np.ndarray, np.ndarray]:
    """A unit section q with R q = -q i, phase-aligned along the grid.

    Uses q = 1 + R i, masked where |q| collapses (R = i); the remaining
    complex-phase freedom is fixed greedily, making successive overlaps
    <q_prev, q> real positive along v in each row and between row starts.
    """
    geom = _as_geometry(source)
    r = geom.normal_right
    i_unit = np.zeros(4)
    i_unit[1] = 1.0
    q = qa.qfrom_real(np.ones(r.shape[:2])) + qa.qmul(r, i_unit)
    nsq = qa.qnormsq(q)
    mask = geom.mask & (nsq > _SECTION_FLOOR * max(float(nsq.max()), 1e-300))
    q = np.where(mask[..., None], q / np.sqrt(np.maximum(nsq, 1e-300))[..., None], 0.0)

    def align(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
        ip = complex_inner(prev, cur)
        mag = np.abs(ip)
        phase = np.where(mag > 1e-300, np.conj(ip) / np.maximum(mag, 1e-300), 1.0)
        c = c2_to_quat(phase, np.zeros_like(phase))
        return qa.qmul(cur, c)

    nu = q.shape[0]
    for i in range(1, nu):
        q[i, 0] = align(q[i - 1, 0], q[i, 0])
    for j in range(1, q.shape[1]):
        q[:, j] = align(q[:, j - 1], q[:, j])
    return q, mask


def twistor_lift(source: SurfaceChart | SurfaceGeometry,
                 branch: str = "right") -> TwistorLift:
    """The canonical lift [f q : q] of the chart as a C^4 field.

    ``branch="left"`` lifts the conjugated chart instead, which swaps the
    two normals and so serves surfaces whose left normal is the
    anti-holomorphic one.
    """
    if branch not in ("right", "left"):
        raise InputError(f"unknown branch {branch!r}")
    geom = _as_geometry(source)
    if branch == "left":
        geom = SurfaceGeometry(conjugate_chart(geom.chart), strict=False)
    q, mask = twistor_section(geom)
    fq = qa.qmul(geom.jets["f"], q)
    w1_top, w2_top = right_module_coords(fq)
    w1_bot, w2_bot = right_module_coords(q)
    c4 = np.stack([w1_top, w2_top, w1_bot, w2_bot], axis=-1)
    return TwistorLift(c4=c4, section=q, mask=mask, branch=branch,
                       metadata={"name": geom.chart.name,
                                 "frame_mode": geom.frame_mode})


def lift_plane_rank(lift: TwistorLift) -> dict:
    """Singular-value profile of the lift as a set of C^4 vectors.

    A lift contained in a fixed projective line spans a 2-dimensional
    complex subspace: sigma_3/sigma_1 vanishes (up to roundoff).
    """
    pts = lift.c4[lift.mask]
    if pts.shape[0] < 4:
        raise InputError("too few valid samples for a rank estimate")
    sigma = np.linalg.svd(pts, compute_uv=False)
    ratio = float(sigma[2] / sigma[0]) if sigma[0] > 0 else 0.0
    return {"singular_values": sigma[:4],
            "plane_ratio": ratio,
            "in_projective_line": bool(ratio <= _PLANE_RANK_TOL)}


def _cderiv(fld: np.ndarray, h: float, axis: int, periodic: bool) -> np.ndarray:
    return (qa.deriv(fld.real, h, axis, periodic)
            + 1j * qa.deriv(fld.imag, h, axis, periodic))


def _projective_speed(x: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Norm of the component of x orthogonal to psi, per unit |psi|^2:
    the projective magnitude |x wedge psi| / |psi|^2, pole-free in any
    chart of complex projective space."""
    nx = np.sum(np.abs(x) ** 2, axis=-1)
    npsi = np.sum(np.abs(psi) ** 2, axis=-1)
    ip = np.abs(np.sum(np.conj(x) * psi, axis=-1)) ** 2
    return np.sqrt(np.maximum(nx * npsi - ip, 0.0)) \
        / np.maximum(npsi, 1e-300)


def _cr_defect(geom: SurfaceGeometry, lift: TwistorLift) -> float:
    """Max Cauchy-Riemann residual of the lift, measured projectively.

    The anti-holomorphic derivative is compared against the holomorphic
    one after both are projected modulo the lift direction, which makes
    the residual independent of the section's complex gauge and immune
    to the poles every fixed affine chart of projective space must have.
    """
    ch = geom.chart
    mask = lift.mask & stencil_interior_mask(
        geom, 4 if geom.frame_mode == "fd" else 3)
    mask &= qa.stencil_valid(lift.mask, ch.periodic_u, ch.periodic_v, reach=2)
    if not mask.any():
        return np.inf
    psi = lift.c4
    psi_u = _cderiv(psi, ch.du, 0, ch.periodic_u)
    psi_v = _cderiv(psi, ch.dv, 1, ch.periodic_v)
    resid = _projective_speed(psi_u + 1j * psi_v, psi)
    speed = _projective_speed(psi_u - 1j * psi_v, psi) + resid
    scale = max(float(speed[mask].max()), 1e-300)
    return float(resid[mask].max()) / scale


@dataclass(frozen=True)
class HolomorphicityReport:
    """CR residuals of both lift branches and the resulting verdict."""

    defect_right: float
    defect_left: float
    threshold: float
    metadata: dict = field(default_factory=dict)

    @property
    def defect(self) -> float:
        return min(self.defect_right, self.defect_left)

    @property
    def branch(self) -> str:
        return "right" if self.defect_right <= self.defect_left else "left"

    @property
    def verdict(self) -> bool:
        return self.defect <= self.threshold


def lift_holomorphicity_defect(source: SurfaceChart | SurfaceGeometry,
                               threshold: float = _DEFECT_THRESHOLD
                               ) -> HolomorphicityReport:
    """Classify the chart by the holomorphicity of its twistor lift.

    Both branches are attempted (the lift of the chart and of its
    conjugate); the verdict compares the smaller CR residual against the
    threshold, mirroring the two branches of the quadratic-form
    classification so the two tests can be checked against each other.
    """
    geom = _as_geometry(source)
    lift_r = twistor_lift(geom, branch="right")
    defect_r = _cr_defect(geom, lift_r)
    geo_l = SurfaceGeometry(conjugate_chart(geom.chart), strict=False)
    lift_l = twistor_lift(geo_l, branch="right")
    defect_l = _cr_defect(geo_l, lift_l)
    return HolomorphicityReport(
        defect_right=defect_r, defect_left=defect_l, threshold=threshold,
        metadata={"name": geom.chart.name, "frame_mode": geom.frame_mode})


def classification_agreement(source: SurfaceChart | SurfaceGeometry,
                             threshold: float = _DEFECT_THRESHOLD) -> dict:
    """Cross-check of the two super-conformality tests on one chart.

    The quadratic-form route inspects the trace-free second fundamental
    form; the twistor route inspects the CR residual of the lift.  They
    must agree on every chart.
    """
    geom = _as_geometry(source)
    quad = super_conformal_classify(geom, threshold=threshold)
    lift = lift_holomorphicity_defect(geom, threshold=threshold)
    return {"quadratic_verdict": bool(quad.verdict),
            "lift_verdict": bool(lift.verdict),
            "agree": bool(quad.verdict) == bool(lift.verdict),
            "quadratic_defect": float(min(quad.defect_right, quad.defect_left)),
            "lift_defect": float(lift.defect)}
