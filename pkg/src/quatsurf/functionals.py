"""Integrated functionals and classifiers of a conformal chart.

Everything here consumes a :class:`~quatsurf.frames.SurfaceGeometry` (or
builds one from a chart) and reduces grid fields to scalars:

* the Willmore functional W = (1/pi) * sum of the density |dR + R *dR|^2/16,
  the harmonic-map energy of the sphere congruence, and the degree-like
  integrals that combine into it,
* the Euler-Lagrange residual field dw (the surface is Willmore exactly
  when the one-form w is closed), with its wedge-identity cross-checks and
  a spot-check of the harmonicity chain against the sphere-derivative
  route,
* super-conformality defects (does *dR = R dR or *dN = N dN hold?),
* the planar-elastica residual for curve data, and
* a Moebius-invariance harness that transports a chart by a fractional
  linear map (chain-ruling its jets) and compares Willmore densities
  pointwise.

Quadrature is the midpoint (cell) rule on the uniform grid, O(h^2) like the
FD stencils; open charts yield raw patch integrals, flagged as such in the
report metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qarray as qa
from .chart import SurfaceChart, JET_KEYS
from .errors import DomainError, InputError
from .frames import SurfaceGeometry, _lower_conj
from .qmatrix import QMat2, m2_inverse
from .moebius import qmat_to_array

_DENSITY_FLOOR_REL = 1e-10   # relative floor for density comparisons
_DEFECT_SCALE_REL = 1e-6     # floor factor for super-conformality ratios


def _as_geometry(source: SurfaceChart | SurfaceGeometry,
                 frame_mode: str = "auto") -> SurfaceGeometry:
    if isinstance(source, SurfaceGeometry):
        return source
    return SurfaceGeometry(source, frame_mode=frame_mode)


def stencil_interior_mask(geom: SurfaceGeometry, margin: int) -> np.ndarray:
    """Samples whose composed FD stencils are uniform.

    Differentiating a field that itself carries finite-difference error
    leaves an O(h) kink where one-sided and central stencils meet, so
    stacked derivatives are only clean ``margin`` samples away from open
    boundaries (and, conservatively, from mask holes).
    """
    ch = geom.chart
    m = qa.stencil_valid(geom.mask, ch.periodic_u, ch.periodic_v, reach=2)
    m = m.copy()
    if not ch.periodic_u:
        mu = min(margin, max(0, (ch.nu - 3) // 2))
        if mu:
            m[:mu, :] = False
            m[-mu:, :] = False
    if not ch.periodic_v:
        mv = min(margin, max(0, (ch.nv - 3) // 2))
        if mv:
            m[:, :mv] = False
            m[:, -mv:] = False
    return m


_margin_mask = stencil_interior_mask


@dataclass(frozen=True)
class FunctionalsReport:
    """Scalar functionals of one chart plus the defects that qualify them."""

    willmore: float
    energy: float
    degree_sphere: float
    degree_normal_left: float
    degree_normal_right: float
    residual_max: float
    residual_l2: float
    superconformal_defect_right: float
    superconformal_defect_left: float
    gauss_map_check_max: float
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "willmore": self.willmore,
            "energy": self.energy,
            "degree_sphere": self.degree_sphere,
            "degree_normal_left": self.degree_normal_left,
            "degree_normal_right": self.degree_normal_right,
            "residual_max": self.residual_max,
            "residual_l2": self.residual_l2,
            "superconformal_defect_right": self.superconformal_defect_right,
            "superconformal_defect_left": self.superconformal_defect_left,
            "gauss_map_check_max": self.gauss_map_check_max,
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class ResidualReport:
    """The Euler-Lagrange residual dw and its consistency cross-checks.

    ``max_abs``/``l2`` measure |dw(d/du, d/dv)| over the valid samples; the
    wedge fields are the sup norms of df/\\w, df/\\v and (2dH-w)/\\df, which
    vanish identically for exact data; ``harmonicity_defect`` compares
    4 d(*A) assembled from the sphere-derivative Hopf field against the
    affine prediction carrying dw — the two ends of the harmonicity chain.
    """

    max_abs: float
    l2: float
    field: np.ndarray
    mask: np.ndarray
    wedge_df_w: float
    wedge_df_v: float
    wedge_qb_df: float
    harmonicity_defect: float
    fd_scale: float


@dataclass(frozen=True)
class SuperConformalReport:
    """Normalized defects of *dR = R dR and *dN = N dN."""

    defect_right: float
    defect_left: float
    threshold: float

    @property
    def right_branch(self) -> bool:
        return self.defect_right <= self.threshold

    @property
    def left_branch(self) -> bool:
        return self.defect_left <= self.threshold

    @property
    def verdict(self) -> bool:
        return min(self.defect_right, self.defect_left) <= self.threshold


def cell_weights(chart: SurfaceChart) -> np.ndarray:
    """Quadrature weights per sample: 1 everywhere for periodic directions,
    trapezoid halves at the ends of open directions."""
    wu = np.ones(chart.nu)
    wv = np.ones(chart.nv)
    if not chart.periodic_u:
        wu[0] = wu[-1] = 0.5
    if not chart.periodic_v:
        wv[0] = wv[-1] = 0.5
    return wu[:, None] * wv[None, :]


def cell_sum(values: np.ndarray, geom: SurfaceGeometry,
             mask: np.ndarray | None = None) -> float:
    """Trapezoid-rule sum of a scalar grid field times the cell area."""
    m = geom.mask if mask is None else mask
    w = cell_weights(geom.chart)
    return float(np.sum(np.where(m, values * w, 0.0))) \
        * geom.chart.du * geom.chart.dv


def degree_of_normal(source: SurfaceChart | SurfaceGeometry,
                     which: str = "right", *,
                     allow_open: bool = False) -> float:
    """(1/4 pi) * integral of <dR(d/dv), R dR(d/du)> (or the N analog).

    This is a mapping degree only on closed (doubly periodic) charts; open
    patches raise :class:`~quatsurf.errors.DomainError` unless
    ``allow_open`` asks for the raw, non-topological patch integral.
    """
    geom = _as_geometry(source)
    if which not in ("right", "left"):
        raise InputError(f"unknown normal selector {which!r}")
    if not geom.chart.closed and not allow_open:
        raise DomainError(
            "degree of an open patch is not a topological invariant; "
            "pass allow_open=True for the raw patch integral")
    key = "dot_r" if which == "right" else "dot_n"
    return cell_sum(geom.curvature_fields[key], geom) / (4.0 * math.pi)


def gauss_bonnet_defect(geom: SurfaceGeometry) -> float:
    """| (1/4pi) * integral of K dA  -  (degN + degR)/2 |.

    The two sides are built from the same summands, so the defect is pure
    roundoff — this checks the wiring of K against the normal degrees.
    """
    c = geom.curvature_fields
    lam2 = geom.lam ** 2
    lhs = cell_sum(c["gauss"] * lam2, geom) / (4.0 * math.pi)
    rhs = 0.5 * (cell_sum(c["dot_r"], geom) + cell_sum(c["dot_n"], geom)) \
        / (4.0 * math.pi)
    return abs(lhs - rhs)


def conformal_gauss_checks(geom: SurfaceGeometry) -> dict[str, float]:
    """Conformality of the sphere congruence and the type decomposition.

    * ``conformality_max``: max over samples of the normalized defects
      |<dS,dS> - <*dS,*dS>| and |<dS,*dS>| with dS by finite differences of
      the S-field (an O(h^2)-limited check).
    * ``type_identity_max``: max normalized defect of
      <dS /\\ *dS> = 4(<A /\\ *A> + <Q /\\ *Q>) with every matrix taken from
      the affine realization, where the identity holds to roundoff because
      the cross terms are trace-free by construction.
    * ``positivity_min``: min of the two densities (>= 0 up to roundoff).
    """
    su, sv = geom.sphere_derivative
    t_uu = qa.trace_pair_field(su, su)
    t_vv = qa.trace_pair_field(sv, sv)
    t_uv = qa.trace_pair_field(su, sv)
    m = geom.mask
    # the trace pairing is indefinite (it vanishes on the derivative of any
    # conformal congruence), so normalize by the definite Frobenius scale,
    # floored at the roundoff amplification of the S-field differences
    ch = geom.chart
    h_min = min(ch.du, ch.dv)
    s_scale = float(qa.mnorm(geom.sphere_field)[m].max()) if m.any() else 1.0
    floor = 1e3 * np.finfo(float).eps * (s_scale / h_min) ** 2
    scale = np.maximum(qa.mnorm(su) ** 2 + qa.mnorm(sv) ** 2, floor)
    conf = np.maximum(np.abs(t_uu - t_vv), np.abs(t_uv)) / scale
    conformality_max = float(conf[m].max()) if m.any() else 0.0

    sf = geom.star_hopf_fields
    ds_u = 2.0 * (sf["star_q_u"] - sf["star_a_u"])
    ds_v = 2.0 * (sf["star_q_v"] - sf["star_a_v"])
    lhs = -(qa.trace_pair_field(ds_u, ds_u) + qa.trace_pair_field(ds_v, ds_v))
    a_u, a_v = -sf["star_a_v"], sf["star_a_u"]
    q_u, q_v = -sf["star_q_v"], sf["star_q_u"]
    dens_a = -(qa.trace_pair_field(a_u, a_u) + qa.trace_pair_field(a_v, a_v))
    dens_q = -(qa.trace_pair_field(q_u, q_u) + qa.trace_pair_field(q_v, q_v))
    rhs = 4.0 * (dens_a + dens_q)
    # both sides are quadratic in entries assembled from the ingredients
    # below, so eps * C^2 bounds their roundoff; flooring the denominator
    # at 1e-6 C^2 keeps sides that are numerically zero from reporting a
    # 0/0 ratio while leaving any genuine mismatch of order one
    d, hu_hv = geom.d_normals, geom.d_mean_h
    deriv_mag = (qa.qnorm(d["nu"]) + qa.qnorm(d["nv"])
                 + qa.qnorm(d["ru"]) + qa.qnorm(d["rv"]))
    ing = (qa.qnorm(hu_hv[0]) + qa.qnorm(hu_hv[1])
           + (1.0 + qa.qnorm(geom.mean_h)) * deriv_mag)
    c2 = ((1.0 + qa.qnorm(geom.jets["f"])) ** 2 * ing) ** 2
    tscale = np.abs(lhs) + np.abs(rhs) + 1e-6 * c2 + 1e-300
    type_max = float((np.abs(lhs - rhs) / tscale)[m].max()) if m.any() else 0.0
    pos_min = float(np.minimum(dens_a, dens_q)[m].min()) if m.any() else 0.0
    return {
        "conformality_max": conformality_max,
        "type_identity_max": type_max,
        "positivity_min": pos_min,
        "pair_density_a": dens_a,
        "pair_density_q": dens_q,
    }


def hopf_line_checks(geom: SurfaceGeometry) -> dict[str, float]:
    """Position of the Hopf fields relative to the tautological line.

    The Q-type matrices annihilate the line spanned by (f, 1), and the
    A-type matrices map everything into it (a 2-vector (x, y) lies in the
    line iff x = f y).  Both are construction identities of the affine
    realization, so the normalized residuals are roundoff-sized whenever
    the implementation is coherent.
    """
    f = geom.jets["f"]
    m = geom.mask
    if not m.any():
        return {"q_line_max": 0.0, "a_image_max": 0.0}
    sf = geom.star_hopf_fields
    lifted = np.stack([f, qa.qfrom_real(np.ones(m.shape))], axis=-2)
    fmag = 1.0 + qa.qnorm(f)
    q_line = 0.0
    for key in ("star_q_u", "star_q_v"):
        mat = sf[key]
        resid = np.sqrt(np.sum(qa.mvec(mat, lifted) ** 2, axis=(-1, -2)))
        scale = qa.mnorm(mat) * fmag + 1e-300
        q_line = max(q_line, float((resid / scale)[m].max()))
    a_image = 0.0
    for key in ("star_a_u", "star_a_v"):
        mat = sf[key]
        scale = qa.mnorm(mat) * fmag + 1e-300
        for col in range(2):
            resid = qa.qnorm(mat[..., 0, col, :]
                             - qa.qmul(f, mat[..., 1, col, :]))
            a_image = max(a_image, float((resid / scale)[m].max()))
    return {"q_line_max": q_line, "a_image_max": a_image}


def super_conformal_classify(source: SurfaceChart | SurfaceGeometry,
                             threshold: float = 0.05) -> SuperConformalReport:
    """Normalized sup of |dR(d/dv) - R dR(d/du)| and the N analog.

    The normalization is the pointwise frame-derivative magnitude plus a
    small global floor (so that an exactly parallel normal classifies as
    defect 0 instead of a 0/0 ratio).
    """
    geom = _as_geometry(source)
    d = geom.d_normals
    ff = geom.form_fields
    m = geom.mask
    if not m.any():
        return SuperConformalReport(0.0, 0.0, threshold)
    total = (qa.qnorm(d["nu"]) + qa.qnorm(d["nv"])
             + qa.qnorm(d["ru"]) + qa.qnorm(d["rv"]))
    floor = _DEFECT_SCALE_REL * float(total[m].max()) + 1e-300
    scale_r = qa.qnorm(d["ru"]) + qa.qnorm(d["rv"]) + floor
    scale_n = qa.qnorm(d["nu"]) + qa.qnorm(d["nv"]) + floor
    defect_r = float((qa.qnorm(ff["v_v"]) / scale_r)[m].max())
    defect_n = float((qa.qnorm(ff["qa_v"]) / scale_n)[m].max())
    return SuperConformalReport(defect_r, defect_n, threshold)


def willmore_residual_field(source: SurfaceChart | SurfaceGeometry
                            ) -> ResidualReport:
    """The residual dw(d/du, d/dv) = d/du[w(d/dv)] - d/dv[w(d/du)]."""
    geom = _as_geometry(source)
    ch = geom.chart
    ff = geom.form_fields
    jets = geom.jets
    dw = (qa.deriv(ff["w_v"], ch.du, 0, ch.periodic_u)
          - qa.deriv(ff["w_u"], ch.dv, 1, ch.periodic_v))
    mask = _margin_mask(geom, 4 if geom.frame_mode == "fd" else 3)
    mag = qa.qnorm(dw)
    if mask.any():
        max_abs = float(mag[mask].max())
        l2 = math.sqrt(float(np.sum(np.where(mask, mag * mag, 0.0)))
                       * ch.du * ch.dv)
    else:
        max_abs = l2 = 0.0

    fu, fv = jets["fu"], jets["fv"]

    def wedge(au, av, bu, bv):
        w = qa.qnorm(qa.qmul(au, bv) - qa.qmul(av, bu))
        return float(w[geom.mask].max()) if geom.mask.any() else 0.0

    wedge_df_w = wedge(fu, fv, ff["w_u"], ff["w_v"])
    wedge_df_v = wedge(fu, fv, ff["v_u"], ff["v_v"])
    wedge_qb_df = wedge(ff["qb_u"], ff["qb_v"], fu, fv)

    # Harmonicity chain spot-check: the exterior derivative of *A computed
    # from the sphere-derivative route should equal the affine matrix
    # (1/4) G [[0,0],[dw, dv + w/\df]] G^-1 up to the shared FD order.
    hi = geom.hopf_invariant_fields
    d_star_a = (-qa.deriv(hi["a_u"], ch.du, 0, ch.periodic_u)
                - qa.deriv(hi["a_v"], ch.dv, 1, ch.periodic_v))
    dv_form = (qa.deriv(ff["v_v"], ch.du, 0, ch.periodic_u)
               - qa.deriv(ff["v_u"], ch.dv, 1, ch.periodic_v))
    w_wedge_df = qa.qmul(ff["w_u"], fv) - qa.qmul(ff["w_v"], fu)
    predicted = 0.25 * _lower_conj(jets["f"], dw, dv_form + w_wedge_df)
    inner = _margin_mask(geom, 5 if geom.frame_mode == "fd" else 4)
    if inner.any():
        diff = qa.mnorm(d_star_a - predicted)
        # floor at the roundoff amplification of the stacked differences,
        # so that vanishing residuals (Willmore members) report ~0 instead
        # of a 0/0 ratio
        s_scale = float(qa.mnorm(geom.sphere_field)[inner].max())
        floor = 1e3 * np.finfo(float).eps * s_scale / min(ch.du, ch.dv) ** 2
        scale = max(float(qa.mnorm(d_star_a)[inner].max()),
                    float(qa.mnorm(predicted)[inner].max()), floor, 1e-300)
        harmonicity = float(diff[inner].max()) / scale
    else:
        harmonicity = 0.0
    return ResidualReport(
        max_abs=max_abs, l2=l2, field=dw, mask=mask,
        wedge_df_w=wedge_df_w, wedge_df_v=wedge_df_v, wedge_qb_df=wedge_qb_df,
        harmonicity_defect=harmonicity, fd_scale=geom.fd_tolerance())


def functionals_report(source: SurfaceChart | SurfaceGeometry,
                       frame_mode: str = "auto") -> FunctionalsReport:
    """Assemble every scalar functional of one chart into a report.

    W, E and degS are built from the same density summands, so the identity
    E = 8 pi W - 4 pi degS holds to roundoff; the normal degrees are raw
    patch integrals on open charts (flagged in metadata).
    """
    geom = _as_geometry(source, frame_mode)
    c = geom.curvature_fields
    w_sum = cell_sum(c["density_a"], geom)
    q_sum = cell_sum(c["density_q"], geom)
    willmore = w_sum / math.pi
    energy = 4.0 * (w_sum + q_sum)
    degree_sphere = (w_sum - q_sum) / math.pi
    deg_r = cell_sum(c["dot_r"], geom) / (4.0 * math.pi)
    deg_n = cell_sum(c["dot_n"], geom) / (4.0 * math.pi)
    residual = willmore_residual_field(geom)
    sc = super_conformal_classify(geom)
    checks = conformal_gauss_checks(geom)
    ch = geom.chart
    metadata = {
        "name": ch.name,
        "grid": [ch.nu, ch.nv],
        "spacing": [ch.du, ch.dv],
        "periodic": [bool(ch.periodic_u), bool(ch.periodic_v)],
        "closed": bool(ch.closed),
        "degrees_topological": bool(ch.closed),
        "valid_samples": int(geom.mask.sum()),
        "total_samples": int(geom.mask.size),
        "frame_mode": geom.frame_mode,
        "jet_provenance": geom.jet_provenance,
        "conformal_tol": geom.conformal_tol,
        "conformal_defect_max": (float(geom.conformal_defect[geom.mask].max())
                                 if geom.mask.any() else 0.0),
        "fd_scale": geom.fd_tolerance(),
        "gauss_bonnet_defect": gauss_bonnet_defect(geom),
        "type_identity_max": checks["type_identity_max"],
        "positivity_min": checks["positivity_min"],
        "wedge_df_w": residual.wedge_df_w,
        "wedge_df_v": residual.wedge_df_v,
        "wedge_qb_df": residual.wedge_qb_df,
        "harmonicity_defect": residual.harmonicity_defect,
    }
    return FunctionalsReport(
        willmore=willmore, energy=energy, degree_sphere=degree_sphere,
        degree_normal_left=deg_n, degree_normal_right=deg_r,
        residual_max=residual.max_abs, residual_l2=residual.l2,
        superconformal_defect_right=sc.defect_right,
        superconformal_defect_left=sc.defect_left,
        gauss_map_check_max=checks["conformality_max"],
        metadata=metadata)


def elastica_residual(kappa, tau, ds: float, *, periodic: bool = False
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the free-elastica system for sampled curve data.

    Returns (r1, r2) with r1 = kappa''+ kappa^3/2 - kappa tau^2 and
    r2 = (kappa^2 tau)' on a uniform arclength grid (central differences,
    one-sided second order at open ends).  A curve traced by a Willmore
    cylinder satisfies r1 = r2 = 0; a unit circle has r1 = 1/2.
    """
    kappa = np.asarray(kappa, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if kappa.ndim != 1 or tau.shape != kappa.shape:
        raise InputError("kappa and tau must be equal-length 1-d sequences")
    if kappa.size < 5:
        raise InputError("need at least 5 samples for the residual stencils")
    if ds <= 0:
        raise InputError("arclength step must be positive")
    kpp = qa.deriv2(kappa, ds, 0, periodic)
    r1 = 0.5 * kappa ** 3 + kpp - kappa * tau ** 2
    r2 = qa.deriv(kappa ** 2 * tau, ds, 0, periodic)
    return r1, r2


# -- Moebius transport -------------------------------------------------------


def moebius_transform_chart(chart: SurfaceChart, g: QMat2, *,
                            floor_rel: float = 0.05) -> SurfaceChart:
    """The chart of y = (a f + b)(c f + d)^-1, masked near the pull-back of
    infinity (|c f + d| below ``floor_rel`` times its median).

    When the input carries analytic jets, the output does too, via the
    chain rule: with s = c f + d and P = a - y c,
    y_X = P f_X s^-1 and y_XY = P f_XY s^-1 - y_X c f_Y s^-1 - y_Y c f_X s^-1.
    """
    m2_inverse(g)  # raises SingularityError for a non-invertible map
    garr = qmat_to_array(g)
    a, b = garr[0, 0], garr[0, 1]
    c, d = garr[1, 0], garr[1, 1]

    def transform(fields: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        f = fields["f"]
        s = qa.qmul(c, f) + d
        s_inv = qa.qinv(s)
        y = qa.qmul(qa.qmul(a, f) + b, s_inv)
        p = a - qa.qmul(y, c)

        def first(fx):
            return qa.qmul(qa.qmul(p, fx), s_inv)

        out = {"f": y, "fu": first(fields["fu"]), "fv": first(fields["fv"])}

        def second(fxy, yx, fx, yy, fy):
            t = qa.qmul(qa.qmul(p, fxy), s_inv)
            t -= qa.qmul(yx, qa.qmul(qa.qmul(c, fy), s_inv))
            t -= qa.qmul(yy, qa.qmul(qa.qmul(c, fx), s_inv))
            return t

        out["fuu"] = second(fields["fuu"], out["fu"], fields["fu"],
                            out["fu"], fields["fu"])
        out["fuv"] = second(fields["fuv"], out["fu"], fields["fu"],
                            out["fv"], fields["fv"])
        out["fvv"] = second(fields["fvv"], out["fv"], fields["fv"],
                            out["fv"], fields["fv"])
        return out

    s_mag = qa.qnorm(qa.qmul(c, chart.values) + d)
    floor = floor_rel * float(np.median(s_mag[chart.mask]))
    mask = chart.mask & (s_mag > floor)

    provider = None
    if chart.analytic_jets is not None:
        inner = chart.analytic_jets

        def provider(uu: np.ndarray, vv: np.ndarray) -> dict[str, np.ndarray]:
            jets = inner(uu, vv)
            return transform({k: np.asarray(jets[k], dtype=float)
                              for k in JET_KEYS})

    y_values = qa.qmul(qa.qmul(a, chart.values) + b,
                       qa.qinv(qa.qmul(c, chart.values) + d))
    return SurfaceChart(
        values=y_values, du=chart.du, dv=chart.dv,
        periodic_u=chart.periodic_u, periodic_v=chart.periodic_v,
        u0=chart.u0, v0=chart.v0,
        name=f"moebius({chart.name})" if chart.name else "moebius",
        analytic_jets=provider, mask=mask,
        conformal_tol=chart.conformal_tol,
        immersion_floor_rel=chart.immersion_floor_rel,
        params=dict(chart.params))


def moebius_density_invariance(chart: SurfaceChart, g: QMat2, *,
                               frame_mode: str = "auto") -> float:
    """Max relative pointwise deviation of the Willmore density under g.

    The density |dR + R *dR|^2/16 per unit coordinate area is unchanged by
    fractional linear transformations of the chart; samples masked by the
    transform (near its pull-back of infinity) are excluded, as are samples
    whose FD stencils touch them.
    """
    geom0 = SurfaceGeometry(chart, frame_mode=frame_mode)
    tchart = moebius_transform_chart(chart, g)
    geom1 = SurfaceGeometry(tchart, frame_mode=frame_mode)
    d0 = geom0.curvature_fields["density_a"]
    d1 = geom1.curvature_fields["density_a"]
    common = geom0.mask & geom1.mask
    if geom1.frame_mode == "fd" or geom1.jet_provenance == "fd":
        common = qa.stencil_valid(common, chart.periodic_u, chart.periodic_v,
                                  reach=2)
    if not common.any():
        raise DomainError("no samples survive the transform mask")
    d = geom0.d_normals
    deriv_scale = float((qa.qnorm(d["ru"]) + qa.qnorm(d["rv"]))[common].max())
    floor = _DENSITY_FLOOR_REL * max(deriv_scale, 1e-150) ** 2
    scale = max(float(d0[common].max()), float(d1[common].max()), floor)
    return float(np.abs(d1 - d0)[common].max()) / scale


def random_moebius(rng: np.random.Generator) -> QMat2:
    """A random invertible 2x2 quaternion matrix with standard-normal
    entries (resampled in the measure-zero singular case)."""
    from .quaternion import Quaternion

    while True:
        entries = rng.standard_normal((2, 2, 4))
        g = QMat2(*(Quaternion.from_array(entries[i, j])
                    for i in range(2) for j in range(2)))
        try:
            m2_inverse(g)
        except Exception:
            continue
        return g


def sample_moebius_transforms(chart: SurfaceChart, count: int, *,
                              seed: int = 0, floor_rel: float = 0.05,
                              max_draws: int = 400) -> list[QMat2]:
    """Seeded random fractional linear maps that keep the whole chart away
    from their pull-back of infinity (no sample within ``floor_rel`` of the
    denominator median), for invariance sweeps."""
    rng = np.random.default_rng(seed)
    accepted: list[QMat2] = []
    for _ in range(max_draws):
        if len(accepted) == count:
            break
        g = random_moebius(rng)
        garr = qmat_to_array(g)
        s_mag = qa.qnorm(qa.qmul(garr[1, 0], chart.values) + garr[1, 1])
        med = float(np.median(s_mag[chart.mask]))
        if med <= 0 or float(s_mag[chart.mask].min()) <= floor_rel * med:
            continue
        accepted.append(g)
    if len(accepted) < count:
        raise InputError(
            f"only {len(accepted)}/{count} transforms pass the distance-to-"
            f"infinity filter after {max_draws} draws")
    return accepted
