"""Transforms that produce new Willmore surfaces from old ones.

Two mechanisms, both driven by the component one-forms of the source chart:

* one-step transforms integrate an exact (for Willmore inputs) one-form —
  dg = w/2 forward, dh = w/2 - dH backward — by trapezoid accumulation
  along grid paths.  Closedness of the integrand is diagnosed, not
  assumed: the mixed-partial defect and the deviation between two sweep
  orders are folded into ``closedness_defect``, and holonomy around
  periodic directions is reported as ``periods`` (integration proceeds on
  the universal cover).

* two-step transforms are pointwise algebra, no integration: the new
  point is the affine representative of ker *A ("forward",
  f - w(X)^-1 v(X)) or of the image column of *Q ("backward",
  f + a(X) b(X)^-1 with a = (dN + N *dN), b = w - 2dH), with X = d/du.
  Samples where the defining denominator falls below the singularity
  floor are masked, never NaN.

The module also hosts the duality check for surfaces in Im H: the mean
curvature sphere is self-adjoint for the hermitian form (v, w) ->
conj(v1) w2 + conj(v2) w1, and the potential F integrated from dF = 2*A
(normalized by F + F* = -S at the basepoint) has a lower-left entry g
that is a minimal surface for the hyperbolic metric — verified through
S_g + S_g* = 0 on the g-chart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import qarray as qa
from .chart import SurfaceChart
from .errors import DomainError, InputError
from .frames import SurfaceGeometry
from .functionals import stencil_interior_mask

_UNIT = np.array([1.0, 0.0, 0.0, 0.0])  # denominator stand-in at masked samples

_SINGULARITY_FLOOR_REL = 1e-7   # of the per-chart median denominator
_ZERO_FIELD_REL = 1e-9          # of the form-ingredient scale: "this field
                                # is identically zero, not merely small"


@dataclass(frozen=True)
class TransformResult:
    """A transformed point grid plus the diagnostics that qualify it."""

    values: np.ndarray
    mask: np.ndarray
    closedness_defect: float
    periods: dict
    basepoint: tuple[int, int]
    constant: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    name: str = ""

    def to_chart(self, template: SurfaceChart) -> SurfaceChart:
        """The result as a chart on the source grid (universal cover: the
        periodic flags are dropped for directions with nonzero holonomy)."""
        ref = 1.0 + float(np.abs(self.values).max(initial=0.0))
        per_u = template.periodic_u and not _period_nonzero(
            self.periods, "u", ref)
        per_v = template.periodic_v and not _period_nonzero(
            self.periods, "v", ref)
        return SurfaceChart(
            values=self.values, du=template.du, dv=template.dv,
            periodic_u=per_u, periodic_v=per_v,
            u0=template.u0, v0=template.v0,
            name=self.name or f"transform({template.name})",
            mask=self.mask)


def _field_norm(x: np.ndarray) -> np.ndarray:
    """Euclidean norm over all trailing (non-grid) axes."""
    return np.sqrt(np.sum(x * x, axis=tuple(range(2, x.ndim))))


def _period_nonzero(periods: dict, key: str, ref: float) -> bool:
    """Whether the holonomy around ``key`` exceeds roundoff at scale ``ref``."""
    p = periods.get(key)
    return p is not None and float(np.abs(p).max()) > 1e-10 * ref


def integrate_one_form(omega_u: np.ndarray, omega_v: np.ndarray,
                       chart: SurfaceChart, *,
                       basepoint: tuple[int, int] = (0, 0),
                       constant: np.ndarray | None = None):
    """Integrate a grid-sampled one-form along grid paths.

    ``omega_u``/``omega_v`` are the values on d/du and d/dv, shape
    (nu, nv) + T for any trailing shape T.  The primary result accumulates
    along u at the basepoint column and then along v per column (trapezoid
    rule); the opposite sweep order estimates path dependence.  Returns
    ``(values, periods, defect_field, sweep_deviation)`` where ``periods``
    holds the holonomy around each periodic direction and ``defect_field``
    is the pointwise mixed-partial (non-closedness) magnitude.
    """
    if omega_u.shape != omega_v.shape or omega_u.shape[:2] != (chart.nu, chart.nv):
        raise InputError("one-form components must share the grid shape")
    iu, iv = basepoint
    if not (0 <= iu < chart.nu and 0 <= iv < chart.nv):
        raise InputError(f"basepoint {basepoint} outside grid")
    c = np.zeros(omega_u.shape[2:]) if constant is None else np.asarray(constant)

    cum_u = cumulative_trapezoid(omega_u, dx=chart.du, axis=0, initial=0)
    cum_v = cumulative_trapezoid(omega_v, dx=chart.dv, axis=1, initial=0)
    # row-major sweep: along u at v = v_basepoint, then along v per column
    row = c + cum_u[:, iv] - cum_u[iu, iv]
    primary = row[:, None] + cum_v - cum_v[:, iv][:, None]
    # column-major sweep for the path-dependence estimate
    col = c + cum_v[iu, :] - cum_v[iu, iv]
    alternate = col[None, :] + cum_u - cum_u[iu, None]

    periods = {}
    if chart.periodic_u:
        periods["u"] = chart.du * np.sum(omega_u, axis=0)[iv]
    if chart.periodic_v:
        periods["v"] = chart.dv * np.sum(omega_v, axis=1)[iu]

    mixed = (qa.deriv(omega_v, chart.du, 0, chart.periodic_u)
             - qa.deriv(omega_u, chart.dv, 1, chart.periodic_v))
    return primary, periods, _field_norm(mixed), \
        _field_norm(primary - alternate)


def _as_geometry(source: SurfaceChart | SurfaceGeometry) -> SurfaceGeometry:
    if isinstance(source, SurfaceGeometry):
        return source
    return SurfaceGeometry(source)


def _interior(geom: SurfaceGeometry, extra: int = 0) -> np.ndarray:
    """Stencil-uniform interior for this geometry's jet provenance."""
    margin = (4 if geom.frame_mode == "fd" else 3) + extra
    return stencil_interior_mask(geom, margin)


def _closedness(geom: SurfaceGeometry, defect_field: np.ndarray,
                dev_field: np.ndarray) -> tuple[float, float]:
    """Scalar closedness defect: max pointwise mixed-partial defect over
    the stencil-uniform interior, with the per-area deviation between the
    two sweep orders folded in.  Paths to interior targets stay interior,
    so both estimators see only stencil-uniform samples.  Returns the
    defect and the raw sweep deviation."""
    inner = _interior(geom)
    red = inner if inner.any() else geom.mask
    defect = float(defect_field[red].max()) if red.any() else 0.0
    sweep_dev = float(dev_field[red].max()) if red.any() else 0.0
    ch = geom.chart
    area = (ch.du * max(ch.nu - 1, 1)) * (ch.dv * max(ch.nv - 1, 1))
    return max(defect, sweep_dev / area), sweep_dev


def _basepoint(chart: SurfaceChart) -> tuple[int, int]:
    """Interior basepoint: keeps the primary u-sweep on a column away
    from the one-sided-stencil margins of open boundaries."""
    return chart.nu // 2, chart.nv // 2


def _immersed_mask(geom: SurfaceGeometry, lam: np.ndarray) -> np.ndarray:
    """Samples where a derived map with differential speed ``lam`` is
    genuinely immersed: clears both a median-relative floor and an
    absolute floor at the scale of the source's one-form ingredients
    (so an identically-noise field counts as constant, not immersed)."""
    m = geom.mask
    if not m.any():
        return m
    med = float(np.median(lam[m]))
    floor = max(_SINGULARITY_FLOOR_REL * med,
                1e-9 * _ingredient_scale(geom), 1e-300)
    return m & (lam > floor)


def _derived_geometry(values: np.ndarray, template: SurfaceChart,
                      mask: np.ndarray, name: str,
                      periodic: tuple[bool, bool] | None = None
                      ) -> SurfaceGeometry:
    """Geometry of a derived (transformed) grid: FD jets, soft validation."""
    per_u, per_v = (template.periodic_u, template.periodic_v) \
        if periodic is None else periodic
    ch = SurfaceChart(values=values, du=template.du, dv=template.dv,
                      periodic_u=per_u, periodic_v=per_v,
                      u0=template.u0, v0=template.v0, name=name, mask=mask)
    return SurfaceGeometry(ch, strict=False)


def _ingredient_scale(geom: SurfaceGeometry) -> float:
    """Magnitude scale of the component one-forms' ingredients, used to
    recognize identically-zero fields (vs. merely small denominators)."""
    d = geom.d_normals
    hu, hv = geom.d_mean_h
    ing = (qa.qnorm(hu) + qa.qnorm(hv)
           + (1.0 + qa.qnorm(geom.mean_h))
           * (qa.qnorm(d["nu"]) + qa.qnorm(d["nv"])
              + qa.qnorm(d["ru"]) + qa.qnorm(d["rv"])))
    m = geom.mask
    return float(ing[m].max()) if m.any() else 0.0


def _denominator_mask(geom: SurfaceGeometry, denom: np.ndarray
                      ) -> tuple[np.ndarray, float]:
    """Valid samples whose denominator clears the singularity floor."""
    mag = qa.qnorm(denom)
    m = geom.mask
    if not m.any():
        return m, 0.0
    floor = max(_SINGULARITY_FLOOR_REL * float(np.median(mag[m])),
                _ZERO_FIELD_REL * _ingredient_scale(geom))
    return m & (mag > floor), floor


def one_step_forward(source: SurfaceChart | SurfaceGeometry,
                     g0=None) -> TransformResult:
    """Integrate dg = w/2 from the basepoint; the result is a new Willmore
    surface when the input is Willmore (closedness defect ~ 0) whose left
    normal is -R wherever g immerses."""
    geom = _as_geometry(source)
    ff = geom.form_fields
    c = np.zeros(4) if g0 is None else np.asarray(g0, dtype=float)
    bp = _basepoint(geom.chart)
    g, periods, defect_field, dev_field = integrate_one_form(
        0.5 * ff["w_u"], 0.5 * ff["w_v"], geom.chart,
        basepoint=bp, constant=c)
    closedness, sweep_dev = _closedness(geom, defect_field, dev_field)
    diagnostics = _forward_checks(geom, g, periods)
    diagnostics["sweep_deviation"] = sweep_dev
    return TransformResult(
        values=g, mask=geom.mask.copy(), closedness_defect=closedness,
        periods=periods, basepoint=bp, constant=c,
        diagnostics=diagnostics, name="backlund-forward")


def _forward_checks(geom: SurfaceGeometry, g: np.ndarray,
                    periods: dict) -> dict:
    """df /\\ dg = 0 and N_g = -R on the immersed part of g."""
    ch = geom.chart
    ref = 1.0 + float(np.abs(g).max(initial=0.0))
    per = (ch.periodic_u and not _period_nonzero(periods, "u", ref),
           ch.periodic_v and not _period_nonzero(periods, "v", ref))
    gu = qa.deriv(g, ch.du, 0, per[0])
    gv = qa.deriv(g, ch.dv, 1, per[1])
    fu, fv = geom.jets["fu"], geom.jets["fv"]
    wedge = qa.qnorm(qa.qmul(fu, gv) - qa.qmul(fv, gu))
    inner = _interior(geom)
    scale = float((qa.qnorm(fu) * (qa.qnorm(gu) + qa.qnorm(gv))
                   )[inner].max()) if inner.any() else 0.0
    out = {"wedge_df_dg": float(wedge[inner].max()) if inner.any() else 0.0,
           "wedge_scale": scale}
    immersed = _immersed_mask(geom, qa.qnorm(gu))
    out["immersed_fraction"] = float(immersed.sum()) / max(geom.mask.sum(), 1)
    if immersed.sum() >= 16:
        geo_g = _derived_geometry(g, geom.chart, immersed,
                                  "backlund-forward", per)
        diff = qa.qnorm(geo_g.normal_left + geom.normal_right)
        common = geo_g.mask & immersed & inner
        out["left_normal_vs_minus_r"] = (
            float(diff[common].max()) if common.any() else 0.0)
    return out


def one_step_backward(source: SurfaceChart | SurfaceGeometry,
                      h0=None) -> TransformResult:
    """Integrate dh = w/2 - dH; the source is the forward transform of the
    result, and the w-form of h equals 2 df wherever h immerses."""
    geom = _as_geometry(source)
    ff = geom.form_fields
    hu, hv = geom.d_mean_h
    c = np.zeros(4) if h0 is None else np.asarray(h0, dtype=float)
    bp = _basepoint(geom.chart)
    h, periods, defect_field, dev_field = integrate_one_form(
        0.5 * ff["w_u"] - hu, 0.5 * ff["w_v"] - hv, geom.chart,
        basepoint=bp, constant=c)
    closedness, sweep_dev = _closedness(geom, defect_field, dev_field)
    diagnostics = {"sweep_deviation": sweep_dev}
    ch = geom.chart
    ref = 1.0 + float(np.abs(h).max(initial=0.0))
    per = (ch.periodic_u and not _period_nonzero(periods, "u", ref),
           ch.periodic_v and not _period_nonzero(periods, "v", ref))
    h_u = qa.deriv(h, ch.du, 0, per[0])
    immersed = _immersed_mask(geom, qa.qnorm(h_u))
    diagnostics["immersed_fraction"] = \
        float(immersed.sum()) / max(geom.mask.sum(), 1)
    if immersed.sum() >= 16:
        geo_h = _derived_geometry(h, geom.chart, immersed,
                                  "backlund-backward", per)
        wff = geo_h.form_fields
        fu, fv = geom.jets["fu"], geom.jets["fv"]
        diff = np.maximum(qa.qnorm(wff["w_u"] - 2.0 * fu),
                          qa.qnorm(wff["w_v"] - 2.0 * fv))
        common = _interior(geo_h, extra=4) & _interior(geom)
        diagnostics["w_of_h_vs_2df"] = (
            float(diff[common].max()) if common.any() else 0.0)
        diagnostics["w_scale"] = (
            float((2.0 * qa.qnorm(fu))[common].max()) if common.any() else 0.0)
    return TransformResult(
        values=h, mask=geom.mask.copy(), closedness_defect=closedness,
        periods=periods, basepoint=bp, constant=c,
        diagnostics=diagnostics, name="backlund-backward")


def two_step_forward(source: SurfaceChart | SurfaceGeometry
                     ) -> TransformResult:
    """Pointwise kernel of the affine *A matrix: f~ = f - w(X)^-1 v(X),
    X = d/du; masked at the zeros of w(X)."""
    geom = _as_geometry(source)
    ff = geom.form_fields
    mask, floor = _denominator_mask(geom, ff["w_u"])
    f = geom.jets["f"]
    safe = np.where(mask[..., None], ff["w_u"], _UNIT)
    shift = qa.qmul(qa.qinv(safe), ff["v_u"])
    values = np.where(mask[..., None], f - shift, 0.0)
    diagnostics = {"denominator_floor": floor}
    if mask.any():
        # membership in ker *A(d/du): exact up to roundoff by construction
        sf = geom.star_hopf_fields
        lifted = np.stack(
            [values, qa.qfrom_real(np.ones(mask.shape))], axis=-2)
        resid = _field_norm(qa.mvec(sf["star_a_u"], lifted))
        scale = np.maximum(qa.mnorm(sf["star_a_u"])
                           * (1.0 + qa.qnorm(values)), 1e-300)
        diagnostics["kernel_residual"] = float((resid / scale)[mask].max())
        # same membership through the FD-limited complementary direction
        resid2 = _field_norm(qa.mvec(geom.hopf_affine_fields["a_op"], lifted))
        diagnostics["kernel_residual_cross"] = \
            float((resid2 / scale)[mask].max())
    return TransformResult(
        values=values, mask=mask, closedness_defect=0.0, periods={},
        basepoint=(0, 0), constant=np.zeros(4),
        diagnostics=diagnostics, name="backlund-two-forward")


def two_step_backward(source: SurfaceChart | SurfaceGeometry
                      ) -> TransformResult:
    """Pointwise image column of the affine *Q matrix:
    f^ = f + a(X) b(X)^-1 with a = (dN + N *dN)(X), b = (w - 2dH)(X),
    X = d/du; masked at the zeros of b."""
    geom = _as_geometry(source)
    ff = geom.form_fields
    mask, floor = _denominator_mask(geom, ff["qb_u"])
    f = geom.jets["f"]
    safe = np.where(mask[..., None], ff["qb_u"], _UNIT)
    shift = qa.qmul(ff["qa_u"], qa.qinv(safe))
    values = np.where(mask[..., None], f + shift, 0.0)
    return TransformResult(
        values=values, mask=mask, closedness_defect=0.0, periods={},
        basepoint=(0, 0), constant=np.zeros(4),
        diagnostics={"denominator_floor": floor},
        name="backlund-two-backward")


def two_step_roundtrip_defect(source: SurfaceChart | SurfaceGeometry
                              ) -> float:
    """Max |twoStepBackward(twoStepForward(chart)) - f| over samples valid
    in every stage, normalized by the chart scale."""
    geom = _as_geometry(source)
    fwd = two_step_forward(geom)
    if not fwd.mask.any():
        return 0.0
    geo_t = _derived_geometry(fwd.values, geom.chart, fwd.mask,
                              "two-step-forward")
    back = two_step_backward(geo_t)
    common = back.mask & _interior(geo_t, extra=4) & _interior(geom)
    if not common.any():
        return 0.0
    diff = qa.qnorm(back.values - geom.jets["f"])
    scale = max(float(qa.qnorm(geom.jets["f"])[common].max()), 1.0)
    return float(diff[common].max()) / scale


def hopf_exchange_defect(source: SurfaceChart | SurfaceGeometry
                         ) -> dict[str, float]:
    """Entrywise comparison of the Q-field of the two-step forward
    transform with the A-field of the source (they agree as matrix-valued
    one-forms), normalized by the A-field scale."""
    geom = _as_geometry(source)
    fwd = two_step_forward(geom)
    if not fwd.mask.any():
        return {"max_rel": 0.0, "samples": 0}
    geo_t = _derived_geometry(fwd.values, geom.chart, fwd.mask,
                              "two-step-forward")
    sf_f = geom.star_hopf_fields
    sf_t = geo_t.star_hopf_fields
    common = _interior(geo_t, extra=4) & _interior(geom)
    if not common.any():
        return {"max_rel": 0.0, "samples": 0}
    diff = np.maximum(qa.mnorm(sf_t["star_q_u"] - sf_f["star_a_u"]),
                      qa.mnorm(sf_t["star_q_v"] - sf_f["star_a_v"]))
    scale = max(float(qa.mnorm(sf_f["star_a_u"])[common].max()),
                float(qa.mnorm(sf_f["star_a_v"])[common].max()), 1e-300)
    return {"max_rel": float(diff[common].max()) / scale,
            "samples": int(common.sum())}


# -- duality for charts in Im H ----------------------------------------------


def adjoint_field(s: np.ndarray) -> np.ndarray:
    """Pointwise adjoint w.r.t. the hermitian form (v, w) -> conj(v1) w2 +
    conj(v2) w1, i.e. [[a,b],[c,d]]* = [[conj(d), conj(b)], [conj(c),
    conj(a)]]."""
    out = np.empty_like(s)
    out[..., 0, 0, :] = qa.qconj(s[..., 1, 1, :])
    out[..., 0, 1, :] = qa.qconj(s[..., 0, 1, :])
    out[..., 1, 0, :] = qa.qconj(s[..., 1, 0, :])
    out[..., 1, 1, :] = qa.qconj(s[..., 0, 0, :])
    return out


@dataclass(frozen=True)
class DualityReport:
    """Diagnostics of the minimal-surface duality for Im H charts."""

    verdict: str
    self_adjoint_max: float
    reality_defect: float
    dual_anti_adjoint_max: float
    closedness_defect: float
    periods: dict
    fd_scale: float
    metadata: dict = field(default_factory=dict)


def s3_duality_check(source: SurfaceChart | SurfaceGeometry
                     ) -> DualityReport:
    """Verify the duality chain on a chart with values in Im H.

    (a) the mean curvature sphere is self-adjoint (S* = S) for the
    hermitian form conj(v1) w2 + conj(v2) w1; (b) the potential F with
    dF = 2*A, normalized by F(p0) = -S(p0)/2 (so F + F* = -S at the
    basepoint), has a lower-left entry g with g + conj(g) = H at every
    sample; (c) the chart of g has an anti-self-adjoint sphere congruence
    (S_g* = -S_g), the minimal-surface criterion for the hyperbolic
    metric on the form's isotropy complement.  A vanishing A-field yields
    the ``degenerate-constant`` verdict (the transform is a point).
    """
    geom = _as_geometry(source)
    f = geom.jets["f"]
    m = geom.mask
    if not m.any():
        raise InputError("no valid samples")
    f_scale = max(float(qa.qnorm(f)[m].max()), 1.0)
    if float(np.abs(f[..., 0])[m].max()) > 1e-12 * f_scale:
        raise DomainError(
            "duality requires a chart with values in Im H "
            "(zero real part)")

    s = geom.sphere_field
    s_star = adjoint_field(s)
    self_adjoint = float(qa.mnorm(s - s_star)[m].max())
    fd_scale = geom.fd_tolerance()
    metadata = {"name": geom.chart.name, "s_scale":
                float(qa.mnorm(s)[m].max())}

    sf = geom.star_hopf_fields
    a_mag = np.maximum(qa.mnorm(sf["star_a_u"]), qa.mnorm(sf["star_a_v"]))
    a_scale = float(a_mag[m].max())
    if a_scale <= 1e-10 * _ingredient_scale(geom) * f_scale + 1e-300:
        return DualityReport(
            verdict="degenerate-constant", self_adjoint_max=self_adjoint,
            reality_defect=0.0, dual_anti_adjoint_max=0.0,
            closedness_defect=0.0, periods={}, fd_scale=fd_scale,
            metadata=metadata)

    iu, iv = _basepoint(geom.chart)
    potential, periods, defect_field, dev_field = integrate_one_form(
        2.0 * sf["star_a_u"], 2.0 * sf["star_a_v"], geom.chart,
        basepoint=(iu, iv), constant=-0.5 * s[iu, iv])
    closedness, _ = _closedness(geom, defect_field, dev_field)
    g = potential[..., 1, 0, :]
    reality = qa.qnorm(g + qa.qconj(g) - geom.mean_h)
    h_scale = max(float(qa.qnorm(geom.mean_h)[m].max()), 1.0)
    reality_defect = float(reality[m].max()) / h_scale

    ch = geom.chart
    ref = 1.0 + float(np.abs(g).max(initial=0.0))
    per = (ch.periodic_u and not _period_nonzero(periods, "u", ref),
           ch.periodic_v and not _period_nonzero(periods, "v", ref))
    gu = qa.deriv(g, ch.du, 0, per[0])
    immersed = _immersed_mask(geom, qa.qnorm(gu))
    dual_max = np.inf
    if immersed.sum() >= 16:
        geo_g = _derived_geometry(g, ch, immersed, "duality-dual", per)
        s_g = geo_g.sphere_field
        anti = qa.mnorm(s_g + adjoint_field(s_g))
        inner = _interior(geo_g, extra=4) & _interior(geom)
        if inner.any():
            dual_max = float(anti[inner].max()) \
                / max(float(qa.mnorm(s_g)[inner].max()), 1.0)
            metadata["dual_samples"] = int(inner.sum())
    # self-adjointness is exact for exact frame data, FD-limited otherwise
    adjoint_rel = 1e-9 if geom.jet_provenance == "analytic" else fd_scale
    verdict = "dual-minimal" if (
        self_adjoint <= adjoint_rel * metadata["s_scale"]
        and dual_max <= 10.0 * max(fd_scale, 1e-12)) else "inconclusive"
    return DualityReport(
        verdict=verdict, self_adjoint_max=self_adjoint,
        reality_defect=reality_defect, dual_anti_adjoint_max=dual_max,
        closedness_defect=closedness, periods=periods, fd_scale=fd_scale,
        metadata=metadata)
