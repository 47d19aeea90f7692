"""Frame fields, mean curvature spheres, and Hopf fields of a chart.

For a conformal immersion f with *df = N df = -df R, the engine computes on
the whole grid:

* the left/right normal fields N, R (unit imaginary, N^2 = R^2 = -1),
* the mean curvature datum H with 2 H f_u = R_u - R R_v and the mean
  curvature vector <H> = conj(H N),
* the mean curvature sphere congruence S = G [[N,0],[-H,-R]] G^-1 with
  G = [[1,f],[0,1]],
* the Hopf fields A, Q through two independent routes: the *affine* route
  assembles them from the component 1-forms

      w  = dH + H (*df) H + R *dH - H *dN          (lower-left of 4*A)
      v  = dR + R *dR                              (lower-right of 4*A)
      qa = dN + N *dN                              (upper-left of 4*Q)
      qb = w - 2 dH                                (lower-left of 4*Q)

  while the *sphere-derivative* route differentiates the S-field and forms
  A = (1/4)(S dS + *dS), Q = (1/4)(S dS - *dS).  The two routes are kept
  separate so each can check the other.

Derivatives of N, R default to finite differences of the computed fields
("fd" mode); "analytic" mode differentiates the defining formulas with the
second-order jets instead (dH always comes from differencing the H field —
it would need third derivatives otherwise).

All arrays are quaternion fields shaped (nu, nv, 4) or matrix fields
(nu, nv, 2, 2, 4); evaluation-at-a-sample accessors return the dataclass
views at the bottom of the module.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import qarray as qa
from .chart import SurfaceChart, jet_fields, jet_mask
from .errors import InputError, NotConformalError, NotImmersedError
from .moebius import Sphere2, qmat_from_array
from .qmatrix import QMat2
from .quaternion import Quaternion

_ANALYTIC_CONFORMAL_TOL = 1e-9
_FD_TOL_FACTOR = 10.0


def _entry(field: np.ndarray, iu: int, iv: int) -> Quaternion:
    return Quaternion.from_array(field[iu, iv])


@dataclass(frozen=True)
class PointFrame:
    """Frame data at one sample."""

    n: Quaternion
    r: Quaternion
    h: Quaternion
    h_vector: Quaternion
    lam: float
    conformal_defect: float


@dataclass(frozen=True)
class HopfEval:
    """Mean curvature sphere and Hopf fields evaluated at one sample.

    ``a_op`` and ``q_op`` are the endomorphism values A(d/du), Q(d/du);
    ``w_x, w_jx, v_x`` the component one-forms on X = d/du and JX = d/dv.
    """

    sphere: QMat2
    a_op: QMat2
    q_op: QMat2
    w_x: Quaternion
    w_jx: Quaternion
    v_x: Quaternion


@dataclass(frozen=True)
class SecondFundamental:
    """Trace-free-plus-trace second fundamental form values at a sample."""

    xx: Quaternion
    xjx: Quaternion
    jxjx: Quaternion
    mean_vector: Quaternion
    normality_defect: float


def _lower_conj(f: np.ndarray, omega: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """G [[0,0],[omega,nu]] G^-1 for G = [[1,f],[0,1]], entrywise."""
    e11 = qa.qmul(f, omega)
    e12 = qa.qmul(f, nu) - qa.qmul(e11, f)
    e22 = nu - qa.qmul(omega, f)
    return qa.mfrom_entries(e11, e12, omega, e22)


def _upper_conj(f: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """G [[a,0],[b,0]] G^-1 for G = [[1,f],[0,1]], entrywise."""
    t = a + qa.qmul(f, b)
    return qa.mfrom_entries(t, -qa.qmul(t, f), b, -qa.qmul(b, f))


class SurfaceGeometry:
    """Grid-wide frame and Hopf-field computation for one chart.

    ``frame_mode``: "auto" (default; analytic when the chart has an
    analytic jet provider, finite differences otherwise), "fd" (derivatives
    of N, R, H by differencing the computed fields), or "analytic" (N, R
    derivatives from the jet formulas; requires second-order jets, exact
    for analytic charts).
    ``jets_source`` is forwarded to :func:`quatsurf.chart.jet_fields`.
    """

    def __init__(self, chart: SurfaceChart, frame_mode: str = "auto",
                 jets_source: str = "auto", strict: bool = True):
        if frame_mode not in ("fd", "analytic", "auto"):
            raise InputError(f"unknown frame mode {frame_mode!r}")
        self.chart = chart
        self.jets, self.jet_provenance = jet_fields(chart, jets_source)
        if frame_mode == "auto":
            frame_mode = "analytic" if self.jet_provenance == "analytic" else "fd"
        self.frame_mode = frame_mode
        self.strict = strict
        self._base_mask = jet_mask(chart, self.jet_provenance)
        self._validate()

    # -- validation ----------------------------------------------------

    def _validate(self) -> None:
        ch = self.chart
        fu, fv = self.jets["fu"], self.jets["fv"]
        lam = qa.qnorm(fu)
        valid = self._base_mask
        if not valid.any():
            self.mask = valid
            self.lam = lam
            self.conformal_defect = np.zeros_like(lam)
            self.conformal_tol = np.inf
            return
        floor = ch.immersion_floor_rel * float(np.median(lam[valid]))
        immersed = lam > floor
        if self.strict and bool(ch.mask.all()) and not immersed[valid].all():
            worst = float(lam[valid].min())
            raise NotImmersedError(
                f"chart {ch.name!r} dips below the immersion floor: "
                f"min |f_u| = {worst:.3e} <= {floor:.3e}")
        valid = valid & immersed
        self.mask = valid
        self.lam = lam
        lam2 = np.maximum(lam, floor) ** 2
        cross = np.abs(qa.qdot(fu, fv))
        iso = 0.5 * np.abs(qa.qnormsq(fu) - qa.qnormsq(fv))
        self.conformal_defect = np.maximum(cross, iso) / lam2
        self.conformal_tol = self._conformal_tolerance(lam, valid)
        if self.strict and valid.any():
            worst = float(self.conformal_defect[valid].max())
            if worst > self.conformal_tol:
                raise NotConformalError(
                    f"chart {ch.name!r} is not conformal at this sampling: "
                    f"max defect {worst:.3e} > tolerance {self.conformal_tol:.3e}")

    def _conformal_tolerance(self, lam: np.ndarray, valid: np.ndarray) -> float:
        ch = self.chart
        if ch.conformal_tol is not None:
            return ch.conformal_tol
        if self.jet_provenance == "analytic":
            return _ANALYTIC_CONFORMAL_TOL
        # FD jets: the defect of a truly conformal surface is O(h^2 |f'''|);
        # estimate the third derivative by differencing the second ones.
        h = ch.spacing()
        e3u = qa.qnorm(qa.deriv(self.jets["fuu"], ch.du, 0, ch.periodic_u))
        e3v = qa.qnorm(qa.deriv(self.jets["fvv"], ch.dv, 1, ch.periodic_v))
        ratio = (e3u + e3v)[valid] / np.maximum(lam[valid], 1e-300)
        est = float(ratio.max()) if ratio.size else 0.0
        return _FD_TOL_FACTOR * (h * h / 6.0) * est + 1e-12

    def fd_tolerance(self, factor: float = _FD_TOL_FACTOR) -> float:
        """Reference O(h^2) tolerance scale for FD-limited identities."""
        h = self.chart.spacing()
        return factor * h * h

    # -- frames ----------------------------------------------------------

    @cached_property
    def _normals_raw(self) -> tuple[np.ndarray, np.ndarray]:
        fu, fv = self.jets["fu"], self.jets["fv"]
        fu_inv = qa.qinv(fu)
        return qa.qmul(fv, fu_inv), -qa.qmul(fu_inv, fv)

    @cached_property
    def normal_left(self) -> np.ndarray:
        """N with *df = N df, projected to exact unit imaginary."""
        return qa.qunit_imag(self._normals_raw[0])

    @cached_property
    def normal_right(self) -> np.ndarray:
        """R with *df = -df R, projected to exact unit imaginary."""
        return qa.qunit_imag(self._normals_raw[1])

    @cached_property
    def normal_projection_defect(self) -> float:
        """Distance between raw and normalized normals (conformality scale)."""
        if not self.mask.any():
            return 0.0
        dn = qa.qnorm(self._normals_raw[0] - self.normal_left)
        dr = qa.qnorm(self._normals_raw[1] - self.normal_right)
        return float(np.maximum(dn, dr)[self.mask].max())

    @cached_property
    def d_normals(self) -> dict[str, np.ndarray]:
        """First derivatives Nu, Nv, Ru, Rv by the selected route."""
        ch = self.chart
        n, r = self.normal_left, self.normal_right
        if self.frame_mode == "fd":
            return {
                "nu": qa.deriv(n, ch.du, 0, ch.periodic_u),
                "nv": qa.deriv(n, ch.dv, 1, ch.periodic_v),
                "ru": qa.deriv(r, ch.du, 0, ch.periodic_u),
                "rv": qa.deriv(r, ch.dv, 1, ch.periodic_v),
            }
        fu_inv = qa.qinv(self.jets["fu"])
        fuu, fuv, fvv = self.jets["fuu"], self.jets["fuv"], self.jets["fvv"]
        return {
            "nu": qa.qmul(fuv - qa.qmul(n, fuu), fu_inv),
            "nv": qa.qmul(fvv - qa.qmul(n, fuv), fu_inv),
            "ru": -qa.qmul(fu_inv, fuv + qa.qmul(fuu, r)),
            "rv": -qa.qmul(fu_inv, fvv + qa.qmul(fuv, r)),
        }

    @cached_property
    def _h_raw(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.d_normals
        n, r = self.normal_left, self.normal_right
        fu_inv = qa.qinv(self.jets["fu"])
        h_from_r = 0.5 * qa.qmul(d["ru"] - qa.qmul(r, d["rv"]), fu_inv)
        h_from_n = 0.5 * qa.qmul(fu_inv, d["nu"] - qa.qmul(n, d["nv"]))
        return h_from_r, h_from_n

    @cached_property
    def mean_h(self) -> np.ndarray:
        """H with 2 H df = dR - R *dR, projected onto {H : RH = HN}.

        The involution x -> -R x N is an isometry, so (x - R x N)/2 is the
        orthogonal projector onto the compatibility space; the projection
        shifts H by at most the route disagreement (an O(h^2) quantity) and
        makes the sphere matrix satisfy S^2 = -I to roundoff.
        """
        h = self._h_raw[0]
        n, r = self.normal_left, self.normal_right
        return 0.5 * (h - qa.qmul(r, qa.qmul(h, n)))

    @cached_property
    def h_route_defect(self) -> float:
        """Max disagreement of the dR- and dN-route mean curvature data."""
        if not self.mask.any():
            return 0.0
        return float(qa.qnorm(self._h_raw[0] - self._h_raw[1])[self.mask].max())

    @cached_property
    def h_projection_defect(self) -> float:
        """Max |RH - HN| of the raw (unprojected) H field."""
        if not self.mask.any():
            return 0.0
        h = self._h_raw[0]
        resid = qa.qmul(self.normal_right, h) - qa.qmul(h, self.normal_left)
        return float(qa.qnorm(resid)[self.mask].max())

    @cached_property
    def mean_vector(self) -> np.ndarray:
        """The mean curvature vector conj(H N) (imaginary for Im H charts)."""
        return qa.qconj(qa.qmul(self.mean_h, self.normal_left))

    @cached_property
    def d_mean_h(self) -> tuple[np.ndarray, np.ndarray]:
        """dH by finite differences of the H field (both modes)."""
        ch = self.chart
        h = self.mean_h
        return (qa.deriv(h, ch.du, 0, ch.periodic_u),
                qa.deriv(h, ch.dv, 1, ch.periodic_v))

    def frame_at(self, iu: int, iv: int) -> PointFrame:
        return PointFrame(
            n=_entry(self.normal_left, iu, iv),
            r=_entry(self.normal_right, iu, iv),
            h=_entry(self.mean_h, iu, iv),
            h_vector=_entry(self.mean_vector, iu, iv),
            lam=float(self.lam[iu, iv]),
            conformal_defect=float(self.conformal_defect[iu, iv]),
        )

    # -- second fundamental form and curvatures ---------------------------

    @cached_property
    def second_fundamental_fields(self) -> dict[str, np.ndarray]:
        d, fu, fv = self.d_normals, self.jets["fu"], self.jets["fv"]
        return {
            "xx": 0.5 * (qa.qmul(fv, d["ru"]) - qa.qmul(d["nu"], fv)),
            "xjx": 0.5 * (qa.qmul(d["nu"], fu) - qa.qmul(fu, d["ru"])),
            "jxjx": 0.5 * (qa.qmul(d["nv"], fu) - qa.qmul(fu, d["rv"])),
        }

    def second_fundamental_at(self, iu: int, iv: int) -> SecondFundamental:
        ii = self.second_fundamental_fields
        lam2 = self.lam[iu, iv] ** 2
        mean = Quaternion.from_array(
            (ii["xx"][iu, iv] + ii["jxjx"][iu, iv]) / (2.0 * lam2))
        n = _entry(self.normal_left, iu, iv)
        r = _entry(self.normal_right, iu, iv)
        defect = max(
            (n * _entry(ii[k], iu, iv) * r + _entry(ii[k], iu, iv)).norm()
            for k in ("xx", "xjx", "jxjx"))
        return SecondFundamental(
            xx=_entry(ii["xx"], iu, iv), xjx=_entry(ii["xjx"], iu, iv),
            jxjx=_entry(ii["jxjx"], iu, iv), mean_vector=mean,
            normality_defect=defect)

    @cached_property
    def curvature_fields(self) -> dict[str, np.ndarray]:
        """Gauss curvature K, normal curvature Kperp, and the Willmore
        integrand <A /\\ *A>(d/du, d/dv) = |dR + R *dR|^2(d/dv)/16."""
        d = self.d_normals
        n, r = self.normal_left, self.normal_right
        dot_r = qa.qdot(d["rv"], qa.qmul(r, d["ru"]))
        dot_n = qa.qdot(d["nv"], qa.qmul(n, d["nu"]))
        lam2 = np.maximum(self.lam, 1e-300) ** 2
        return {
            "gauss": (dot_r + dot_n) / (2.0 * lam2),
            "normal": (dot_r - dot_n) / (2.0 * lam2),
            "density_a": qa.qnormsq(self.form_fields["v_v"]) / 16.0,
            "density_q": qa.qnormsq(self.form_fields["qa_v"]) / 16.0,
            "dot_r": dot_r,
            "dot_n": dot_n,
        }

    def curvatures_at(self, iu: int, iv: int) -> tuple[float, float, float]:
        c = self.curvature_fields
        return (float(c["gauss"][iu, iv]), float(c["normal"][iu, iv]),
                float(c["density_a"][iu, iv]))

    def curvatures_rotated(self, theta: float) -> dict[str, np.ndarray]:
        """Curvature fields recomputed in the frame X' = cos(t) d/du +
        sin(t) d/dv — they must not depend on theta."""
        d = self.d_normals
        c, s = np.cos(theta), np.sin(theta)
        ru = c * d["ru"] + s * d["rv"]
        rv = c * d["rv"] - s * d["ru"]
        nu = c * d["nu"] + s * d["nv"]
        nv = c * d["nv"] - s * d["nu"]
        n, r = self.normal_left, self.normal_right
        lam2 = np.maximum(self.lam, 1e-300) ** 2
        dot_r = qa.qdot(rv, qa.qmul(r, ru))
        dot_n = qa.qdot(nv, qa.qmul(n, nu))
        return {
            "gauss": (dot_r + dot_n) / (2.0 * lam2),
            "normal": (dot_r - dot_n) / (2.0 * lam2),
            "density_a": qa.qnormsq(rv - qa.qmul(r, ru)) / 16.0,
        }

    # -- mean curvature sphere and Hopf fields -----------------------------

    @cached_property
    def sphere_field(self) -> np.ndarray:
        """S = G [[N,0],[-H,-R]] G^-1 as a (nu, nv, 2, 2, 4) field."""
        f = self.jets["f"]
        n, r, h = self.normal_left, self.normal_right, self.mean_h
        s11 = n - qa.qmul(f, h)
        s12 = -qa.qmul(s11, f) - qa.qmul(f, r)
        s22 = qa.qmul(h, f) - r
        return qa.mfrom_entries(s11, s12, -h, s22)

    @cached_property
    def form_fields(self) -> dict[str, np.ndarray]:
        """Component one-forms w, v, qa, qb evaluated on d/du and d/dv.

        Uses the reduced expression w = dH + R *dH + (1/2) H (N dN - *dN),
        equal to dH + H (*df) H + R *dH - H *dN by the defining relation
        2 df H = dN - N *dN.
        """
        d = self.d_normals
        hu, hv = self.d_mean_h
        n, r, h = self.normal_left, self.normal_right, self.mean_h
        w_u = hu + qa.qmul(r, hv) + 0.5 * qa.qmul(h, qa.qmul(n, d["nu"]) - d["nv"])
        w_v = hv - qa.qmul(r, hu) + 0.5 * qa.qmul(h, qa.qmul(n, d["nv"]) + d["nu"])
        return {
            "w_u": w_u,
            "w_v": w_v,
            "v_u": d["ru"] + qa.qmul(r, d["rv"]),
            "v_v": d["rv"] - qa.qmul(r, d["ru"]),
            "qa_u": d["nu"] + qa.qmul(n, d["nv"]),
            "qa_v": d["nv"] - qa.qmul(n, d["nu"]),
            "qb_u": w_u - 2.0 * hu,
            "qb_v": w_v - 2.0 * hv,
        }

    @cached_property
    def star_hopf_fields(self) -> dict[str, np.ndarray]:
        """*A and *Q evaluated on d/du, d/dv (affine route):
        4 *A(X) = G [[0,0],[w(X), v(X)]] G^-1 and
        4 *Q(X) = G [[qa(X),0],[qb(X),0]] G^-1."""
        f = self.jets["f"]
        ff = self.form_fields
        return {
            "star_a_u": 0.25 * _lower_conj(f, ff["w_u"], ff["v_u"]),
            "star_a_v": 0.25 * _lower_conj(f, ff["w_v"], ff["v_v"]),
            "star_q_u": 0.25 * _upper_conj(f, ff["qa_u"], ff["qb_u"]),
            "star_q_v": 0.25 * _upper_conj(f, ff["qa_v"], ff["qb_v"]),
        }

    @cached_property
    def hopf_affine_fields(self) -> dict[str, np.ndarray]:
        """A(d/du) = -*A(d/dv) and Q(d/du) = -*Q(d/dv), affine route."""
        sf = self.star_hopf_fields
        return {"a_op": -sf["star_a_v"], "q_op": -sf["star_q_v"]}

    @cached_property
    def sphere_derivative(self) -> tuple[np.ndarray, np.ndarray]:
        """dS(d/du), dS(d/dv) by finite differences of the S-field."""
        ch = self.chart
        s = self.sphere_field
        return (qa.deriv(s, ch.du, 0, ch.periodic_u),
                qa.deriv(s, ch.dv, 1, ch.periodic_v))

    @cached_property
    def hopf_invariant_fields(self) -> dict[str, np.ndarray]:
        """Hopf fields from the sphere congruence alone:
        A = (1/4)(S dS + *dS), Q = (1/4)(S dS - *dS), evaluated on both
        coordinate directions."""
        s = self.sphere_field
        su, sv = self.sphere_derivative
        ssu = qa.mmul(s, su)
        ssv = qa.mmul(s, sv)
        return {
            "a_u": 0.25 * (ssu + sv),
            "a_v": 0.25 * (ssv - su),
            "q_u": 0.25 * (ssu - sv),
            "q_v": 0.25 * (ssv + su),
        }

    def mean_curvature_sphere_at(self, iu: int, iv: int) -> Sphere2:
        return Sphere2(qmat_from_array(self.sphere_field[iu, iv]))

    def hopf_affine_at(self, iu: int, iv: int) -> HopfEval:
        ha = self.hopf_affine_fields
        ff = self.form_fields
        return HopfEval(
            sphere=qmat_from_array(self.sphere_field[iu, iv]),
            a_op=qmat_from_array(ha["a_op"][iu, iv]),
            q_op=qmat_from_array(ha["q_op"][iu, iv]),
            w_x=_entry(ff["w_u"], iu, iv),
            w_jx=_entry(ff["w_v"], iu, iv),
            v_x=_entry(ff["v_u"], iu, iv),
        )

    def hopf_from_sphere_derivative_at(self, iu: int, iv: int) -> HopfEval:
        """The S-derivative (invariant) route; components are read back out
        of the matrices through the G-conjugation structure."""
        hi = self.hopf_invariant_fields
        f = self.jets["f"][iu, iv]
        # *A(d/du) = A(d/dv); in the affine frame its lower row is
        # (w(d/du), v(d/du) - w(d/du) f) / 4
        star_a_u = hi["a_v"][iu, iv]
        w_x = 4.0 * star_a_u[1, 0]
        v_x = 4.0 * star_a_u[1, 1] + qa.qmul(w_x, f)
        star_a_v = -hi["a_u"][iu, iv]
        w_jx = 4.0 * star_a_v[1, 0]
        return HopfEval(
            sphere=qmat_from_array(self.sphere_field[iu, iv]),
            a_op=qmat_from_array(hi["a_u"][iu, iv]),
            q_op=qmat_from_array(hi["q_u"][iu, iv]),
            w_x=Quaternion.from_array(w_x),
            w_jx=Quaternion.from_array(w_jx),
            v_x=Quaternion.from_array(v_x),
        )

    # -- aggregate defects -------------------------------------------------

    def hopf_route_disagreement(self) -> float:
        """Max entrywise distance between the affine and S-derivative Hopf
        operators, relative to their scale (an O(h^2) quantity)."""
        if not self.mask.any():
            return 0.0
        ha, hi = self.hopf_affine_fields, self.hopf_invariant_fields
        diff_a = qa.mnorm(ha["a_op"] - hi["a_u"])
        diff_q = qa.mnorm(ha["q_op"] - hi["q_u"])
        scale = float(np.maximum(qa.mnorm(ha["a_op"]), qa.mnorm(ha["q_op"]))
                      [self.mask].max())
        return float(np.maximum(diff_a, diff_q)[self.mask].max()) / max(scale, 1e-300)
