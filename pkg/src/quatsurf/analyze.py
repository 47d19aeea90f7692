"""One-stop structural analysis of a chart: functionals plus every
internal consistency invariant, with pass/fail verdicts and the exact
tolerances used.

The report is a plain dict of JSON-native values, deterministic for a
given chart and options (no timestamps, no environment probes), so the
serialized report of identical runs is byte-identical.  Failures of the
geometry to satisfy an invariant are verdicts, not exceptions;
exceptions raised while computing a suite are caught and recorded as
structured error entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qarray as qa
from .backlund import adjoint_field, s3_duality_check
from .chart import SurfaceChart
from .errors import DomainError, QuatSurfError
from .frames import SurfaceGeometry
from .functionals import (conformal_gauss_checks, functionals_report,
                          hopf_line_checks)
from .twistor import classification_agreement

_STRUCTURAL_TOL = 1e-8        # construction identities, scale-relative
_ADJOINT_TOL = 1e-9           # S = S* on charts inside Im H
_ROUTE_FACTOR = 10.0          # x fd tolerance, for FD-limited route checks


@dataclass(frozen=True)
class AnalyzeOptions:
    """Knobs of :func:`analyze` (all deterministic)."""

    tolerance_scale: float = 1.0
    frame_mode: str = "auto"
    include_classification: bool = True
    include_duality: bool = True


def _suite(value: float, threshold: float, note: str = "") -> dict:
    entry = {"value": float(value), "threshold": float(threshold),
             "status": "pass" if value <= threshold else "fail"}
    if note:
        entry["note"] = note
    return entry


def _skip(reason: str) -> dict:
    return {"status": "skipped", "note": reason}


def analyze(source: SurfaceChart | SurfaceGeometry,
            options: AnalyzeOptions | None = None) -> dict:
    """Full report: functionals, invariant verdicts, tolerance ledger."""
    opts = options or AnalyzeOptions()
    geom = source if isinstance(source, SurfaceGeometry) else \
        SurfaceGeometry(source, frame_mode=opts.frame_mode)
    ch = geom.chart
    ts = opts.tolerance_scale
    fd = geom.fd_tolerance()
    structural = _STRUCTURAL_TOL * ts
    # S = S* is exact for exact data, FD-limited for sampled data
    adjoint_tol = (_ADJOINT_TOL if geom.jet_provenance == "analytic"
                   else fd)
    tolerances = {
        "fd_tolerance": fd,
        "conformal_tolerance": geom.conformal_tol * ts,
        "structural_identity": structural,
        "route_agreement": _ROUTE_FACTOR * fd * ts,
        "self_adjoint": adjoint_tol * ts,
        "classification_threshold": 0.05,
        "tolerance_scale": ts,
    }
    report = {
        "surface": {
            "name": ch.name,
            "nu": ch.nu, "nv": ch.nv, "du": ch.du, "dv": ch.dv,
            "periodic_u": ch.periodic_u, "periodic_v": ch.periodic_v,
            "valid_samples": int(geom.mask.sum()),
            "frame_mode": geom.frame_mode,
        },
        "tolerances": tolerances,
        "invariants": {},
        "errors": [],
    }
    inv = report["invariants"]

    def run(name, fn):
        try:
            inv[name] = fn()
        except QuatSurfError as exc:
            report["errors"].append({"suite": name,
                                     "type": type(exc).__name__,
                                     "message": str(exc)})
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            report["errors"].append({"suite": name,
                                     "type": type(exc).__name__,
                                     "message": str(exc)})

    def functionals():
        rep = functionals_report(geom)
        report["functionals"] = rep.as_dict()
        return _suite(0.0, 1.0, "reported, no verdict")

    run("functionals", functionals)

    def conformal_immersion():
        value = float(geom.conformal_defect[geom.mask].max()) \
            if geom.mask.any() else 0.0
        return _suite(value, geom.conformal_tol * ts)

    run("conformal_immersion", conformal_immersion)

    def normals():
        value = max(geom.normal_projection_defect, geom.h_projection_defect)
        threshold = (fd if geom.frame_mode == "fd" else structural) * ts
        return _suite(value, threshold)

    run("normal_projection", normals)

    run("mean_curvature_routes",
        lambda: _suite(geom.h_route_defect, _ROUTE_FACTOR * fd * ts))

    def sphere_square():
        s = geom.sphere_field
        one = np.zeros(s.shape)
        one[..., 0, 0, 0] = one[..., 1, 1, 0] = 1.0
        defect = qa.mnorm(qa.mmul(s, s) + one)
        scale = np.maximum(qa.mnorm(s) ** 2, 1e-300)
        value = float((defect / scale)[geom.mask].max()) \
            if geom.mask.any() else 0.0
        return _suite(value, structural)

    run("sphere_congruence_square", sphere_square)

    def gauss_checks():
        checks = conformal_gauss_checks(geom)
        entry = _suite(checks["conformality_max"], max(fd, 1e-12) * ts)
        entry["type_identity"] = _suite(checks["type_identity_max"],
                                        structural)
        entry["positivity_min"] = float(checks["positivity_min"])
        if entry["type_identity"]["status"] == "fail":
            entry["status"] = "fail"
        return entry

    run("sphere_congruence_conformality", gauss_checks)

    def hopf_lines():
        checks = hopf_line_checks(geom)
        return _suite(max(checks["q_line_max"], checks["a_image_max"]),
                      structural)

    run("hopf_line_position", hopf_lines)

    run("hopf_route_agreement",
        lambda: _suite(geom.hopf_route_disagreement(),
                       _ROUTE_FACTOR * fd * ts))

    def form_symmetries():
        # the identities compare differences of normal derivatives, so the
        # derivative magnitude is the right scale even when a form field
        # itself vanishes identically (umbilic charts)
        ff = geom.form_fields
        d = geom.d_normals
        m = geom.mask
        if not m.any():
            return _suite(0.0, structural)
        d1 = qa.qnorm(ff["v_u"] - qa.qmul(geom.normal_right, ff["v_v"]))
        s1 = qa.qnorm(d["ru"]) + qa.qnorm(d["rv"])
        d2 = qa.qnorm(ff["qa_u"] - qa.qmul(geom.normal_left, ff["qa_v"]))
        s2 = qa.qnorm(d["nu"]) + qa.qnorm(d["nv"])
        floor = 1e-9 * max(float(s1[m].max()), float(s2[m].max()), 1e-300)
        value = max(float((d1 / (s1 + floor))[m].max()),
                    float((d2 / (s2 + floor))[m].max()))
        return _suite(value, structural)

    run("form_star_symmetries", form_symmetries)

    def energy_consistency():
        if not ch.closed:
            return _skip("chart is not closed")
        f = report["functionals"]
        predicted = 8.0 * np.pi * f["willmore"] \
            - 4.0 * np.pi * f["degree_sphere"]
        value = abs(f["energy"] - predicted) / (1.0 + abs(f["energy"]))
        return _suite(value, structural)

    run("energy_identity", energy_consistency)

    def gauss_bonnet():
        if not ch.closed:
            return _skip("chart is not closed")
        value = abs(report["functionals"]["metadata"]["gauss_bonnet_defect"])
        return _suite(value, structural)

    run("gauss_bonnet", gauss_bonnet)

    def self_adjoint():
        f = geom.jets["f"]
        m = geom.mask
        f_scale = max(float(qa.qnorm(f)[m].max()), 1.0) if m.any() else 1.0
        if m.any() and float(np.abs(f[..., 0])[m].max()) > 1e-12 * f_scale:
            return _skip("chart does not take values in Im H")
        s = geom.sphere_field
        value = float(qa.mnorm(s - adjoint_field(s))[m].max()) \
            if m.any() else 0.0
        return _suite(value, adjoint_tol * ts)

    run("duality_self_adjoint", self_adjoint)

    if opts.include_classification:
        def classification():
            agree = classification_agreement(geom)
            entry = {"status": "pass" if agree["agree"] else "fail"}
            entry.update(agree)
            return entry

        run("classification_agreement", classification)

    status = "ok"
    if any(v.get("status") == "fail" for v in inv.values()):
        status = "invariant-failure"
    if report["errors"]:
        status = "error"
    report["status"] = status
    return report


def duality_report(source: SurfaceChart | SurfaceGeometry) -> dict:
    """The Im H duality diagnostics as a JSON-ready report."""
    geom = source if isinstance(source, SurfaceGeometry) \
        else SurfaceGeometry(source)
    rep = s3_duality_check(geom)
    fd = geom.fd_tolerance()
    adjoint_tol = (_ADJOINT_TOL if geom.jet_provenance == "analytic"
                   else fd)
    doc = {
        "verdict": rep.verdict,
        "self_adjoint_max": rep.self_adjoint_max,
        "reality_defect": rep.reality_defect,
        "dual_anti_adjoint_max": rep.dual_anti_adjoint_max,
        "closedness_defect": rep.closedness_defect,
        "periods": {k: np.asarray(v).tolist() for k, v in rep.periods.items()},
        "metadata": dict(rep.metadata),
        "tolerances": {"self_adjoint": adjoint_tol,
                       "reality": fd,
                       "dual_anti_adjoint": 10.0 * fd},
        "status": "ok",
    }
    if rep.verdict == "degenerate-constant":
        return doc
    checks = (rep.self_adjoint_max <= adjoint_tol
              and rep.reality_defect <= fd
              and rep.dual_anti_adjoint_max <= 10.0 * fd)
    doc["status"] = "ok" if checks else "invariant-failure"
    return doc
