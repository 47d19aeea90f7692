"""Command-line shell over the analysis engine.

Verbs::

    quatsurf catalog [FAMILY]                 list families / build a surface
    quatsurf analyze SURFACE                  full invariant + functional report
    quatsurf transform KIND SURFACE           Willmore transforms (one/two step)
    quatsurf lift SURFACE                     twistor lift and classification
    quatsurf duality SURFACE                  3-sphere duality report
    quatsurf export SURFACE --format FMT      surface JSON / OBJ mesh / CSV

``SURFACE`` is either a catalog family name or a path to a surface JSON
file (the schema documented in :mod:`quatsurf.serialization`).  Reports
are canonical JSON — identical inputs and flags produce byte-identical
bytes — and every report embeds the tolerances it judged against.  All
file output is atomic (temp file + rename).

Exit codes: 0 success, 2 invariant failure, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import backlund, catalog, functionals, twistor
from . import serialization as ser
from .analyze import AnalyzeOptions, duality_report
from .analyze import analyze as run_analyze
from .chart import SurfaceChart
from .errors import (DomainError, InputError, NotConformalError,
                     NotImmersedError, QuatSurfError)
from .frames import SurfaceGeometry

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_INPUT = 3

_STRUCTURAL_TOL = 1e-8


class _Parser(argparse.ArgumentParser):
    """argparse's usage errors exit with our input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().replace("x", " ").split()
    try:
        nu, nv = (int(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"wants NUxNV, got {text!r}") from exc
    return nu, nv


def _parse_bounds(text: str) -> tuple[float, float, float, float]:
    try:
        u0, u1, v0, v1 = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"wants U0,U1,V0,V1, got {text!r}") from exc
    return u0, u1, v0, v1


def _parse_params(items: list[str]) -> dict:
    """``key=value`` pairs; values parsed as JSON when possible."""
    out = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param wants key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _parse_components(text: str) -> tuple[int, int, int]:
    try:
        i, j, k = (int(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"wants three indices I,J,K in 0..3, got {text!r}") from exc
    return i, j, k


def _load_surface(args) -> SurfaceChart:
    """Resolve the SURFACE argument: catalog family or surface JSON path."""
    spec = args.surface
    grid = getattr(args, "grid", None)
    bounds = getattr(args, "bounds", None)
    params = _parse_params(getattr(args, "param", None) or [])
    if spec in catalog.FAMILIES and spec != "json-file":
        nu, nv = grid if grid else (None, None)
        return catalog.build(spec, nu=nu, nv=nv, bounds=bounds, **params)
    if spec.endswith(".json") or os.path.exists(spec):
        if grid or bounds or params:
            raise InputError(
                "--grid/--bounds/--param configure catalog families; "
                f"{spec!r} is a surface file")
        return catalog.build("json-file", path=spec)
    raise InputError(
        f"{spec!r} is neither a catalog family "
        f"({', '.join(n for n in catalog.FAMILIES if n != 'json-file')}) "
        "nor a surface JSON file")


def _emit(text: str, out: str | None) -> None:
    if out:
        ser.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _status_exit(status: str) -> int:
    return EXIT_OK if status == "ok" else EXIT_INVARIANT


# ----------------------------------------------------------------- verbs

def _cmd_catalog(args) -> int:
    if args.surface is None:
        lines = []
        for name in catalog.FAMILIES:
            if name == "json-file":
                lines.append(f"{name:<18} load a surface JSON file "
                             "(pass its path as SURFACE)")
                continue
            d = catalog._DEFAULTS[name]
            per = ("uv" if d.periodic_u and d.periodic_v
                   else "u" if d.periodic_u
                   else "v" if d.periodic_v else "-")
            b = ",".join(f"{x:g}" for x in d.bounds)
            grid = f"{d.nu}x{d.nv}"
            lines.append(f"{name:<18} {grid:<8} periodic={per:<3} "
                         f"bounds={b}")
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    chart = _load_surface(args)
    _emit(ser.canonical_json(ser.surface_to_dict(chart)), args.out)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    chart = _load_surface(args)
    options = AnalyzeOptions(tolerance_scale=args.tol)
    report = run_analyze(chart, options)
    _emit(ser.canonical_json(report), args.out)
    return _status_exit(report["status"])


_TRANSFORMS = {
    "forward": backlund.one_step_forward,
    "backward": backlund.one_step_backward,
    "two-forward": backlund.two_step_forward,
    "two-backward": backlund.two_step_backward,
}

# diagnostics checked when the source is Willmore: (key, kind of threshold)
_TRANSFORM_CHECKS = {
    "forward": (("closedness_defect", "fd"),
                ("left_normal_vs_minus_r", "fd")),
    "backward": (("closedness_defect", "fd"),
                 ("w_of_h_vs_2df", "fd")),
    "two-forward": (("kernel_residual", "structural"),),
    "two-backward": (),
}


def _cmd_transform(args) -> int:
    chart = _load_surface(args)
    geom = SurfaceGeometry(chart)
    fd = geom.fd_tolerance()
    residual = functionals.willmore_residual_field(geom)
    willmore_source = residual.max_abs <= fd
    result = _TRANSFORMS[args.kind](geom)
    out_chart = result.to_chart(chart)

    if args.format == "obj":
        _emit(ser.surface_to_obj(out_chart), args.out)
        return EXIT_OK
    if args.format == "csv":
        _emit(ser.surface_to_csv(out_chart), args.out)
        return EXIT_OK
    if args.format == "surface":
        _emit(ser.canonical_json(ser.surface_to_dict(out_chart)), args.out)
        return EXIT_OK

    checks = {}
    if willmore_source:
        values = dict(result.diagnostics)
        values["closedness_defect"] = result.closedness_defect
        for key, kind in _TRANSFORM_CHECKS[args.kind]:
            if key not in values:
                continue
            threshold = fd if kind == "fd" else _STRUCTURAL_TOL
            value = float(values[key])
            checks[key] = {"value": value, "threshold": threshold,
                           "status": "pass" if value <= threshold else "fail"}
    status = ("invariant-failure"
              if any(c["status"] == "fail" for c in checks.values())
              else "ok")
    report = {
        "transform": args.kind,
        "source": {"name": chart.name, "nu": chart.nu, "nv": chart.nv,
                   "willmore_residual_max": residual.max_abs,
                   "willmore_source": willmore_source},
        "closedness_defect": result.closedness_defect,
        "periods": {k: np.asarray(v).tolist()
                    for k, v in result.periods.items()},
        "basepoint": list(result.basepoint),
        "diagnostics": dict(result.diagnostics),
        "checks": checks,
        "tolerances": {"fd_tolerance": fd,
                       "structural_identity": _STRUCTURAL_TOL},
        "surface": ser.surface_to_dict(out_chart),
        "status": status,
    }
    _emit(ser.canonical_json(report), args.out)
    return _status_exit(status)


def _cmd_lift(args) -> int:
    chart = _load_surface(args)
    geom = SurfaceGeometry(chart)

    if args.format == "csv":
        lift = twistor.twistor_lift(geom)
        _emit(ser.lift_to_csv(chart, lift.c4, lift.mask), args.out)
        return EXIT_OK

    rep = twistor.lift_holomorphicity_defect(geom)
    agreement = twistor.classification_agreement(geom)
    lift = twistor.twistor_lift(geom, branch=rep.branch)
    try:
        rank = twistor.lift_plane_rank(lift)
        plane = {"plane_ratio": rank["plane_ratio"],
                 "in_projective_line": rank["in_projective_line"]}
    except InputError:
        plane = {"plane_ratio": None, "in_projective_line": None}
    status = "ok" if agreement["agree"] else "invariant-failure"
    report = {
        "branch": rep.branch,
        "defect": rep.defect,
        "defect_right": rep.defect_right,
        "defect_left": rep.defect_left,
        "super_conformal": bool(rep.verdict),
        "classification": agreement,
        "plane": plane,
        "tolerances": {"classification_threshold": rep.threshold},
        "status": status,
    }
    _emit(ser.canonical_json(report), args.out)
    return _status_exit(status)


def _cmd_duality(args) -> int:
    chart = _load_surface(args)
    report = duality_report(chart)
    _emit(ser.canonical_json(report), args.out)
    return _status_exit(report["status"])


def _cmd_export(args) -> int:
    chart = _load_surface(args)
    if args.format == "json":
        _emit(ser.canonical_json(ser.surface_to_dict(chart)), args.out)
    elif args.format == "obj":
        _emit(ser.surface_to_obj(chart, components=args.components), args.out)
    else:
        _emit(ser.surface_to_csv(chart), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_surface_arg(p: argparse.ArgumentParser, required: bool = True
                     ) -> None:
    if required:
        p.add_argument("surface", metavar="SURFACE",
                       help="catalog family name or surface JSON path")
    else:
        p.add_argument("surface", metavar="SURFACE", nargs="?", default=None,
                       help="catalog family name or surface JSON path")
    p.add_argument("--grid", type=_parse_grid, metavar="NUxNV", default=None,
                   help="resolution for catalog families")
    p.add_argument("--bounds", type=_parse_bounds, metavar="U0,U1,V0,V1",
                   default=None, help="patch bounds for catalog families")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   default=None, help="family parameter (repeatable; "
                   "the value is parsed as JSON when possible)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quatsurf",
                     description="Conformal/Willmore surface analysis in "
                                 "the quaternionic projective line.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("catalog",
                       help="list families, or build one as surface JSON")
    _add_surface_arg(p, required=False)
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(handler=_cmd_catalog)

    p = sub.add_parser("analyze",
                       help="invariant suites, functionals, tolerance ledger")
    _add_surface_arg(p)
    p.add_argument("--tol", type=float, default=1.0, metavar="SCALE",
                   help="scale factor on every tolerance in the ledger")
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("transform", help="Willmore transforms")
    p.add_argument("kind", choices=("forward", "backward",
                                    "two-forward", "two-backward"))
    _add_surface_arg(p)
    p.add_argument("--format", choices=("report", "surface", "obj", "csv"),
                   default="report",
                   help="report JSON (default), bare surface JSON, "
                        "OBJ mesh, or CSV of the transformed surface")
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(handler=_cmd_transform)

    p = sub.add_parser("lift", help="twistor lift and super-conformality")
    _add_surface_arg(p)
    p.add_argument("--format", choices=("report", "csv"), default="report",
                   help="report JSON (default) or CSV of the lifted curve "
                        "(eight reals per sample)")
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(handler=_cmd_lift)

    p = sub.add_parser("duality", help="3-sphere duality report")
    _add_surface_arg(p)
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(handler=_cmd_duality)

    p = sub.add_parser("export", help="surface JSON, OBJ mesh, or CSV fields")
    _add_surface_arg(p)
    p.add_argument("--format", choices=("json", "obj", "csv"),
                   required=True)
    p.add_argument("--components", type=_parse_components, metavar="I,J,K",
                   default=(0, 1, 2),
                   help="the three coordinates meshed by OBJ export")
    p.add_argument("--out", metavar="FILE", default=None)
    p.set_defaults(handler=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (InputError, DomainError, NotConformalError,
            NotImmersedError) as exc:
        print(f"quatsurf: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"quatsurf: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QuatSurfError as exc:
        print(f"quatsurf: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
