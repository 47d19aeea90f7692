"""File formats: surface grids as JSON, meshes as OBJ, frame fields as CSV.

All writers are atomic (temp file in the destination directory, then
rename), and the JSON writers are canonical — keys sorted, floats in
shortest round-trip form — so identical inputs produce byte-identical
files.  The surface JSON schema is::

    {"type": "grid", "nu": .., "nv": .., "du": .., "dv": ..,
     "periodic_u": .., "periodic_v": .., "values": [[w, x, y, z], ...]}

with ``values`` row-major (v fastest).  Loading is the exact inverse of
saving: a chart survives a save/load round trip bit for bit.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .chart import SurfaceChart
from .errors import InputError
from .frames import SurfaceGeometry

_CSV_FIELDS = ("iu", "iv", "u", "v", "valid",
               "f_w", "f_x", "f_y", "f_z",
               "n_x", "n_y", "n_z", "r_x", "r_y", "r_z",
               "h_w", "h_x", "h_y", "h_z",
               "speed", "gauss", "normal_curvature",
               "density_a", "density_q")


def atomic_write_text(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, floats in
    shortest round-trip form, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def _plain(obj):
    """Recursively convert numpy scalars/arrays to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v) or np.isinf(v):
            return repr(v)
        return v
    return obj


def surface_to_dict(chart: SurfaceChart) -> dict:
    """The surface JSON document for a chart."""
    doc = {
        "type": "grid",
        "nu": chart.nu,
        "nv": chart.nv,
        "du": chart.du,
        "dv": chart.dv,
        "periodic_u": chart.periodic_u,
        "periodic_v": chart.periodic_v,
        "values": [[float(c) for c in q]
                   for q in chart.values.reshape(-1, 4)],
    }
    if chart.u0 or chart.v0:
        doc["u0"], doc["v0"] = chart.u0, chart.v0
    if chart.name:
        doc["name"] = chart.name
    if not chart.mask.all():
        doc["mask"] = [bool(b) for b in chart.mask.reshape(-1)]
    return doc


def save_surface_json(chart: SurfaceChart, path: str) -> None:
    atomic_write_text(path, canonical_json(surface_to_dict(chart)))


def surface_from_dict(doc: dict) -> SurfaceChart:
    """Rebuild a chart from the surface JSON document."""
    if not isinstance(doc, dict) or doc.get("type") != "grid":
        raise InputError("surface JSON must be an object with type 'grid'")
    try:
        nu, nv = int(doc["nu"]), int(doc["nv"])
        du, dv = float(doc["du"]), float(doc["dv"])
        per_u, per_v = bool(doc["periodic_u"]), bool(doc["periodic_v"])
        raw = doc["values"]
    except KeyError as exc:
        raise InputError(f"surface JSON missing key {exc}") from exc
    values = np.asarray(raw, dtype=float)
    if values.shape != (nu * nv, 4):
        raise InputError(
            f"values has shape {values.shape}, expected ({nu * nv}, 4)")
    mask = None
    if "mask" in doc:
        mask = np.asarray(doc["mask"], dtype=bool)
        if mask.shape != (nu * nv,):
            raise InputError("mask length does not match the grid")
        mask = mask.reshape(nu, nv)
    return SurfaceChart(
        values=values.reshape(nu, nv, 4), du=du, dv=dv,
        periodic_u=per_u, periodic_v=per_v,
        u0=float(doc.get("u0", 0.0)), v0=float(doc.get("v0", 0.0)),
        name=str(doc.get("name", "")), mask=mask)


def load_surface_json(path: str) -> SurfaceChart:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return surface_from_dict(doc)


def save_report_json(report: dict, path: str) -> None:
    atomic_write_text(path, canonical_json(report))


# -- OBJ ----------------------------------------------------------------------


def surface_to_obj(chart: SurfaceChart,
                   components: tuple[int, int, int] = (0, 1, 2)) -> str:
    """Quad mesh of the chart grid as OBJ text.

    Three of the four coordinates become vertex positions (the first
    three by default); the remaining one rides along as a comment line
    before each vertex.  Faces that touch masked samples are dropped;
    a chart with a masked majority is refused.
    """
    if sorted(set(components)) != sorted(components) or len(components) != 3 \
            or any(c not in (0, 1, 2, 3) for c in components):
        raise InputError(
            f"components must be three distinct indices in 0..3, "
            f"got {components}")
    mask = chart.mask
    if mask.sum() * 2 < mask.size:
        raise InputError("majority of samples masked; refusing to export")
    extra = [c for c in range(4) if c not in components][0]
    nu, nv = chart.nu, chart.nv
    lines = [f"# quad mesh {nu}x{nv}"
             f" periodic_u={chart.periodic_u} periodic_v={chart.periodic_v}",
             f"# vertex positions from components {tuple(components)};"
             f" component {extra} in the preceding comment"]
    vals = chart.values
    for i in range(nu):
        for j in range(nv):
            q = vals[i, j]
            lines.append(f"# c{extra} {_fmt(q[extra])}")
            lines.append(f"v {_fmt(q[components[0]])} {_fmt(q[components[1]])}"
                         f" {_fmt(q[components[2]])}")
    nu_faces = nu if chart.periodic_u else nu - 1
    nv_faces = nv if chart.periodic_v else nv - 1

    def vid(i: int, j: int) -> int:
        return (i % nu) * nv + (j % nv) + 1

    for i in range(nu_faces):
        for j in range(nv_faces):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if all(mask[a % nu, b % nv] for a, b in corners):
                lines.append("f " + " ".join(
                    str(vid(a, b)) for a, b in corners))
    return "\n".join(lines) + "\n"


def save_surface_obj(chart: SurfaceChart, path: str,
                     components: tuple[int, int, int] = (0, 1, 2)) -> None:
    atomic_write_text(path, surface_to_obj(chart, components))


def obj_euler_characteristic(text: str) -> int:
    """V - E + F of an OBJ quad mesh (edges counted once)."""
    v = f = 0
    edges = set()
    for line in text.splitlines():
        if line.startswith("v "):
            v += 1
        elif line.startswith("f "):
            f += 1
            ids = [int(t) for t in line.split()[1:]]
            for a, b in zip(ids, ids[1:] + ids[:1]):
                edges.add((min(a, b), max(a, b)))
    return v - len(edges) + f


# -- CSV ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def surface_to_csv(source: SurfaceChart | SurfaceGeometry) -> str:
    """Per-sample frame fields as CSV with a stable header.

    Columns: grid indices and coordinates, validity, the immersion, both
    unit normals, the quaternionic mean curvature, the conformal speed,
    and the curvature quantities.  Invalid samples keep their row with
    ``valid=0`` and empty field cells, so row count and order never
    depend on the mask.
    """
    geom = source if isinstance(source, SurfaceGeometry) \
        else SurfaceGeometry(source, strict=False)
    ch = geom.chart
    uu, vv = ch.meshgrid()
    n, r = geom.normal_left, geom.normal_right
    h = geom.mean_h
    curv = geom.curvature_fields
    rows = []
    for i in range(ch.nu):
        for j in range(ch.nv):
            base = [str(i), str(j), _fmt(uu[i, j]), _fmt(vv[i, j])]
            if geom.mask[i, j]:
                q = ch.values[i, j]
                rows.append(base + ["1"]
                            + [_fmt(c) for c in q]
                            + [_fmt(c) for c in n[i, j, 1:]]
                            + [_fmt(c) for c in r[i, j, 1:]]
                            + [_fmt(c) for c in h[i, j]]
                            + [_fmt(geom.lam[i, j]),
                               _fmt(curv["gauss"][i, j]),
                               _fmt(curv["normal"][i, j]),
                               _fmt(curv["density_a"][i, j]),
                               _fmt(curv["density_q"][i, j])])
            else:
                rows.append(base + ["0"] + [""] * (len(_CSV_FIELDS) - 5))
    out = [",".join(_CSV_FIELDS)]
    out.extend(",".join(row) for row in rows)
    return "\n".join(out) + "\n"


def save_surface_csv(source: SurfaceChart | SurfaceGeometry,
                     path: str) -> None:
    atomic_write_text(path, surface_to_csv(source))


_LIFT_FIELDS = ("iu", "iv", "u", "v", "valid",
                "psi1_re", "psi1_im", "psi2_re", "psi2_im",
                "psi3_re", "psi3_im", "psi4_re", "psi4_im")


def lift_to_csv(chart: SurfaceChart, c4: np.ndarray,
                mask: np.ndarray) -> str:
    """A projective-space curve as CSV: eight reals per sample (the real
    and imaginary parts of the four complex homogeneous coordinates),
    with the same row/validity conventions as :func:`surface_to_csv`."""
    c4 = np.asarray(c4)
    if c4.shape != (chart.nu, chart.nv, 4):
        raise InputError(
            f"lift shape {c4.shape} does not match the {chart.nu}x{chart.nv} grid")
    uu, vv = chart.meshgrid()
    rows = []
    for i in range(chart.nu):
        for j in range(chart.nv):
            base = [str(i), str(j), _fmt(uu[i, j]), _fmt(vv[i, j])]
            if mask[i, j]:
                vals = []
                for k in range(4):
                    vals.append(_fmt(c4[i, j, k].real))
                    vals.append(_fmt(c4[i, j, k].imag))
                rows.append(base + ["1"] + vals)
            else:
                rows.append(base + ["0"] + [""] * 8)
    out = [",".join(_LIFT_FIELDS)]
    out.extend(",".join(row) for row in rows)
    return "\n".join(out) + "\n"
