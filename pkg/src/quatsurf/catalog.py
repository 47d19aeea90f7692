"""Built-in conformally parameterized surface charts.

Each family produces a :class:`~quatsurf.chart.SurfaceChart` whose samples
(and, where closed forms exist, whose analytic 2-jets) satisfy the
conformality contract by construction:

* ``plane`` — a flat patch in the imaginary units i, j;
* ``sphere`` — a round sphere of radius r through inverse stereographic
  coordinates (covers everything but one pole as the patch grows);
* ``catenoid`` — the minimal catenoid, periodic in the angular direction;
* ``enneper`` — the Enneper minimal surface from its polynomial
  parameterization;
* ``complex-graph`` — the graph of a holomorphic polynomial g over the
  complex axis span{1, i}, embedded as u + v i + j g(u + i v); these are the
  super-conformal test surfaces (the right normal is the constant -i);
* ``clifford-torus`` — the stereographic image of the square torus
  (cos u, sin u, cos v, sin v)/sqrt(2), doubly periodic, in Im H;
* ``circular-cylinder`` — a round cylinder over an arclength circle,
  extruded along the real axis (not Willmore: constant elastica defect);
* ``elastica-cylinder`` — a cylinder over a free elastic curve obtained by
  integrating kappa'' = -kappa^3/2 + kappa tau^2, (kappa^2 tau)' = 0 with a
  high-order ODE solver and reconstructing the curve by frame integration
  (Willmore by construction; finite-difference jets);
* ``json-file`` — a chart loaded from a surface JSON file (lossless
  round-trip with the exporter).

Angles are radians; periodic directions sample [lo, hi) with
h = (hi - lo)/n, open directions sample [lo, hi] with h = (hi - lo)/(n-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .chart import SurfaceChart
from .errors import InputError

Bounds = tuple[float, float, float, float]


@dataclass(frozen=True)
class CatalogSpec:
    """A catalog request: family name, family parameters, resolution, and
    patch bounds (u_lo, u_hi, v_lo, v_hi); ``None`` fields use the family
    defaults."""

    family: str
    params: dict = field(default_factory=dict)
    nu: int | None = None
    nv: int | None = None
    bounds: Bounds | None = None


@dataclass(frozen=True)
class _FamilyDefaults:
    nu: int
    nv: int
    bounds: Bounds
    periodic_u: bool = False
    periodic_v: bool = False


_TWO_PI = 2.0 * np.pi

_DEFAULTS: dict[str, _FamilyDefaults] = {
    "plane": _FamilyDefaults(32, 32, (-1.0, 1.0, -1.0, 1.0)),
    "sphere": _FamilyDefaults(64, 64, (-6.0, 6.0, -6.0, 6.0)),
    "catenoid": _FamilyDefaults(64, 64, (0.0, _TWO_PI, -1.2, 1.2),
                                periodic_u=True),
    "enneper": _FamilyDefaults(48, 48, (-1.0, 1.0, -1.0, 1.0)),
    "complex-graph": _FamilyDefaults(48, 48, (-1.0, 1.0, -1.0, 1.0)),
    "clifford-torus": _FamilyDefaults(64, 64, (0.0, _TWO_PI, 0.0, _TWO_PI),
                                      periodic_u=True, periodic_v=True),
    "circular-cylinder": _FamilyDefaults(256, 16, (0.0, _TWO_PI, 0.0, 1.0),
                                         periodic_u=True),
    "elastica-cylinder": _FamilyDefaults(192, 24, (0.0, 4.0, 0.0, 1.0)),
    "json-file": _FamilyDefaults(0, 0, (0.0, 0.0, 0.0, 0.0)),
}

FAMILIES = tuple(_DEFAULTS)

_KNOWN_PARAMS: dict[str, frozenset[str]] = {
    "plane": frozenset(),
    "sphere": frozenset({"radius"}),
    "catenoid": frozenset(),
    "enneper": frozenset(),
    "complex-graph": frozenset({"coefficients"}),
    "clifford-torus": frozenset(),
    "circular-cylinder": frozenset({"radius"}),
    "elastica-cylinder": frozenset({"kappa0", "kappa_prime0", "j0"}),
    "json-file": frozenset({"path"}),
}


def _vec(real, x, y, z, shape) -> np.ndarray:
    """Stack scalar/array components into a (..., 4) quaternion field."""
    out = np.empty(shape + (4,))
    for c, comp in enumerate((real, x, y, z)):
        out[..., c] = comp
    return out


def _steps(bounds: Bounds, nu: int, nv: int,
           periodic_u: bool, periodic_v: bool) -> tuple[float, float]:
    u_lo, u_hi, v_lo, v_hi = bounds
    if u_hi <= u_lo or v_hi <= v_lo:
        raise InputError(f"degenerate patch bounds {bounds}")
    du = (u_hi - u_lo) / (nu if periodic_u else nu - 1)
    dv = (v_hi - v_lo) / (nv if periodic_v else nv - 1)
    return du, dv


# -- analytic families --------------------------------------------------------


def _plane_jets(uu, vv):
    shape = np.broadcast(uu, vv).shape
    zero = np.zeros(shape)
    return {
        "f": _vec(zero, uu, vv, zero, shape),
        "fu": _vec(zero, np.ones(shape), zero, zero, shape),
        "fv": _vec(zero, zero, np.ones(shape), zero, shape),
        "fuu": _vec(zero, zero, zero, zero, shape),
        "fuv": _vec(zero, zero, zero, zero, shape),
        "fvv": _vec(zero, zero, zero, zero, shape),
    }


def _sphere_jets_factory(radius: float):
    def jets(uu, vv):
        shape = np.broadcast(uu, vv).shape
        zero = np.zeros(shape)
        r = radius
        g = 1.0 / (1.0 + uu ** 2 + vv ** 2)
        g2, g3 = g * g, g * g * g
        gu, gv = -2.0 * uu * g2, -2.0 * vv * g2
        guu = -2.0 * g2 + 8.0 * uu ** 2 * g3
        gvv = -2.0 * g2 + 8.0 * vv ** 2 * g3
        guv = 8.0 * uu * vv * g3
        return {
            "f": _vec(zero, 2 * r * vv * g, 2 * r * uu * g,
                      r * (1.0 - 2.0 * g), shape),
            "fu": _vec(zero, 2 * r * vv * gu, 2 * r * (g + uu * gu),
                       -2 * r * gu, shape),
            "fv": _vec(zero, 2 * r * (g + vv * gv), 2 * r * uu * gv,
                       -2 * r * gv, shape),
            "fuu": _vec(zero, 2 * r * vv * guu, 2 * r * (2 * gu + uu * guu),
                        -2 * r * guu, shape),
            "fuv": _vec(zero, 2 * r * (gu + vv * guv),
                        2 * r * (gv + uu * guv), -2 * r * guv, shape),
            "fvv": _vec(zero, 2 * r * (2 * gv + vv * gvv),
                        2 * r * uu * gvv, -2 * r * gvv, shape),
        }
    return jets


def _catenoid_jets(uu, vv):
    shape = np.broadcast(uu, vv).shape
    zero = np.zeros(shape)
    one = np.ones(shape)
    cu, su = np.cos(uu) * one, np.sin(uu) * one
    ch, sh = np.cosh(vv) * one, np.sinh(vv) * one
    return {
        "f": _vec(zero, ch * cu, ch * su, vv * one, shape),
        "fu": _vec(zero, -ch * su, ch * cu, zero, shape),
        "fv": _vec(zero, sh * cu, sh * su, one, shape),
        "fuu": _vec(zero, -ch * cu, -ch * su, zero, shape),
        "fuv": _vec(zero, -sh * su, sh * cu, zero, shape),
        "fvv": _vec(zero, ch * cu, ch * su, zero, shape),
    }


def _enneper_jets(uu, vv):
    shape = np.broadcast(uu, vv).shape
    zero = np.zeros(shape)
    u, v = uu, vv
    return {
        "f": _vec(zero, u - u ** 3 / 3 + u * v ** 2,
                  -v + v ** 3 / 3 - u ** 2 * v, u ** 2 - v ** 2, shape),
        "fu": _vec(zero, 1 - u ** 2 + v ** 2, -2 * u * v, 2 * u, shape),
        "fv": _vec(zero, 2 * u * v, -1 + v ** 2 - u ** 2, -2 * v, shape),
        "fuu": _vec(zero, -2 * u, -2 * v, 2 * np.ones(shape), shape),
        "fuv": _vec(zero, 2 * v, -2 * u, zero, shape),
        "fvv": _vec(zero, 2 * u, 2 * v, -2 * np.ones(shape), shape),
    }


def _complex_pair(c1: np.ndarray, c2: np.ndarray, shape) -> np.ndarray:
    """Embed (c1, c2) in C x C as the quaternion c1 + j c2."""
    return _vec(c1.real, c1.imag, c2.real, -c2.imag, shape)


def _graph_jets_factory(coefficients: np.ndarray):
    g_poly = np.polynomial.Polynomial(coefficients)
    gp = g_poly.deriv()
    gpp = gp.deriv()

    def jets(uu, vv):
        shape = np.broadcast(uu, vv).shape
        z = uu + 1j * vv
        zero = np.zeros(shape, dtype=complex)
        one = np.ones(shape, dtype=complex)
        g, g1, g2 = g_poly(z), gp(z), gpp(z)
        return {
            "f": _complex_pair(z, g, shape),
            "fu": _complex_pair(one, g1, shape),
            "fv": _complex_pair(1j * one, 1j * g1, shape),
            "fuu": _complex_pair(zero, g2, shape),
            "fuv": _complex_pair(zero, 1j * g2, shape),
            "fvv": _complex_pair(zero, -g2, shape),
        }
    return jets


def _clifford_jets(uu, vv):
    shape = np.broadcast(uu, vv).shape
    zero = np.zeros(shape)
    one = np.ones(shape)
    cu, su = np.cos(uu) * one, np.sin(uu) * one
    cv, sv = np.cos(vv) * one, np.sin(vv) * one
    s = 1.0 / (np.sqrt(2.0) - sv)
    s_v = cv * s * s
    s_vv = -sv * s * s + 2.0 * cv * cv * s ** 3
    return {
        "f": _vec(zero, cu * s, su * s, cv * s, shape),
        "fu": _vec(zero, -su * s, cu * s, zero, shape),
        "fv": _vec(zero, cu * s_v, su * s_v, -sv * s + cv * s_v, shape),
        "fuu": _vec(zero, -cu * s, -su * s, zero, shape),
        "fuv": _vec(zero, -su * s_v, cu * s_v, zero, shape),
        "fvv": _vec(zero, cu * s_vv, su * s_vv,
                    -cv * s - 2.0 * sv * s_v + cv * s_vv, shape),
    }


def _circular_cylinder_jets_factory(radius: float):
    def jets(uu, vv):
        shape = np.broadcast(uu, vv).shape
        zero = np.zeros(shape)
        one = np.ones(shape)
        phase = uu / radius
        c, s = np.cos(phase) * one, np.sin(phase) * one
        return {
            "f": _vec(vv * one, radius * c, radius * s, zero, shape),
            "fu": _vec(zero, -s, c, zero, shape),
            "fv": _vec(one, zero, zero, zero, shape),
            "fuu": _vec(zero, -c / radius, -s / radius, zero, shape),
            "fuv": _vec(zero, zero, zero, zero, shape),
            "fvv": _vec(zero, zero, zero, zero, shape),
        }
    return jets


# -- elastica cylinder --------------------------------------------------------


def solve_free_elastica(kappa0: float, kappa_prime0: float, j0: float,
                        length: float):
    """Integrate the free-elastica curvature ODE and reconstruct the curve.

    The system is kappa'' = -kappa^3/2 + kappa tau^2 with the conserved
    angular momentum tau = j0/kappa^2 (tau = 0 throughout when j0 = 0,
    allowing signed kappa through inflections), coupled to the frame
    equations T' = kappa N, N' = -kappa T + tau B, B' = -tau N and
    gamma' = T.  Returns the dense solution object of ``solve_ivp``; state
    layout: [kappa, kappa', gamma(3), T(3), N(3), B(3)].
    """
    if j0 != 0.0 and kappa0 == 0.0:
        raise InputError("kappa0 must be nonzero when j0 is nonzero")

    def rhs(_s, y):
        kappa, kappa_p = y[0], y[1]
        tau = j0 / kappa ** 2 if j0 != 0.0 else 0.0
        t, n, b = y[5:8], y[8:11], y[11:14]
        dy = np.empty(14)
        dy[0] = kappa_p
        dy[1] = -0.5 * kappa ** 3 + kappa * tau ** 2
        dy[2:5] = t
        dy[5:8] = kappa * n
        dy[8:11] = -kappa * t + tau * b
        dy[11:14] = -tau * n
        return dy

    y0 = np.zeros(14)
    y0[0], y0[1] = kappa0, kappa_prime0
    y0[5], y0[9], y0[13] = 1.0, 1.0, 1.0  # T=i, N=j, B=k
    sol = solve_ivp(rhs, (0.0, length), y0, method="DOP853",
                    rtol=1e-12, atol=1e-13, dense_output=True)
    if not sol.success:
        raise InputError(f"elastica integration failed: {sol.message}")
    return sol


def _build_elastica_chart(params: dict, nu: int, nv: int,
                          bounds: Bounds) -> SurfaceChart:
    kappa0 = float(params.get("kappa0", 2.0))
    kappa_prime0 = float(params.get("kappa_prime0", 0.0))
    j0 = float(params.get("j0", 0.0))
    u_lo, u_hi, v_lo, v_hi = bounds
    if u_lo != 0.0:
        raise InputError("elastica arclength patch must start at u=0")
    sol = solve_free_elastica(kappa0, kappa_prime0, j0, u_hi)
    du = (u_hi - u_lo) / (nu - 1)
    dv = (v_hi - v_lo) / (nv - 1)
    s_grid = u_lo + du * np.arange(nu)
    state = sol.sol(s_grid)  # (14, nu)
    kappa = state[0]
    tau = j0 / kappa ** 2 if j0 != 0.0 else np.zeros(nu)
    gamma = state[2:5]  # (3, nu)
    v_grid = v_lo + dv * np.arange(nv)
    values = np.zeros((nu, nv, 4))
    values[:, :, 0] = v_grid[None, :]
    values[:, :, 1:] = gamma.T[:, None, :]
    return SurfaceChart(
        values=values, du=du, dv=dv, u0=u_lo, v0=v_lo,
        name="elastica-cylinder",
        params={"kappa0": kappa0, "kappa_prime0": kappa_prime0, "j0": j0,
                "kappa": kappa, "tau": tau, "ds": du})


# -- dispatch -----------------------------------------------------------------


def catalog_build(spec: CatalogSpec) -> SurfaceChart:
    """Build the chart described by ``spec`` (see the module docstring)."""
    family = spec.family
    if family not in _DEFAULTS:
        raise InputError(
            f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    unknown = set(spec.params) - _KNOWN_PARAMS[family]
    if unknown:
        known = sorted(_KNOWN_PARAMS[family]) or ["(none)"]
        raise InputError(
            f"family {family!r} does not take parameter(s) "
            f"{', '.join(sorted(unknown))}; it accepts {', '.join(known)}")

    if family == "json-file":
        path = spec.params.get("path")
        if not path:
            raise InputError("json-file family needs params={'path': ...}")
        from .serialization import load_surface_json
        return load_surface_json(path)

    defaults = _DEFAULTS[family]
    nu = defaults.nu if spec.nu is None else int(spec.nu)
    nv = defaults.nv if spec.nv is None else int(spec.nv)
    bounds = defaults.bounds if spec.bounds is None else tuple(spec.bounds)
    if family == "circular-cylinder" and spec.bounds is None:
        # arclength period of the cross-section circle
        radius = float(spec.params.get("radius", 1.0))
        bounds = (0.0, _TWO_PI * radius, bounds[2], bounds[3])
    if nu < 3 or nv < 3:
        raise InputError(f"resolution {nu}x{nv} too small")
    du, dv = _steps(bounds, nu, nv, defaults.periodic_u, defaults.periodic_v)

    if family == "elastica-cylinder":
        return _build_elastica_chart(spec.params, nu, nv, bounds)

    params = dict(spec.params)
    if family == "plane":
        provider = _plane_jets
    elif family == "sphere":
        radius = float(params.setdefault("radius", 1.0))
        if radius <= 0:
            raise InputError("sphere radius must be positive")
        provider = _sphere_jets_factory(radius)
    elif family == "catenoid":
        provider = _catenoid_jets
    elif family == "enneper":
        provider = _enneper_jets
    elif family == "complex-graph":
        coeffs = params.setdefault("coefficients", [[0, 0], [0, 0], [1, 0]])
        arr = np.asarray(coeffs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise InputError(
                "complex-graph coefficients must be a list of [re, im] pairs")
        provider = _graph_jets_factory(arr[:, 0] + 1j * arr[:, 1])
    elif family == "clifford-torus":
        provider = _clifford_jets
    elif family == "circular-cylinder":
        radius = float(params.setdefault("radius", 1.0))
        if radius <= 0:
            raise InputError("cylinder radius must be positive")
        provider = _circular_cylinder_jets_factory(radius)
    else:  # pragma: no cover - registry and dispatch kept in sync
        raise InputError(f"unhandled family {family!r}")

    u = bounds[0] + du * np.arange(nu)
    v = bounds[2] + dv * np.arange(nv)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    values = provider(uu, vv)["f"]
    return SurfaceChart(
        values=values, du=du, dv=dv,
        periodic_u=defaults.periodic_u, periodic_v=defaults.periodic_v,
        u0=bounds[0], v0=bounds[2], name=family,
        analytic_jets=provider, params=params)


def build(family: str, nu: int | None = None, nv: int | None = None,
          bounds: Bounds | None = None, **params) -> SurfaceChart:
    """Keyword-argument convenience wrapper around :func:`catalog_build`."""
    return catalog_build(CatalogSpec(family=family, params=params,
                                     nu=nu, nv=nv, bounds=bounds))
