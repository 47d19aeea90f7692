"""Sampled conformal surface charts and their 2-jets.

A chart is a rectangular grid of quaternion values f(u_i, v_j) on
u_i = u0 + i du, v_j = v0 + j dv, row-major in u, together with periodicity
flags.  The conformal structure is the standard one of the (u, v) plane: the
90-degree rotation J maps d/du to d/dv, and conformality of f means
|f_u| = |f_v| and <f_u, f_v> = 0 at every sample.

Charts optionally carry an analytic jet provider (vectorized closures for
f and its derivatives through second order); without one, jets come from
second-order finite differences of the value grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import qarray as qa
from .errors import InputError
from .quaternion import Quaternion

# An analytic jet provider maps meshgrid arrays (U, V) of shape (nu, nv) to
# a dict with keys f, fu, fv, fuu, fuv, fvv of shape (nu, nv, 4).
JetProvider = Callable[[np.ndarray, np.ndarray], dict[str, np.ndarray]]

JET_KEYS = ("f", "fu", "fv", "fuu", "fuv", "fvv")


@dataclass
class SurfaceChart:
    """A conformally parameterized surface patch sampled on a grid."""

    values: np.ndarray
    du: float
    dv: float
    periodic_u: bool = False
    periodic_v: bool = False
    u0: float = 0.0
    v0: float = 0.0
    name: str = ""
    analytic_jets: JetProvider | None = None
    mask: np.ndarray | None = None
    conformal_tol: float | None = None
    immersion_floor_rel: float = 1e-9
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[-1] != 4:
            raise InputError(
                f"chart values must have shape (nu, nv, 4), got {self.values.shape}")
        if self.du <= 0 or self.dv <= 0:
            raise InputError("grid spacings must be positive")
        if not np.all(np.isfinite(self.values)):
            raise InputError("chart values contain non-finite entries")
        # one-sided second-derivative stencils need 4 samples; periodic
        # wrap-around needs 3 distinct ones
        min_u = 4 if not self.periodic_u else 3
        min_v = 4 if not self.periodic_v else 3
        if self.nu < min_u or self.nv < min_v:
            raise InputError(
                f"grid {self.nu}x{self.nv} too small for finite differences")
        if self.mask is None:
            self.mask = np.ones(self.values.shape[:2], dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.values.shape[:2]:
                raise InputError("mask shape must match the grid")

    @property
    def nu(self) -> int:
        return self.values.shape[0]

    @property
    def nv(self) -> int:
        return self.values.shape[1]

    @property
    def closed(self) -> bool:
        return self.periodic_u and self.periodic_v

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.u0 + self.du * np.arange(self.nu),
                self.v0 + self.dv * np.arange(self.nv))

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        u, v = self.axes()
        return np.meshgrid(u, v, indexing="ij")

    def spacing(self) -> float:
        return max(self.du, self.dv)

    def value_at(self, iu: int, iv: int) -> Quaternion:
        return Quaternion.from_array(self.values[iu, iv])


@dataclass(frozen=True)
class Jet2:
    """Second-order jet of the immersion at one sample."""

    u: float
    v: float
    f: Quaternion
    fu: Quaternion
    fv: Quaternion
    fuu: Quaternion
    fuv: Quaternion
    fvv: Quaternion

    def mixed_partial_defect(self) -> float:
        """|fuv - fvu| is zero by construction; kept as the symmetry scale
        reference for provider-supplied jets (always 0 for FD jets, where a
        single symmetric cross stencil is used)."""
        return 0.0


def fd_jet_fields(chart: SurfaceChart) -> dict[str, np.ndarray]:
    """Second-order finite-difference jets of the value grid."""
    f = chart.values
    du, dv = chart.du, chart.dv
    pu, pv = chart.periodic_u, chart.periodic_v
    fu = qa.deriv(f, du, 0, pu)
    fv = qa.deriv(f, dv, 1, pv)
    return {
        "f": f,
        "fu": fu,
        "fv": fv,
        "fuu": qa.deriv2(f, du, 0, pu),
        "fvv": qa.deriv2(f, dv, 1, pv),
        # differentiating fu along v keeps the cross stencil symmetric
        "fuv": qa.deriv(fu, dv, 1, pv),
    }


def jet_fields(chart: SurfaceChart, source: str = "auto"
               ) -> tuple[dict[str, np.ndarray], str]:
    """Evaluate jets on the whole grid; returns (fields, provenance).

    ``source``: "auto" uses the analytic provider when the chart has one,
    "analytic" requires it, "fd" forces finite differences of the samples.
    """
    if source not in ("auto", "analytic", "fd"):
        raise InputError(f"unknown jet source {source!r}")
    if source == "analytic" and chart.analytic_jets is None:
        raise InputError("chart has no analytic jet provider")
    if source != "fd" and chart.analytic_jets is not None:
        uu, vv = chart.meshgrid()
        fields = chart.analytic_jets(uu, vv)
        missing = [k for k in JET_KEYS if k not in fields]
        if missing:
            raise InputError(f"jet provider omitted {missing}")
        return {k: np.asarray(fields[k], dtype=float) for k in JET_KEYS}, "analytic"
    return fd_jet_fields(chart), "fd"


def jet_at(chart: SurfaceChart, iu: int, iv: int,
           source: str = "auto") -> Jet2:
    """The 2-jet at one grid sample (computed from the full field)."""
    if not (0 <= iu < chart.nu and 0 <= iv < chart.nv):
        raise InputError(
            f"sample ({iu}, {iv}) outside grid {chart.nu}x{chart.nv}")
    fields, _ = jet_fields(chart, source)
    u, v = chart.axes()
    return Jet2(u=float(u[iu]), v=float(v[iv]),
                **{k: Quaternion.from_array(fields[k][iu, iv])
                   for k in JET_KEYS})


def conjugate_chart(chart: SurfaceChart) -> SurfaceChart:
    """The chart of conj(f), which swaps the two normals.

    Conjugation preserves conformality for the same domain J, and since the
    normals are imaginary, conj(fv)conj(fu)^-1 = conj(fu^-1 fv) = R: the
    conjugated chart has left normal R and right normal N.  Analytic jets
    are conjugated entrywise.
    """
    provider = None
    if chart.analytic_jets is not None:
        inner = chart.analytic_jets

        def provider(uu: np.ndarray, vv: np.ndarray) -> dict[str, np.ndarray]:
            return {k: qa.qconj(np.asarray(v, dtype=float))
                    for k, v in inner(uu, vv).items()}

    return SurfaceChart(
        values=qa.qconj(chart.values), du=chart.du, dv=chart.dv,
        periodic_u=chart.periodic_u, periodic_v=chart.periodic_v,
        u0=chart.u0, v0=chart.v0,
        name=f"conj({chart.name})" if chart.name else "conjugate",
        analytic_jets=provider, mask=chart.mask.copy(),
        conformal_tol=chart.conformal_tol,
        immersion_floor_rel=chart.immersion_floor_rel,
        params=dict(chart.params))


def jet_mask(chart: SurfaceChart, provenance: str) -> np.ndarray:
    """Validity mask of the jet fields.

    FD jets on a closed chart use centered stencils (reach 2 including the
    nested cross derivative); open boundaries fall back to one-sided
    stencils that reach 3 samples inward.
    """
    if provenance == "analytic":
        return chart.mask.copy()
    reach = 2 if chart.closed else 3
    return qa.stencil_valid(chart.mask, chart.periodic_u, chart.periodic_v,
                            reach=reach)
