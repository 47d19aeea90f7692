"""One-form integration, the one- and two-step transforms, and duality."""

import numpy as np
import pytest

from quatsurf import (TransformResult, adjoint_field, hopf_exchange_defect,
                      integrate_one_form, one_step_backward, one_step_forward,
                      s3_duality_check, two_step_backward, two_step_forward,
                      two_step_roundtrip_defect)
from quatsurf.errors import DomainError, InputError
from quatsurf import qarray as qa

from conftest import get_chart, get_geometry


def _quaternion_grid(rng, shape):
    return rng.standard_normal(shape + (4,))


def test_integrate_exact_differential():
    chart = get_chart("plane")
    uu, vv = chart.meshgrid()
    rng = np.random.default_rng(2)
    q0, q1, q2 = (rng.standard_normal(4) for _ in range(3))
    # d(phi) for phi = q0 u + q1 v + q2 u v: bilinear, so the trapezoid
    # sweeps reproduce phi exactly
    phi = (q0 * uu[..., None] + q1 * vv[..., None]
           + q2 * (uu * vv)[..., None])
    omega_u = q0 + q2 * vv[..., None] + np.zeros_like(phi)
    omega_v = q1 + q2 * uu[..., None] + np.zeros_like(phi)
    bp = (3, 5)
    values, periods, defect, deviation = integrate_one_form(
        omega_u, omega_v, chart, basepoint=bp, constant=phi[bp])
    assert np.abs(values - phi).max() <= 1e-12
    assert periods == {}
    assert defect.max() <= 1e-12
    assert deviation.max() <= 1e-12
    # default constant: zero at the basepoint
    values0, *_ = integrate_one_form(omega_u, omega_v, chart, basepoint=bp)
    assert np.abs(values0[bp]).max() <= 1e-15


def test_integrate_periods_and_validation():
    chart = get_chart("clifford-torus")
    c = np.array([0.25, -1.0, 0.5, 2.0])
    omega_u = np.broadcast_to(c, (chart.nu, chart.nv, 4)).copy()
    omega_v = np.zeros_like(omega_u)
    _, periods, defect, _ = integrate_one_form(omega_u, omega_v, chart)
    length_u = chart.du * chart.nu
    assert set(periods) == {"u", "v"}
    assert np.allclose(periods["u"], length_u * c)
    assert np.abs(periods["v"]).max() <= 1e-15
    assert defect.max() <= 1e-12

    with pytest.raises(InputError):
        integrate_one_form(omega_u[:-1], omega_v, chart)
    with pytest.raises(InputError):
        integrate_one_form(omega_u, omega_v, chart, basepoint=(chart.nu, 0))


def test_forward_transform_of_willmore_cylinder(elastica_geometry):
    g = elastica_geometry
    fd = g.fd_tolerance()
    result = one_step_forward(g)
    assert isinstance(result, TransformResult)
    assert result.name == "backlund-forward"
    assert result.values.shape == g.jets["f"].shape
    assert result.closedness_defect <= fd
    assert result.periods == {}  # open chart: no holonomy entries
    d = result.diagnostics
    assert d["immersed_fraction"] == 1.0
    assert d["wedge_df_dg"] <= fd * d["wedge_scale"]
    # the new surface's left normal is -R of the source
    assert d["left_normal_vs_minus_r"] == pytest.approx(2.1929e-4, rel=1e-3)
    assert d["left_normal_vs_minus_r"] <= fd
    assert d["sweep_deviation"] <= fd
    # the integration constant shifts the whole grid
    shifted = one_step_forward(g, g0=np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.allclose(shifted.values - result.values, [1.0, 0, 0, 0])


def test_backward_transform_inverts_the_w_form(elastica_geometry):
    g = elastica_geometry
    fd = g.fd_tolerance()
    result = one_step_backward(g)
    assert result.name == "backlund-backward"
    d = result.diagnostics
    assert d["immersed_fraction"] == 1.0
    # the w-form of the transform is 2 df: the forward step of the result
    # recovers the source
    assert d["w_of_h_vs_2df"] == pytest.approx(9.3715e-3, rel=1e-3)
    assert d["w_of_h_vs_2df"] <= fd * d["w_scale"]
    assert result.closedness_defect <= fd


def test_forward_transform_of_sphere_degenerates(sphere_geometry):
    # w vanishes identically, so the transform is a constant point
    result = one_step_forward(sphere_geometry)
    assert result.closedness_defect <= 1e-12
    assert result.diagnostics["immersed_fraction"] == 0.0
    assert "left_normal_vs_minus_r" not in result.diagnostics
    assert np.abs(result.values).max() <= 1e-10


def test_two_step_forward_lands_in_the_kernel(elastica_geometry):
    result = two_step_forward(elastica_geometry)
    assert result.name == "backlund-two-forward"
    assert result.mask.all()
    d = result.diagnostics
    assert d["denominator_floor"] > 0.0
    assert d["kernel_residual"] <= 1e-12
    assert d["kernel_residual_cross"] <= 1e-12


def test_two_step_roundtrip(elastica_geometry):
    g = elastica_geometry
    defect = two_step_roundtrip_defect(g)
    assert defect == pytest.approx(8.2215e-3, rel=1e-3)
    assert defect <= 10.0 * g.fd_tolerance()
    back = two_step_backward(g)
    assert back.name == "backlund-two-backward"
    assert back.mask.all()


def test_hopf_exchange(elastica_geometry):
    g = elastica_geometry
    result = hopf_exchange_defect(g)
    assert result["samples"] > 1000
    assert result["max_rel"] == pytest.approx(1.0029e-2, rel=1e-3)
    assert result["max_rel"] <= 10.0 * g.fd_tolerance()


def test_adjoint_field_structure():
    rng = np.random.default_rng(8)
    s = rng.standard_normal((3, 5, 2, 2, 4))
    star = adjoint_field(s)
    # entry pattern: swap the diagonal, conjugate everything
    assert np.allclose(star[..., 0, 0, :], qa.qconj(s[..., 1, 1, :]))
    assert np.allclose(star[..., 1, 1, :], qa.qconj(s[..., 0, 0, :]))
    assert np.allclose(star[..., 0, 1, :], qa.qconj(s[..., 0, 1, :]))
    assert np.allclose(star[..., 1, 0, :], qa.qconj(s[..., 1, 0, :]))
    # involution and anti-homomorphism over the matrix product
    assert np.allclose(adjoint_field(star), s)
    t = rng.standard_normal((3, 5, 2, 2, 4))
    lhs = adjoint_field(qa.mmul(s, t))
    rhs = qa.mmul(adjoint_field(t), adjoint_field(s))
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_duality_on_the_clifford_torus(clifford_geometry):
    g = clifford_geometry
    report = s3_duality_check(g)
    fd = g.fd_tolerance()
    assert report.verdict == "dual-minimal"
    assert report.self_adjoint_max <= 1e-12
    assert report.reality_defect == pytest.approx(1.7025e-3, rel=1e-3)
    assert report.reality_defect <= fd
    assert report.dual_anti_adjoint_max == pytest.approx(1.8385e-2, rel=1e-3)
    assert report.dual_anti_adjoint_max <= 10.0 * fd
    assert report.fd_scale == pytest.approx(fd)
    assert report.metadata["s_scale"] > 0.0


def test_duality_degenerate_and_domain_guard(sphere_geometry):
    report = s3_duality_check(sphere_geometry)
    assert report.verdict == "degenerate-constant"
    assert report.self_adjoint_max <= 1e-12
    # the cylinder chart has a nonzero real component, so the hermitian
    # reality structure does not apply
    with pytest.raises(DomainError):
        s3_duality_check(get_geometry("circular-cylinder"))


def test_to_chart_drops_broken_periodicity():
    g = get_geometry("circular-cylinder")
    result = one_step_forward(g)
    assert "u" in result.periods
    assert np.linalg.norm(result.periods["u"]) > 0.1
    chart = result.to_chart(g.chart)
    assert g.chart.periodic_u and not chart.periodic_u
    assert chart.name == "backlund-forward"
    assert chart.du == g.chart.du and chart.u0 == g.chart.u0
