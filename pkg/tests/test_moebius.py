"""Projective-line points, Moebius action, and round 2-spheres."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from quatsurf import (HPoint, I, J, K, ONE, QMat2, Quaternion, Sphere2, ZERO,
                      induced_metric, m2_inverse, moebius_apply,
                      plane_normals, sphere_contains, sphere_encode)
from quatsurf.errors import (DomainError, InconsistencyError,
                             SingularityError)
from quatsurf.moebius import INFINITY, qmat_from_array, qmat_to_array

finite = st.floats(min_value=-10.0, max_value=10.0,
                   allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)
matrices = st.builds(QMat2, quaternions, quaternions,
                     quaternions, quaternions)


def _invertible(m: QMat2) -> bool:
    try:
        m2_inverse(m)
    except SingularityError:
        return False
    return True


def test_hpoint_basics():
    p = HPoint.finite(I)
    assert not p.is_infinity
    assert p.value == I
    assert INFINITY.is_infinity
    assert HPoint.infinity() == INFINITY
    assert repr(INFINITY) == "HPoint(inf)"
    assert "HPoint(" in repr(p)


def test_moebius_identity_and_translation():
    p = HPoint(Quaternion(1.0, 2.0, 3.0, 4.0))
    assert moebius_apply(QMat2.identity(), p).value.isclose(p.value)
    assert moebius_apply(QMat2.identity(), INFINITY).is_infinity
    shift = QMat2(ONE, J, ZERO, ONE)
    assert moebius_apply(shift, p).value.isclose(p.value + J)
    assert moebius_apply(shift, INFINITY).is_infinity


def test_moebius_special_points():
    # x -> x^-1 up to the quaternionic twist: g = [[0, 1], [1, 0]].
    flip = QMat2(ZERO, ONE, ONE, ZERO)
    assert moebius_apply(flip, HPoint(ZERO)).is_infinity
    assert moebius_apply(flip, INFINITY).value.isclose(ZERO)
    q = Quaternion(0.5, -1.0, 2.0, 0.25)
    assert moebius_apply(flip, HPoint(q)).value.isclose(q.inverse())
    # infinity -> a c^-1 for a generic matrix.
    g = QMat2(I, ONE, J, K)
    assert moebius_apply(g, INFINITY).value.isclose(I * J.inverse())
    # the zero locus of (c x + d) maps to infinity: x = -c^-1 d.
    pole = HPoint(-(J.inverse() * K))
    assert moebius_apply(g, pole).is_infinity


@settings(max_examples=200, deadline=None)
@given(matrices, matrices, quaternions)
def test_moebius_is_a_left_action(g, h, x):
    assume(_invertible(g) and _invertible(h))
    p = HPoint(x)
    once = moebius_apply(g @ h, p)
    twice = moebius_apply(g, moebius_apply(h, p))
    if once.is_infinity or twice.is_infinity:
        assert once.is_infinity == twice.is_infinity
        return
    scale = max(once.value.norm(), twice.value.norm(), 1.0)
    # the two routes share denominators up to conditioning; allow slack
    # proportional to the point size.
    assert (once.value - twice.value).norm() <= 1e-6 * scale


def test_sphere_matrix_validation():
    Sphere2(QMat2(I, ZERO, ZERO, -I))     # S^2 = -I holds
    with pytest.raises(InconsistencyError):
        Sphere2(QMat2(I, ONE, ZERO, I))   # S^2 picks up 2i off-diagonal
    with pytest.raises(InconsistencyError):
        Sphere2(QMat2.identity())


def test_sphere_encode_validation():
    sphere = sphere_encode(I, J)
    assert sphere.matrix.a11 == I
    assert sphere.matrix.a22 == -J
    with pytest.raises(DomainError):
        sphere_encode(Quaternion(0.0, 2.0, 0.0, 0.0), J)   # N^2 != -1
    with pytest.raises(DomainError):
        sphere_encode(I, Quaternion(0.5, 0.5, 0.0, 0.0))   # R^2 != -1
    with pytest.raises(DomainError):
        sphere_encode(I, J, K)                             # R H != H N


def test_plane_sphere_membership():
    # With H = 0 the fixed set is the plane {x : N x + x R = 0} plus
    # infinity; plane_normals reconstructs (N, R) from two spanning points.
    u1 = Quaternion(1.0, 0.5, -0.25, 2.0)
    u2 = Quaternion(-0.5, 1.5, 0.75, 0.125)
    n, r = plane_normals(u1, u2)
    sphere = sphere_encode(n, r)
    for x in (u1, u2, u1 + u2, u1 * 2.0 - u2 * 0.5):
        incident, residual = sphere_contains(sphere, HPoint(x))
        assert incident, f"plane member rejected with residual {residual}"
    assert sphere.contains(INFINITY)
    # The plane is the +1 eigenspace of x -> N x R; pushing along the -1
    # eigenspace component of a generic vector leaves it.
    transverse = (ONE - n * ONE * r) * 0.5
    assert transverse.norm() > 1e-6
    off = u1 + transverse
    incident, residual = sphere_contains(sphere, HPoint(off))
    assert not incident
    assert residual == pytest.approx(2.0 * transverse.norm(), rel=1e-9)


def test_sphere_through_origin_with_mean_curvature():
    # Nonzero H keeps the origin incident (the lower-left entry only
    # multiplies p from the left) but expels infinity.
    sphere = sphere_encode(I, I, I)  # R H = H N holds trivially
    assert sphere.contains(HPoint(ZERO))
    assert not sphere.contains(INFINITY)


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_moebius_covariance_of_spheres(g):
    assume(_invertible(g))
    ginv = m2_inverse(g)
    assume(g.max_norm() * ginv.max_norm() < 1e3)  # keep conditioning sane
    u1 = Quaternion(1.0, 0.5, -0.25, 2.0)
    u2 = Quaternion(-0.5, 1.5, 0.75, 0.125)
    n, r = plane_normals(u1, u2)
    sphere = sphere_encode(n, r)
    moved = Sphere2((g @ sphere.matrix) @ ginv)
    for x in (u1, u2, u1 + u2):
        image = moebius_apply(g, HPoint(x))
        incident, residual = sphere_contains(moved, image, tol=1e-6)
        assert incident, f"Moebius image left the moved sphere: {residual}"


def test_induced_metric_fubini_study():
    v = Quaternion(1.0, -2.0, 0.5, 0.25)
    w = Quaternion(0.5, 1.0, -1.0, 2.0)
    at_origin = induced_metric(HPoint(ZERO), v, w)
    assert at_origin == pytest.approx(v.dot(w))
    at_unit = induced_metric(HPoint(I), v, w)
    assert at_unit == pytest.approx(v.dot(w) / 4.0)
    # symmetry and bilinearity in the first slot
    assert induced_metric(HPoint(I), w, v) == pytest.approx(at_unit)
    assert induced_metric(HPoint(I), v * 2.0, w) == pytest.approx(2 * at_unit)
    with pytest.raises(DomainError):
        induced_metric(INFINITY, v, w)


def test_induced_metric_hyperbolic():
    v = Quaternion(1.0, -2.0, 0.5, 0.25)
    w = Quaternion(0.5, 1.0, -1.0, 2.0)
    p = HPoint(Quaternion(1.0, 3.0, 0.0, 0.0))
    assert induced_metric(p, v, w, "hyperbolic") == pytest.approx(
        v.dot(w) / 4.0)
    with pytest.raises(DomainError):
        induced_metric(HPoint(I), v, w, "hyperbolic")  # boundary Re p = 0
    with pytest.raises(DomainError):
        induced_metric(p, v, w, "no-such-model")


def test_qmat_array_round_trip():
    rng = np.random.default_rng(11)
    arr = rng.standard_normal((2, 2, 4))
    m = qmat_from_array(arr)
    assert np.allclose(qmat_to_array(m), arr)
    assert m.a21 == Quaternion.from_array(arr[1, 0])
