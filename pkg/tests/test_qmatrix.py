"""2x2 quaternionic linear algebra: inverses, adjoints, planes, Sylvester."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatsurf import (QMat2, QVec2, Quaternion, ZERO, adjoint_wrt,
                      m2_inverse, plane_normals, solve_sylvester, trace_pair)
from quatsurf.errors import (DomainError, InconsistencyError,
                             SingularityError)
from quatsurf.qmatrix import left_mult_matrix, right_mult_matrix

finite = st.floats(min_value=-10.0, max_value=10.0,
                   allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)
matrices = st.builds(QMat2, quaternions, quaternions,
                     quaternions, quaternions)


def _is_identity(m: QMat2, tol: float) -> bool:
    return m.isclose(QMat2.identity(), tol)


def test_matrix_vector_composition():
    rng = np.random.default_rng(5)
    a = QMat2(*(Quaternion.from_array(rng.standard_normal(4))
                for _ in range(4)))
    b = QMat2(*(Quaternion.from_array(rng.standard_normal(4))
                for _ in range(4)))
    v = QVec2(Quaternion.from_array(rng.standard_normal(4)),
              Quaternion.from_array(rng.standard_normal(4)))
    lhs = (a @ b) @ v
    rhs = a @ (b @ v)
    assert (lhs - rhs).norm() <= 1e-12 * max(lhs.norm(), 1.0)


def test_right_module_scaling_commutes_with_matrices():
    rng = np.random.default_rng(6)
    m = QMat2(*(Quaternion.from_array(rng.standard_normal(4))
                for _ in range(4)))
    v = QVec2(Quaternion.from_array(rng.standard_normal(4)),
              Quaternion.from_array(rng.standard_normal(4)))
    q = Quaternion.from_array(rng.standard_normal(4))
    lhs = (m @ v).scale(q)
    rhs = m @ v.scale(q)
    assert (lhs - rhs).norm() <= 1e-12 * max(lhs.norm(), 1.0)


@given(matrices)
@settings(max_examples=150)
def test_inverse_inverts_or_reports_singular(m):
    try:
        inv = m2_inverse(m)
    except SingularityError:
        return
    scale = max(m.max_norm() * inv.max_norm(), 1.0)
    assert _is_identity(m @ inv, 1e-9 * scale)
    assert _is_identity(inv @ m, 1e-9 * scale)


def test_inverse_rejects_rank_one():
    a = Quaternion(1.0, 2.0, -1.0, 0.5)
    b = Quaternion(0.0, 1.0, 1.0, -2.0)
    # rows (a, a*b) and (2a, 2a*b) are left-proportional: rank one
    m = QMat2(a, a * b, 2.0 * a, (2.0 * a) * b)
    with pytest.raises(SingularityError):
        m2_inverse(m)
    with pytest.raises(SingularityError):
        m2_inverse(QMat2(ZERO, ZERO, ZERO, ZERO))


def test_trace_pair_is_symmetric_and_real_part_based():
    rng = np.random.default_rng(9)
    a = QMat2(*(Quaternion.from_array(rng.standard_normal(4))
                for _ in range(4)))
    b = QMat2(*(Quaternion.from_array(rng.standard_normal(4))
                for _ in range(4)))
    assert np.isclose(trace_pair(a, b), trace_pair(b, a), atol=1e-12)
    prod = a @ b
    assert np.isclose(trace_pair(a, b),
                      0.5 * (prod.a11.real + prod.a22.real), atol=1e-12)
    assert np.isclose(trace_pair(QMat2.identity()), 1.0)


def test_adjoint_wrt_standard_form_swaps_diagonal():
    one = Quaternion.from_real(1.0)
    form = QMat2(ZERO, one, one, ZERO)
    rng = np.random.default_rng(13)
    m = QMat2(*(Quaternion.from_array(rng.standard_normal(4))
                for _ in range(4)))
    adj = adjoint_wrt(form, m)
    assert adj.a11.isclose(m.a22.conj(), tol=1e-12)
    assert adj.a22.isclose(m.a11.conj(), tol=1e-12)
    assert adj.a12.isclose(m.a12.conj(), tol=1e-12)
    assert adj.a21.isclose(m.a21.conj(), tol=1e-12)
    # involution
    back = adjoint_wrt(form, adj)
    assert (back - m).max_norm() <= 1e-12 * max(m.max_norm(), 1.0)


def test_adjoint_wrt_requires_hermitian_nondegenerate_form():
    one = Quaternion.from_real(1.0)
    m = QMat2.identity()
    with pytest.raises(DomainError):
        adjoint_wrt(QMat2(ZERO, one, -one, ZERO), m)  # anti-hermitian
    with pytest.raises(DomainError):
        adjoint_wrt(QMat2(one, one, one, one), m)  # degenerate


def test_left_right_multiplication_matrices():
    rng = np.random.default_rng(17)
    q = Quaternion.from_array(rng.standard_normal(4))
    p = Quaternion.from_array(rng.standard_normal(4))
    assert np.allclose(left_mult_matrix(q) @ p.to_array(),
                       (q * p).to_array(), atol=1e-12)
    assert np.allclose(right_mult_matrix(q) @ p.to_array(),
                       (p * q).to_array(), atol=1e-12)
    # left and right multiplications by different quaternions commute
    assert np.allclose(left_mult_matrix(q) @ right_mult_matrix(p),
                       right_mult_matrix(p) @ left_mult_matrix(q),
                       atol=1e-12)


def test_plane_normals_fix_the_plane():
    rng = np.random.default_rng(21)
    for _ in range(50):
        u1 = Quaternion.from_array(rng.standard_normal(4))
        u2 = Quaternion.from_array(rng.standard_normal(4))
        try:
            n, r = plane_normals(u1, u2)
        except SingularityError:
            continue
        for q in (n, r):
            assert abs(q.real) <= 1e-12
            assert abs(q.norm() - 1.0) <= 1e-12
        for x in (u1, u2):
            scale = max(x.norm(), 1.0)
            assert (n * x * r - x).norm() <= 1e-9 * scale, "N x R = x"
            assert (n * x + x * r).norm() <= 1e-9 * scale, "N x + x R = 0"


def test_plane_normals_orientation_and_canonicalization():
    n1, r1 = plane_normals(Quaternion.from_real(1.0), Quaternion(0, 1, 0, 0))
    n2, r2 = plane_normals(Quaternion(0, 1, 0, 0), Quaternion.from_real(1.0))
    assert n2.isclose(-n1) and r2.isclose(-r1), "swap flips orientation"
    m1 = plane_normals(Quaternion.from_real(1.0), Quaternion(0, 1, 0, 0),
                       oriented=False)
    m2 = plane_normals(Quaternion(0, 1, 0, 0), Quaternion.from_real(1.0),
                       oriented=False)
    assert m1[0].isclose(m2[0]) and m1[1].isclose(m2[1])


def test_plane_normals_degenerate_inputs():
    with pytest.raises(SingularityError):
        plane_normals(ZERO, Quaternion.from_real(1.0))
    with pytest.raises(SingularityError):
        plane_normals(Quaternion.from_real(1.0), Quaternion.from_real(2.0))


def test_sylvester_solution_and_kernel():
    rng = np.random.default_rng(23)
    for _ in range(25):
        u1 = Quaternion.from_array(rng.standard_normal(4))
        u2 = Quaternion.from_array(rng.standard_normal(4))
        try:
            n, r = plane_normals(u1, u2)
        except SingularityError:
            continue
        x_true = Quaternion.from_array(rng.standard_normal(4))
        h = n * x_true + x_true * r
        sol = solve_sylvester(n, r, h)
        resid = (n * sol.particular + sol.particular * r - h).norm()
        assert resid <= 1e-8 * max(h.norm(), 1.0)
        # the kernel is the plane {x : N x R = x}, rank 2
        assert sol.rank == 2
        assert len(sol.kernel) == 2
        for k in sol.kernel:
            assert (n * k + k * r).norm() <= 1e-9
            assert (n * k * r - k).norm() <= 1e-9


def test_sylvester_inconsistent_rhs_raises():
    # N = R = i makes Nx + xR land in span(i, 1)... choose h outside range
    n = Quaternion(0.0, 1.0, 0.0, 0.0)
    r = Quaternion(0.0, 1.0, 0.0, 0.0)
    # range of x -> ix + xi is span(i) + span(1)i... j-component unreachable
    with pytest.raises(InconsistencyError):
        solve_sylvester(n, r, Quaternion(0.0, 0.0, 1.0, 0.0))
