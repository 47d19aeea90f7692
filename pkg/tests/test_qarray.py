"""Vectorized quaternion kernels against the scalar layer, FD stencils."""

import numpy as np
import pytest

from quatsurf import Quaternion
from quatsurf import qarray as qa


def _batch(rng, shape=(5, 3)):
    return rng.standard_normal(shape + (4,))


def test_qmul_matches_scalar_product(rng):
    a, b = _batch(rng), _batch(rng)
    prod = qa.qmul(a, b)
    for idx in np.ndindex(a.shape[:-1]):
        expected = (Quaternion.from_array(a[idx])
                    * Quaternion.from_array(b[idx]))
        assert np.allclose(prod[idx], expected.to_array(), atol=1e-12)


def test_componentwise_helpers(rng):
    a = _batch(rng)
    assert np.allclose(qa.qconj(a)[..., 0], a[..., 0])
    assert np.allclose(qa.qconj(a)[..., 1:], -a[..., 1:])
    assert np.allclose(qa.qnormsq(a), np.sum(a * a, axis=-1))
    assert np.allclose(qa.qnorm(a) ** 2, qa.qnormsq(a))
    assert np.allclose(qa.qdot(a, a), qa.qnormsq(a))
    assert np.allclose(qa.qreal(a), a[..., 0])
    assert np.allclose(qa.qimag(a)[..., 0], 0.0)
    assert np.allclose(qa.qscale(2.0, a), 2.0 * a)
    one = qa.qfrom_real(np.ones((5, 3)))
    assert np.allclose(qa.qmul(one, a), a)


def test_qinv_right_and_left_inverse(rng):
    a = _batch(rng) + 0.5  # bounded away from zero
    inv = qa.qinv(a)
    one = qa.qfrom_real(np.ones(a.shape[:-1]))
    assert np.allclose(qa.qmul(a, inv), one, atol=1e-12)
    assert np.allclose(qa.qmul(inv, a), one, atol=1e-12)


def test_qunit_imag_projects_to_unit_sphere(rng):
    a = _batch(rng)
    u = qa.qunit_imag(a)
    assert np.allclose(u[..., 0], 0.0)
    assert np.allclose(qa.qnorm(u), 1.0, atol=1e-12)
    minus_one = -qa.qfrom_real(np.ones(a.shape[:-1]))
    assert np.allclose(qa.qmul(u, u), minus_one, atol=1e-12)


def test_qstack_orders_components():
    arr = qa.qstack(1.0, np.array([2.0, 20.0]), 3.0, 4.0)
    assert arr.shape == (2, 4)
    assert np.allclose(arr[0], [1.0, 2.0, 3.0, 4.0])
    assert np.allclose(arr[1], [1.0, 20.0, 3.0, 4.0])


def test_matrix_product_matches_blockwise(rng):
    a = rng.standard_normal((4, 2, 2, 4))
    b = rng.standard_normal((4, 2, 2, 4))
    prod = qa.mmul(a, b)
    for t in range(4):
        for i in range(2):
            for j in range(2):
                expected = sum(
                    (Quaternion.from_array(a[t, i, k])
                     * Quaternion.from_array(b[t, k, j])).to_array()
                    for k in range(2))
                assert np.allclose(prod[t, i, j], expected, atol=1e-12)


def test_matrix_vector_action(rng):
    a = rng.standard_normal((3, 2, 2, 4))
    v = rng.standard_normal((3, 2, 4))
    out = qa.mvec(a, v)
    for t in range(3):
        for i in range(2):
            expected = sum(
                (Quaternion.from_array(a[t, i, k])
                 * Quaternion.from_array(v[t, k])).to_array()
                for k in range(2))
            assert np.allclose(out[t, i], expected, atol=1e-12)


def test_midentity_is_neutral(rng):
    a = rng.standard_normal((2, 2, 2, 4))
    eye = qa.midentity((2,))
    assert np.allclose(qa.mmul(eye, a), a)
    assert np.allclose(qa.mmul(a, eye), a)


def test_mfrom_entries_layout(rng):
    e = rng.standard_normal((4, 4))
    m = qa.mfrom_entries(e[0], e[1], e[2], e[3])
    assert m.shape == (2, 2, 4)
    assert np.allclose(m[0, 0], e[0])
    assert np.allclose(m[0, 1], e[1])
    assert np.allclose(m[1, 0], e[2])
    assert np.allclose(m[1, 1], e[3])


def test_trace_pair_symmetry_and_value(rng):
    a = rng.standard_normal((2, 2, 4))
    b = rng.standard_normal((2, 2, 4))
    ab = qa.mmul(a, b)
    direct = 0.5 * (ab[0, 0, 0] + ab[1, 1, 0])
    assert np.isclose(qa.trace_pair_field(a, b), direct, atol=1e-12)
    assert np.isclose(qa.trace_pair_field(a, b),
                      qa.trace_pair_field(b, a), atol=1e-12)


@pytest.mark.parametrize("periodic", [False, True])
def test_deriv_is_second_order(periodic):
    defects = []
    for n in (32, 64, 128):
        if periodic:
            x = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            f, fp = np.sin(x), np.cos(x)
        else:
            x = np.linspace(0.0, 1.0, n)
            f, fp = np.exp(x), np.exp(x)
        h = x[1] - x[0]
        defects.append(np.abs(qa.deriv(f, h, 0, periodic) - fp).max())
    order = np.log2(defects[0] / defects[2]) / 2.0
    assert order >= 1.8, f"first-derivative order {order:.2f}"


@pytest.mark.parametrize("periodic", [False, True])
def test_deriv2_is_second_order(periodic):
    defects = []
    for n in (32, 64, 128):
        if periodic:
            x = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            f, fpp = np.sin(x), -np.sin(x)
        else:
            x = np.linspace(0.0, 1.0, n)
            f, fpp = np.exp(x), np.exp(x)
        h = x[1] - x[0]
        defects.append(np.abs(qa.deriv2(f, h, 0, periodic) - fpp).max())
    order = np.log2(defects[0] / defects[2]) / 2.0
    assert order >= 1.8, f"second-derivative order {order:.2f}"


def test_deriv_exact_on_quadratics():
    x = np.linspace(0.0, 1.0, 9)
    f = 3.0 * x * x - 2.0 * x + 1.0
    assert np.allclose(qa.deriv(f, x[1] - x[0], 0, False), 6.0 * x - 2.0,
                       atol=1e-12)


def test_deriv_needs_three_samples():
    with pytest.raises(ValueError):
        qa.deriv(np.zeros(2), 0.1, 0, False)
    with pytest.raises(ValueError):
        qa.deriv2(np.zeros(3), 0.1, 0, False)


def test_stencil_valid_shrinks_holes():
    mask = np.ones((7, 7), dtype=bool)
    mask[3, 3] = False
    ok = qa.stencil_valid(mask, False, False, reach=1)
    assert not ok[3, 3] and not ok[2, 3] and not ok[3, 4]
    assert ok[1, 1]
    ok2 = qa.stencil_valid(mask, False, False, reach=2)
    assert not ok2[1, 3] and not ok2[5, 3]
    assert ok2[0, 0]


def test_stencil_valid_wraps_only_when_periodic():
    mask = np.ones((6, 4), dtype=bool)
    mask[0, :] = False
    open_ok = qa.stencil_valid(mask, False, False, reach=1)
    wrap_ok = qa.stencil_valid(mask, True, False, reach=1)
    assert open_ok[5, 1], "open ends do not see across the boundary"
    assert not wrap_ok[5, 1], "periodic wrap sees the masked row"
