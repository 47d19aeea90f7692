"""Broadcast quaternion arithmetic on numpy arrays.

A quaternion field is an ndarray whose trailing axis has length 4, ordered
(w, x, y, z); all leading axes broadcast.  A 2x2 quaternion matrix field has
shape (..., 2, 2, 4) and column vectors (..., 2, 4).  Conventions match
:mod:`quatsurf.quaternion` (Hamilton product, <a,b> = Re(conj(a) b)).

All reductions go through ``np.sum``/``np.max``, whose pairwise accumulation
is deterministic for a fixed shape — reruns of a grid computation produce
bit-identical results, which the report writer relies on.
"""

from __future__ import annotations

import numpy as np

# -- scalar field ops -------------------------------------------------------


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def qnormsq(a: np.ndarray) -> np.ndarray:
    return np.sum(a * a, axis=-1)


def qnorm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(qnormsq(a))


def qinv(a: np.ndarray) -> np.ndarray:
    """Pointwise inverse; caller guards against zeros."""
    return qconj(a) / qnormsq(a)[..., None]


def qdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """<a, b> = Re(conj(a) b), the Euclidean 4-dot."""
    return np.sum(a * b, axis=-1)


def qreal(a: np.ndarray) -> np.ndarray:
    return a[..., 0]


def qimag(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[..., 0] = 0.0
    return out


def qscale(t, a: np.ndarray) -> np.ndarray:
    return np.asarray(t)[..., None] * a


def qfrom_real(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (4,))
    out[..., 0] = t
    return out


def qzeros(shape=()) -> np.ndarray:
    return np.zeros(tuple(shape) + (4,))


def qunit_imag(a: np.ndarray) -> np.ndarray:
    """Project to the nearest unit imaginary quaternion (drop Re, normalize)."""
    v = qimag(a)
    return v / qnorm(v)[..., None]


def qstack(w, x, y, z) -> np.ndarray:
    return np.stack(np.broadcast_arrays(w, x, y, z), axis=-1).astype(float)


# -- 2x2 quaternion matrices -------------------------------------------------
# shape (..., 2, 2, 4); vectors (..., 2, 4)


def mmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of 2x2 quaternion matrix fields."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    for i in range(2):
        for j in range(2):
            out[..., i, j, :] = (qmul(a[..., i, 0, :], b[..., 0, j, :])
                                 + qmul(a[..., i, 1, :], b[..., 1, j, :]))
    return out


def mvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix field to a 2-vector field (column convention)."""
    shape = np.broadcast_shapes(a[..., 0, :].shape, v.shape)
    out = np.empty(shape)
    for i in range(2):
        out[..., i, :] = (qmul(a[..., i, 0, :], v[..., 0, :])
                          + qmul(a[..., i, 1, :], v[..., 1, :]))
    return out


def mfrom_entries(a11, a12, a21, a22) -> np.ndarray:
    """Assemble (..., 2, 2, 4) from four quaternion fields."""
    a11, a12, a21, a22 = np.broadcast_arrays(a11, a12, a21, a22)
    return np.stack([np.stack([a11, a12], axis=-2),
                     np.stack([a21, a22], axis=-2)], axis=-3)


def mscale(t, a: np.ndarray) -> np.ndarray:
    return np.asarray(t)[..., None, None, None] * a


def midentity(shape=()) -> np.ndarray:
    out = np.zeros(tuple(shape) + (2, 2, 4))
    out[..., 0, 0, 0] = 1.0
    out[..., 1, 1, 0] = 1.0
    return out


def mnorm(a: np.ndarray) -> np.ndarray:
    """Entrywise Frobenius norm: sqrt(sum of squared components)."""
    return np.sqrt(np.sum(a * a, axis=(-1, -2, -3)))


def trace_pair_field(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """<AB> = (1/8) real trace of AB as a real 8x8 matrix
    = (1/2) Re((AB)_11 + (AB)_22), evaluated without forming AB."""
    d11 = qdot(qconj(a[..., 0, 0, :]), b[..., 0, 0, :]) \
        + qdot(qconj(a[..., 0, 1, :]), b[..., 1, 0, :])
    d22 = qdot(qconj(a[..., 1, 0, :]), b[..., 0, 1, :]) \
        + qdot(qconj(a[..., 1, 1, :]), b[..., 1, 1, :])
    return 0.5 * (d11 + d22)


# -- finite differences ------------------------------------------------------


def deriv(field: np.ndarray, h: float, axis: int, periodic: bool) -> np.ndarray:
    """Second-order first derivative of a sampled field along ``axis``.

    Central differences inside (wrapping when periodic); one-sided
    second-order stencils (-3 f0 + 4 f1 - f2) / 2h at open ends.
    """
    f = np.moveaxis(np.asarray(field, dtype=float), axis, 0)
    n = f.shape[0]
    if periodic:
        out = (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2.0 * h)
    else:
        if n < 3:
            raise ValueError("need at least 3 samples per open direction")
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def deriv2(field: np.ndarray, h: float, axis: int, periodic: bool) -> np.ndarray:
    """Second-order second derivative along ``axis`` (one-sided at open ends)."""
    f = np.moveaxis(np.asarray(field, dtype=float), axis, 0)
    n = f.shape[0]
    h2 = h * h
    if periodic:
        out = (np.roll(f, -1, axis=0) - 2.0 * f + np.roll(f, 1, axis=0)) / h2
    else:
        if n < 4:
            raise ValueError("need at least 4 samples per open direction")
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
        out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h2
    return np.moveaxis(out, 0, axis)


def stencil_valid(mask: np.ndarray, periodic_u: bool, periodic_v: bool,
                  reach: int = 2) -> np.ndarray:
    """Samples whose full FD stencil (radius ``reach``) touches only valid ones."""
    ok = mask.copy()
    for axis, periodic in ((0, periodic_u), (1, periodic_v)):
        acc = mask.copy()
        for shift in range(1, reach + 1):
            if periodic:
                acc &= np.roll(mask, shift, axis=axis)
                acc &= np.roll(mask, -shift, axis=axis)
            else:
                fwd = np.roll(mask, shift, axis=axis)
                bwd = np.roll(mask, -shift, axis=axis)
                # non-periodic roll wraps garbage; patch the wrapped strip
                if axis == 0:
                    fwd[:shift, :] = mask[:shift, :]
                    bwd[-shift:, :] = mask[-shift:, :]
                else:
                    fwd[:, :shift] = mask[:, :shift]
                    bwd[:, -shift:] = mask[:, -shift:]
                acc &= fwd & bwd
        ok &= acc
    return ok
