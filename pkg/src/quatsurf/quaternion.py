"""Scalar quaternion algebra.

Conventions
-----------
A quaternion is ``a = w + x*i + y*j + z*k`` with the Hamilton relations
``i*j = -j*i = k``, ``j*k = -k*j = i``, ``k*i = -i*k = j`` and
``i^2 = j^2 = k^2 = -1``.  The real inner product is
``<a, b> = Re(conj(a) * b)`` (the Euclidean dot product of the four
components) and the norm is the Euclidean norm, which is multiplicative:
``|a*b| = |a|*|b|``.

The complex field sits inside as span(1, i); every quaternion splits as
``a = z1 + z2 * j`` with ``z1, z2`` complex (see :func:`quatsurf.twistor.quat_to_c2`).

This module is the scalar (single-value) layer used by tests and the
point-wise public API; the grid engine uses the broadcast layer in
:mod:`quatsurf.qarray`, which follows the same conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError

_UNIT_TOL = 1e-9  # relative unit-norm tolerance for rotation/SU(2) inputs


@dataclass(frozen=True)
class Quaternion:
    """An element of the quaternion algebra H, components (w, x, y, z)."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_array(a) -> "Quaternion":
        w, x, y, z = (float(c) for c in a)
        return Quaternion(w, x, y, z)

    @staticmethod
    def from_real(t: float) -> "Quaternion":
        return Quaternion(float(t), 0.0, 0.0, 0.0)

    @staticmethod
    def from_complex(c: complex) -> "Quaternion":
        """Embed span(1, i): c = re + im*i."""
        return Quaternion(float(c.real), float(c.imag), 0.0, 0.0)

    @staticmethod
    def from_vector(v) -> "Quaternion":
        vx, vy, vz = (float(c) for c in v)
        return Quaternion(0.0, vx, vy, vz)

    # -- views ---------------------------------------------------------

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    @property
    def vector(self) -> np.ndarray:
        """The (x, y, z) components as a 3-vector."""
        return np.array([self.x, self.y, self.z], dtype=float)

    def to_complex_pair(self) -> tuple[complex, complex]:
        """Split a = z1 + z2*j with z1, z2 in span(1, i)."""
        return complex(self.w, self.x), complex(self.y, self.z)

    # -- algebra --------------------------------------------------------

    def __add__(self, other) -> "Quaternion":
        other = _coerce(other)
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other) -> "Quaternion":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Quaternion":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "Quaternion":
        b = _coerce(other)
        a = self
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __rmul__(self, other) -> "Quaternion":
        return _coerce(other) * self

    def __truediv__(self, other) -> "Quaternion":
        return self * _coerce(other).inverse()

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def inverse(self) -> "Quaternion":
        n2 = self.norm_sq()
        if n2 == 0.0:
            raise SingularityError("cannot invert the zero quaternion")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def dot(self, other: "Quaternion") -> float:
        """Real inner product <a, b> = Re(conj(a) b)."""
        o = _coerce(other)
        return self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise SingularityError("cannot normalize the zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def is_unit(self, tol: float = _UNIT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def is_imaginary(self, tol: float = 0.0) -> bool:
        return abs(self.w) <= tol

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return (self - _coerce(other)).norm() <= tol

    def __abs__(self) -> float:
        return self.norm()


def _coerce(value) -> Quaternion:
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float)):
        return Quaternion.from_real(value)
    if isinstance(value, complex):
        return Quaternion.from_complex(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as a quaternion")


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
ZERO = Quaternion(0.0, 0.0, 0.0, 0.0)


def dot_cross(a: Quaternion, b: Quaternion) -> tuple[float, np.ndarray]:
    """Return (<a, b>, Im(a) x Im(b)).

    For purely imaginary a, b these are the two halves of the product
    decomposition a*b = a x b - <a, b>.
    """
    d = a.dot(b)
    c = np.cross(a.vector, b.vector)
    return d, c


def rotation_matrix(mu: Quaternion, tol: float = _UNIT_TOL) -> np.ndarray:
    """3x3 matrix of v -> mu v mu^-1 restricted to span(i, j, k).

    ``mu`` must be a unit quaternion (within ``tol``); the result is a proper
    rotation (orthogonal, determinant +1), and mu, -mu give the same matrix.
    """
    if not mu.is_unit(tol):
        raise DomainError(
            f"rotation requires a unit quaternion; |mu| = {mu.norm():.12g}")
    cols = []
    inv = mu.conj()  # = mu^-1 for unit mu, exactly orthogonal this way
    for e in (I, J, K):
        cols.append((mu * e * inv).vector)
    return np.stack(cols, axis=1)


def su2_matrix(mu: Quaternion, tol: float = _UNIT_TOL) -> np.ndarray:
    """Complex 2x2 image of a unit quaternion under H = C + jC, basis (1, j).

    Writing mu = mu0 + mu1*j (mu0, mu1 in span(1, i)), left multiplication
    by mu in right-complex coordinates has matrix::

        [[ mu0,        -mu1      ],
         [ conj(mu1),  conj(mu0) ]]

    which is unitary with determinant |mu0|^2 + |mu1|^2 = 1, and the map is a
    group homomorphism onto SU(2): su2_matrix(a) @ su2_matrix(b) ==
    su2_matrix(a * b).
    """
    if not mu.is_unit(tol):
        raise DomainError(
            f"SU(2) image requires a unit quaternion; |mu| = {mu.norm():.12g}")
    mu0, mu1 = mu.to_complex_pair()
    return np.array([[mu0, -mu1], [mu1.conjugate(), mu0.conjugate()]],
                    dtype=complex)
