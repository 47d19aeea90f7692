"""2x2 quaternionic linear algebra on H^2.

H^2 is a *right* quaternionic vector space of column vectors; matrices act
from the left, so matrix algebra composes in the usual order despite the
noncommutative entries.  The trace pairing used throughout is

    <M> = (1/8) * (real trace of M acting on H^2 as an R^8 map)
        = (1/2) * Re(m11 + m22),

which is symmetric: <AB> = <BA>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InconsistencyError, SingularityError
from .quaternion import Quaternion, ZERO

_PIVOT_REL_TOL = 1e-12  # pivot-vs-scale ratio below which elimination fails


@dataclass(frozen=True)
class QVec2:
    """Column vector in H^2."""

    a: Quaternion
    b: Quaternion

    def __add__(self, other: "QVec2") -> "QVec2":
        return QVec2(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "QVec2") -> "QVec2":
        return QVec2(self.a - other.a, self.b - other.b)

    def scale(self, q: Quaternion) -> "QVec2":
        """Right scalar action v * q."""
        return QVec2(self.a * q, self.b * q)

    def norm(self) -> float:
        return float(np.hypot(self.a.norm(), self.b.norm()))


@dataclass(frozen=True)
class QMat2:
    """2x2 matrix over H, entries row-major."""

    a11: Quaternion
    a12: Quaternion
    a21: Quaternion
    a22: Quaternion

    @staticmethod
    def identity() -> "QMat2":
        one = Quaternion.from_real(1.0)
        return QMat2(one, ZERO, ZERO, one)

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Quaternion]]) -> "QMat2":
        (a, b), (c, d) = rows
        return QMat2(a, b, c, d)

    def entries(self) -> tuple[Quaternion, Quaternion, Quaternion, Quaternion]:
        return self.a11, self.a12, self.a21, self.a22

    def __add__(self, other: "QMat2") -> "QMat2":
        return QMat2(self.a11 + other.a11, self.a12 + other.a12,
                     self.a21 + other.a21, self.a22 + other.a22)

    def __sub__(self, other: "QMat2") -> "QMat2":
        return QMat2(self.a11 - other.a11, self.a12 - other.a12,
                     self.a21 - other.a21, self.a22 - other.a22)

    def __neg__(self) -> "QMat2":
        return QMat2(-self.a11, -self.a12, -self.a21, -self.a22)

    def __matmul__(self, other):
        if isinstance(other, QVec2):
            return QVec2(self.a11 * other.a + self.a12 * other.b,
                         self.a21 * other.a + self.a22 * other.b)
        return QMat2(self.a11 * other.a11 + self.a12 * other.a21,
                     self.a11 * other.a12 + self.a12 * other.a22,
                     self.a21 * other.a11 + self.a22 * other.a21,
                     self.a21 * other.a12 + self.a22 * other.a22)

    def scale(self, t: float) -> "QMat2":
        s = Quaternion.from_real(t)
        return QMat2(s * self.a11, s * self.a12, s * self.a21, s * self.a22)

    def conj_transpose(self) -> "QMat2":
        return QMat2(self.a11.conj(), self.a21.conj(),
                     self.a12.conj(), self.a22.conj())

    def max_norm(self) -> float:
        return max(e.norm() for e in self.entries())

    def frobenius(self) -> float:
        return float(np.sqrt(sum(e.norm_sq() for e in self.entries())))

    def isclose(self, other: "QMat2", tol: float) -> bool:
        return (self - other).max_norm() <= tol

    def inverse(self) -> "QMat2":
        return m2_inverse(self)


def m2_inverse(m: QMat2) -> QMat2:
    """Invert a 2x2 quaternionic matrix by Gaussian elimination.

    Row elimination with the largest-norm pivot in each column; a pivot of
    norm below 1e-12 * (largest entry norm) raises
    :class:`~quatsurf.errors.SingularityError` reporting the pivot magnitude.
    Row operations act by left multiplication, which preserves solutions of
    M X = I over the right H-module.
    """
    scale = m.max_norm()
    if scale == 0.0:
        raise SingularityError("cannot invert the zero matrix (pivot 0)")
    rows = [[m.a11, m.a12, Quaternion.from_real(1.0), ZERO],
            [m.a21, m.a22, ZERO, Quaternion.from_real(1.0)]]
    if rows[1][0].norm() > rows[0][0].norm():
        rows.reverse()
    pivot = rows[0][0]
    if pivot.norm() < _PIVOT_REL_TOL * scale:
        raise SingularityError(
            f"matrix is singular: first pivot norm {pivot.norm():.3e} "
            f"below {_PIVOT_REL_TOL:g} * scale ({scale:.3e})")
    inv = pivot.inverse()
    rows[0] = [inv * e for e in rows[0]]
    factor = rows[1][0]
    rows[1] = [rows[1][k] - factor * rows[0][k] for k in range(4)]
    pivot2 = rows[1][1]
    if pivot2.norm() < _PIVOT_REL_TOL * scale:
        raise SingularityError(
            f"matrix is singular: second pivot norm {pivot2.norm():.3e} "
            f"below {_PIVOT_REL_TOL:g} * scale ({scale:.3e})")
    inv2 = pivot2.inverse()
    rows[1] = [inv2 * e for e in rows[1]]
    factor = rows[0][1]
    rows[0] = [rows[0][k] - factor * rows[1][k] for k in range(4)]
    return QMat2(rows[0][2], rows[0][3], rows[1][2], rows[1][3])


def trace_pair(a: QMat2, b: QMat2 | None = None) -> float:
    """<AB> = (1/2) Re((AB)_11 + (AB)_22); with one argument, <A>.

    This is 1/8 of the trace of the real 8x8 matrix of AB acting on H^2 and
    is symmetric in (A, B).
    """
    if b is not None:
        a = a @ b
    return 0.5 * (a.a11.real + a.a22.real)


def adjoint_wrt(form: QMat2, m: QMat2) -> QMat2:
    """Adjoint M* = F^-1 M^dagger F with respect to a Hermitian form F.

    F must be Hermitian (F^dagger = F) and nondegenerate; a degenerate form
    raises :class:`~quatsurf.errors.DomainError`.  For the standard pairing
    F = [[0,1],[1,0]] this gives [[a,b],[c,d]]* = [[conj(d), conj(b)],
    [conj(c), conj(a)]].
    """
    if (form - form.conj_transpose()).max_norm() > 1e-12 * max(form.max_norm(), 1.0):
        raise DomainError("adjoint requires a Hermitian form")
    try:
        finv = m2_inverse(form)
    except SingularityError as exc:
        raise DomainError(f"adjoint requires a nondegenerate form: {exc}") from exc
    return finv @ m.conj_transpose() @ form


def plane_normals(u1: Quaternion, u2: Quaternion, *, oriented: bool = True,
                  tol: float = 1e-12) -> tuple[Quaternion, Quaternion]:
    """Normals (N, R) of the oriented 2-plane span_R(u1, u2) through 0 in H.

    The plane is {x : N x R = x} equivalently {x : Nx + xR = 0}; N and R are
    unit imaginary with N*u1*R = u1, and the orientation induced by
    (u1, N*u1) matches that of (u1, u2).  Swapping the arguments flips both
    normals.  With ``oriented=False`` the sign pair is canonicalized (first
    nonzero component of N made positive) so either input order gives the
    same representative.

    Raises :class:`~quatsurf.errors.SingularityError` when u1 is zero or u1,
    u2 are R-linearly dependent (|Im(u1^-1 u2)| below tol * |u1^-1 u2|).
    """
    if u1.norm() == 0.0:
        raise SingularityError("plane is degenerate: u1 = 0")
    ratio = u1.inverse() * u2
    im = ratio.imag
    if im.norm() <= tol * max(ratio.norm(), 1e-300):
        raise SingularityError(
            "plane is degenerate: u1, u2 are linearly dependent "
            f"(|Im(u1^-1 u2)| = {im.norm():.3e})")
    a = im.normalized()
    n = u1 * a * u1.inverse()
    r = -a
    if not oriented:
        comps = n.to_array()
        idx = int(np.argmax(np.abs(comps)))
        if comps[idx] < 0.0:
            n, r = -n, -r
    return n, r


def left_mult_matrix(q: Quaternion) -> np.ndarray:
    """Real 4x4 matrix of p -> q*p on components (w, x, y, z)."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])


def right_mult_matrix(q: Quaternion) -> np.ndarray:
    """Real 4x4 matrix of p -> p*q on components (w, x, y, z)."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array([
        [w, -x, -y, -z],
        [x, w, z, -y],
        [y, -z, w, x],
        [z, y, -x, w],
    ])


@dataclass(frozen=True)
class SylvesterSolution:
    """Solution of the two-sided equation N x + x R = H."""

    particular: Quaternion
    kernel: tuple[Quaternion, ...]
    residual: float
    rank: int


def solve_sylvester(n: Quaternion, r: Quaternion, h: Quaternion,
                    *, tol: float = 1e-8) -> SylvesterSolution:
    """Solve the quaternionic Sylvester equation N x + x R = H.

    Realifies to a 4x4 system, solves by least squares, and extracts the
    null space (the plane {x : N x R = x} when N, R are unit imaginary) from
    the SVD.  If the least-squares residual exceeds ``tol * max(|H|, 1)``
    the system is inconsistent and :class:`~quatsurf.errors.InconsistencyError`
    is raised with the residual.
    """
    m4 = left_mult_matrix(n) + right_mult_matrix(r)
    rhs = h.to_array()
    x, _, rank, _ = np.linalg.lstsq(m4, rhs, rcond=None)
    residual = float(np.linalg.norm(m4 @ x - rhs))
    if residual > tol * max(h.norm(), 1.0):
        raise InconsistencyError(
            f"N x + x R = H has no solution: least-squares residual "
            f"{residual:.6e} exceeds {tol:g} * max(|H|, 1)")
    _, sing, vt = np.linalg.svd(m4)
    scale = sing[0] if sing[0] > 0 else 1.0
    kernel = tuple(Quaternion.from_array(vt[k])
                   for k in range(4) if sing[k] <= 1e-10 * scale)
    return SylvesterSolution(Quaternion.from_array(x), kernel, residual,
                             int(rank))
