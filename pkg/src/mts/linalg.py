"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. Tensor products follow the
first-factor-major convention of :func:`numpy.kron`: the pair ``(p, r)`` in
``C^n (x) C^n`` sits at composite index ``p * n + r``.

Eigenvalues and singular values come from cyclic Jacobi iterations written
here rather than LAPACK; the sweep kernels are compiled with numba.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

_EPS = np.finfo(float).eps


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NumericalError(ArithmeticError):
    """An iterative routine failed to converge."""

    def __init__(self, message: str, sweeps: int):
        super().__init__(f"{message} (after {sweeps} sweeps)")
        self.sweeps = sweeps


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every routine in the package.

    ``rank_rel_tol`` is relative to the largest singular value (or largest
    eigenvalue for PSD matrices), ``residual_abs_tol`` bounds Frobenius
    residuals of identities such as unitality, and the two ``eig_*`` fields
    control the Jacobi iterations.
    """

    rank_rel_tol: float = 1e-9
    residual_abs_tol: float = 1e-10
    eig_off_diag_tol: float = 1e-12
    eig_max_sweeps: int = 100

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_abs_tol", "eig_off_diag_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if int(self.eig_max_sweeps) < 1:
            raise ValueError("eig_max_sweeps must be >= 1")

    def as_dict(self) -> dict:
        return {
            "rank_rel_tol": self.rank_rel_tol,
            "residual_abs_tol": self.residual_abs_tol,
            "eig_off_diag_tol": self.eig_off_diag_tol,
            "eig_max_sweeps": int(self.eig_max_sweeps),
        }


DEFAULT_TOL = Tolerances()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def matrix_unit(i: int, j: int, n: int) -> np.ndarray:
    """The matrix unit ``e_ij`` in ``M_n`` (zero-based indices)."""
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def transpose(a) -> np.ndarray:
    """Plain transpose, no conjugation."""
    return as_matrix(a).T.copy()


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def schur_product(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"Schur product needs equal shapes, got {a.shape} and {b.shape}")
    return a * b


def partial_trace(m, n: int, side: Literal["first", "second"]) -> np.ndarray:
    """Trace out one factor of an operator on ``C^n (x) C^n``.

    ``side="first"`` removes the first tensor factor and returns the reduced
    operator on the second; ``side="second"`` does the opposite.
    """
    m = as_matrix(m)
    if m.shape != (n * n, n * n):
        raise ShapeError(f"expected a {n * n}x{n * n} matrix for n={n}, got {m.shape}")
    t = m.reshape(n, n, n, n)
    if side == "first":
        return np.einsum("prps->rs", t)
    if side == "second":
        return np.einsum("prqr->pq", t)
    raise ValueError(f"side must be 'first' or 'second', got {side!r}")


def vectorize(m) -> np.ndarray:
    """Row-major flattening into a column vector."""
    return as_matrix(m).reshape(-1, 1)


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


@numba.njit(cache=True)
def _rotation(alpha, beta, g):
    """Rotation ``J = [[c, s], [-s*d, c*d]]`` with ``J^H B J`` diagonal.

    ``B`` is the Hermitian block ``[[alpha, g], [conj(g), beta]]``.
    """
    h = abs(g)
    d = g.conjugate() / h
    theta = (beta - alpha) / (2.0 * h)
    if theta >= 0.0:
        t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c, d


@numba.njit(cache=True)
def _off_norm(a):
    total = 0.0
    size = a.shape[0]
    for i in range(size):
        for j in range(size):
            if i != j:
                total += a[i, j].real ** 2 + a[i, j].imag ** 2
    return math.sqrt(total)


@numba.njit(cache=True)
def _jacobi_hermitian(a, qt, target, skip, max_sweeps):
    """Cyclic-by-row sweeps on Hermitian ``a``; rows of ``qt`` collect ``Q^T``.

    Only rows are rotated; the matching columns are mirrored from them and
    the 2x2 pivot block is updated in closed form.
    """
    size = a.shape[0]
    sweeps = 0
    while _off_norm(a) > target:
        if sweeps >= max_sweeps:
            return -sweeps
        sweeps += 1
        for p in range(size - 1):
            for r in range(p + 1, size):
                g = a[p, r]
                h = abs(g)
                if h <= skip:
                    continue
                c, s, d = _rotation(a[p, p].real, a[r, r].real, g)
                t = s / c
                sd = s * d
                cd = c * d
                sdc = sd.conjugate()
                cdc = cd.conjugate()
                for k in range(size):
                    if k == p or k == r:
                        continue
                    apk = a[p, k]
                    ark = a[r, k]
                    a[p, k] = c * apk - sdc * ark
                    a[r, k] = s * apk + cdc * ark
                    a[k, p] = a[p, k].conjugate()
                    a[k, r] = a[r, k].conjugate()
                a[p, p] = a[p, p].real - t * h
                a[r, r] = a[r, r].real + t * h
                a[p, r] = 0.0
                a[r, p] = 0.0
                for k in range(size):
                    qp = qt[p, k]
                    qr = qt[r, k]
                    qt[p, k] = c * qp - sd * qr
                    qt[r, k] = s * qp + cd * qr
    return sweeps


@numba.njit(cache=True)
def _jacobi_one_sided(y, threshold, floor, max_sweeps):
    """Orthogonalize the rows of ``y`` in place; returns sweeps (< 0: failed).

    Pairs involving a row of squared norm ``<= floor`` are left alone, since
    rounding-level rows otherwise underflow ``alpha * beta`` and never settle.
    """
    rows, length = y.shape
    sweeps = 0
    while True:
        if sweeps >= max_sweeps:
            return -sweeps
        sweeps += 1
        rotated = False
        for p in range(rows - 1):
            for r in range(p + 1, rows):
                alpha = 0.0
                beta = 0.0
                g = 0j
                for k in range(length):
                    yp = y[p, k]
                    yr = y[r, k]
                    alpha += yp.real ** 2 + yp.imag ** 2
                    beta += yr.real ** 2 + yr.imag ** 2
                    g += yp.conjugate() * yr
                if alpha <= floor or beta <= floor:
                    continue
                if abs(g) <= threshold * math.sqrt(alpha * beta):
                    continue
                rotated = True
                c, s, d = _rotation(alpha, beta, g)
                sd = s * d
                cd = c * d
                for k in range(length):
                    yp = y[p, k]
                    yr = y[r, k]
                    y[p, k] = c * yp - sd * yr
                    y[r, k] = s * yp + cd * yr
        if not rotated:
            return sweeps


def hermitian_eig(m, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns
    -------
    eigenvalues : ndarray of float
        Sorted in descending order; ties keep their original diagonal order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors, so that
        ``m = Q diag(w) Q^H``.

    Raises
    ------
    ValueError
        If ``m`` is not square or not Hermitian within ``residual_abs_tol``.
    NumericalError
        If the off-diagonal mass does not drop below
        ``eig_off_diag_tol * ||m||_F`` within ``eig_max_sweeps`` sweeps.
    """
    a = as_matrix(m)
    size = a.shape[0]
    if a.shape[1] != size:
        raise ShapeError(f"hermitian_eig needs a square matrix, got {a.shape}")
    scale = float(np.linalg.norm(a))
    if np.linalg.norm(a - a.conj().T) > tol.residual_abs_tol * max(scale, 1.0):
        raise ValueError("matrix is not Hermitian within tolerance")
    a = np.ascontiguousarray(0.5 * (a + a.conj().T))
    qt = np.eye(size, dtype=np.complex128)
    sweeps = _jacobi_hermitian(
        a, qt, tol.eig_off_diag_tol * scale, _EPS * 1e-3 * scale, int(tol.eig_max_sweeps)
    )
    if sweeps < 0:
        raise NumericalError("Jacobi eigensolver did not converge", -sweeps)
    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return w[order], np.ascontiguousarray(qt[order].T)


def singular_values(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Singular values in descending order via one-sided Jacobi.

    The column rotations diagonalize ``m^H m`` implicitly, so small singular
    values are resolved to about ``eps * sigma_max`` instead of the
    ``sqrt(eps) * sigma_max`` one gets from eigenvalues of the explicit Gram
    matrix. Works on whichever of ``m`` and ``m^H`` has fewer columns.
    """
    x = as_matrix(m)
    if x.shape[1] > x.shape[0]:
        x = x.conj().T
    # rows of y are the columns being orthogonalized
    y = np.ascontiguousarray(x.T)
    floor = (_EPS * np.max(np.linalg.norm(y, axis=1), initial=0.0)) ** 2
    sweeps = _jacobi_one_sided(y, max(y.shape) * _EPS, floor, int(tol.eig_max_sweeps))
    if sweeps < 0:
        raise NumericalError("one-sided Jacobi did not converge", -sweeps)
    return np.sort(np.linalg.norm(y, axis=1))[::-1]


def rank(m, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_rel_tol * sigma_max``."""
    sv = singular_values(m, tol)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol.rank_rel_tol * sv[0]))


def fix_column_phases(vectors) -> np.ndarray:
    """Rotate each column so its first significant entry is real positive.

    "Significant" means above ``1e-8`` times the column's largest modulus, so
    rounding noise in leading entries does not decide the phase.
    """
    out = as_matrix(vectors).copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-8 * np.max(np.abs(col)))
        if big.size:
            z = col[big[0]]
            out[:, j] = col * (abs(z) / z)
    return out


def orthonormalize(columns, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column span by modified Gram-Schmidt.

    Each column is projected twice against the accepted basis. Columns whose
    residual norm falls below ``rank_rel_tol`` times the largest input column
    norm are dropped, so the result may have fewer columns than the input.
    """
    x = as_matrix(columns)
    cutoff = tol.rank_rel_tol * np.max(np.linalg.norm(x, axis=0))
    basis: list[np.ndarray] = []
    for j in range(x.shape[1]):
        v = x[:, j].copy()
        for _ in range(2):
            for b in basis:
                v -= np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > cutoff and norm > 0:
            basis.append(v / norm)
    if not basis:
        return np.zeros((x.shape[0], 0), dtype=np.complex128)
    return np.column_stack(basis)


def gell_mann_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of the traceless matrices in ``M_n``.

    Generalized Gell-Mann matrices scaled to unit Hilbert-Schmidt norm, in
    the order: symmetric ``(j, k)`` for ``j < k`` row-major, antisymmetric in
    the same order, then the ``n - 1`` diagonal ones.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    r2 = np.sqrt(0.5)
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    out = []
    for j, k in pairs:
        g = np.zeros((n, n), dtype=np.complex128)
        g[j, k] = g[k, j] = r2
        out.append(g)
    for j, k in pairs:
        g = np.zeros((n, n), dtype=np.complex128)
        g[j, k] = -1j * r2
        g[k, j] = 1j * r2
        out.append(g)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1.0
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(np.complex128))
    return out
