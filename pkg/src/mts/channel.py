"""Completely positive maps on ``M_n`` given by Kraus operators.

A :class:`KrausSet` ``{v_i}`` represents ``phi(A) = sum_i v_i^* A v_i``.
Note the placement of the adjoint: it is on the left. With this convention

* ``phi(I) = sum v_i^* v_i`` (so unitality is ``sum v_i^* v_i = I``), and
* ``tr phi(A) = tr(A sum v_i v_i^*)`` (trace preservation is
  ``sum v_i v_i^* = I``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    ShapeError,
    Tolerances,
    as_matrix,
    fix_column_phases,
    hermitian_eig,
    matrix_unit,
)


class ContractError(ValueError):
    """An input violates the precondition of an operation."""


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Ordered Kraus operators, stored as a read-only ``(k, n, n)`` array."""

    operators: np.ndarray = field(repr=False)

    def __post_init__(self):
        ops = np.array(self.operators, dtype=np.complex128)
        if ops.ndim != 3 or ops.shape[0] < 1 or ops.shape[1] != ops.shape[2] or ops.shape[1] < 1:
            raise ShapeError(f"Kraus operators must have shape (k, n, n), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise ValueError("Kraus operators have non-finite entries")
        if not np.any(ops):
            raise ValueError("at least one Kraus operator must be nonzero")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @classmethod
    def from_operators(cls, operators: Sequence, weights: Sequence[float] | None = None) -> "KrausSet":
        """Build from a list of matrices, absorbing weights as ``sqrt(w) * v``."""
        ops = np.array([as_matrix(v, "Kraus operator") for v in operators])
        if weights is not None:
            w = np.asarray(weights, dtype=float)
            if w.shape != (len(ops),) or np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be positive, finite and one per operator")
            ops = ops * np.sqrt(w)[:, None, None]
        return cls(ops)

    @property
    def n(self) -> int:
        return self.operators.shape[1]

    def __len__(self) -> int:
        return self.operators.shape[0]

    def __iter__(self):
        return iter(self.operators)

    def __repr__(self) -> str:
        return f"KrausSet(n={self.n}, k={len(self)})"


@dataclass(frozen=True)
class UcptReport:
    unital_residual: float
    trace_residual: float
    is_ucpt: bool
    kraus_count_reduced: int

    def as_dict(self) -> dict:
        return {
            "unital_residual": self.unital_residual,
            "trace_residual": self.trace_residual,
            "is_ucpt": self.is_ucpt,
            "kraus_count_reduced": self.kraus_count_reduced,
        }


@dataclass(frozen=True)
class DiagonalProfile:
    """Schur multiplier ``C`` with ``phi(A) = C o A`` (when one exists)."""

    c: np.ndarray = field(repr=False)
    residual: float
    is_diagonal: bool
    kraus_diagonal: bool


def _gram(ks: KrausSet) -> np.ndarray:
    flat = ks.operators.reshape(len(ks), -1)
    return flat.conj() @ flat.T


def reduce_to_independent(ks: KrausSet, tol: Tolerances = DEFAULT_TOL) -> KrausSet:
    """Equivalent Kraus set with linearly independent operators.

    Diagonalizes the Gram matrix ``G_ij = tr(v_i^* v_j)`` and recombines the
    operators along eigenvectors whose eigenvalue exceeds
    ``rank_rel_tol * max eigenvalue``. The unitary recombination leaves the map
    unchanged; the size of the result is ``r(phi)``.
    """
    w, q = hermitian_eig(_gram(ks), tol)
    keep = w > tol.rank_rel_tol * w[0]
    q = fix_column_phases(q[:, keep])
    # new operator m is sum_i q[i, m] v_i
    ops = np.einsum("im,ijk->mjk", q, ks.operators)
    return KrausSet(ops)


def kraus_rank(ks: KrausSet, tol: Tolerances = DEFAULT_TOL) -> int:
    w, _ = hermitian_eig(_gram(ks), tol)
    return int(np.count_nonzero(w > tol.rank_rel_tol * w[0]))


def validate_ucpt(ks: KrausSet, tol: Tolerances = DEFAULT_TOL) -> UcptReport:
    ops = ks.operators
    eye = np.eye(ks.n)
    unital = float(np.linalg.norm(np.einsum("kji,kjl->il", ops.conj(), ops) - eye))
    trace = float(np.linalg.norm(np.einsum("kij,klj->il", ops, ops.conj()) - eye))
    return UcptReport(
        unital_residual=unital,
        trace_residual=trace,
        is_ucpt=unital <= tol.residual_abs_tol and trace <= tol.residual_abs_tol,
        kraus_count_reduced=kraus_rank(ks, tol),
    )


def _check_square(ks: KrausSet, a, name: str) -> np.ndarray:
    a = as_matrix(a, name)
    if a.shape != (ks.n, ks.n):
        raise ShapeError(f"{name} must be {ks.n}x{ks.n}, got {a.shape}")
    return a


def apply(ks: KrausSet, a) -> np.ndarray:
    """``phi(a) = sum_i v_i^* a v_i``."""
    a = _check_square(ks, a, "a")
    ops = ks.operators
    return np.einsum("kji,jl,klm->im", ops.conj(), a, ops)


def apply_dual(ks: KrausSet, a) -> np.ndarray:
    """Hilbert-Schmidt dual ``a -> sum_i v_i a v_i^*``."""
    a = _check_square(ks, a, "a")
    ops = ks.operators
    return np.einsum("kij,jl,kml->im", ops, a, ops.conj())


def choi(ks: KrausSet) -> np.ndarray:
    """Density matrix ``sum_i |(v_i (x) I) xi><(v_i (x) I) xi|`` on ``C^n (x) C^n``.

    ``xi = n^{-1/2} sum_j e_j (x) e_j``. Since ``(v (x) I) xi`` is the row-major
    flattening of ``v`` divided by ``sqrt(n)``, this is ``(1/n) sum vec(v) vec(v)^*``.
    """
    flat = ks.operators.reshape(len(ks), -1)
    return flat.T @ flat.conj() / ks.n


def choi_from_action(ks: KrausSet) -> np.ndarray:
    """The same density matrix assembled block-wise from matrix units.

    Returns ``(1/n) sum_ij psi(e_ij) (x) e_ij`` where ``psi`` is the dual map
    ``A -> sum v_i A v_i^*``. With ``psi`` replaced by ``phi`` itself the two
    constructions only coincide for self-dual maps.
    """
    n = ks.n
    out = np.zeros((n * n, n * n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            out += np.kron(apply_dual(ks, matrix_unit(i, j, n)), matrix_unit(i, j, n))
    return out / n


def pairing(ks: KrausSet, a, b) -> complex:
    """Value of the state ``pi(phi)`` on ``a (x) b``: ``tr(phi(a) b^T) / n``."""
    b = _check_square(ks, b, "b")
    return complex(np.trace(apply(ks, a) @ b.T) / ks.n)


def diagonal_profile(ks: KrausSet, tol: Tolerances = DEFAULT_TOL) -> DiagonalProfile:
    """Detect whether ``phi`` acts as a Schur multiplier ``A -> C o A``.

    ``c[i, j]`` is read off ``phi(e_ij)`` and the residual is the largest
    Frobenius distance between ``phi(e_ij)`` and ``c[i, j] e_ij``. The verdict
    is cross-checked against the reduced Kraus operators all being diagonal;
    the two tests are equivalent for completely positive maps.
    """
    n = ks.n
    c = np.zeros((n, n), dtype=np.complex128)
    residual = 0.0
    for i in range(n):
        for j in range(n):
            image = apply(ks, matrix_unit(i, j, n))
            c[i, j] = image[i, j]
            image[i, j] = 0.0
            residual = max(residual, float(np.linalg.norm(image)))
    reduced = reduce_to_independent(ks, tol).operators
    off = reduced.copy()
    idx = np.arange(n)
    off[:, idx, idx] = 0.0
    kraus_diagonal = bool(np.linalg.norm(off, axis=(1, 2)).max() <= tol.residual_abs_tol)
    return DiagonalProfile(
        c=c,
        residual=residual,
        is_diagonal=residual <= tol.residual_abs_tol,
        kraus_diagonal=kraus_diagonal,
    )
