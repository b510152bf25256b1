"""Extremality certificates for UCPT maps and marginal tracial states.

Two independent tests are provided:

``ls_bi_independence``
    On a reduced Kraus set ``{v_i}``: the pairs ``(v_i v_j^*, v_j^* v_i)``
    must be linearly independent in ``M_n + M_n``.

``ps_support_test``
    On the state: the corner ``P (M_n (x) M_n) P`` cut down by the support
    projection ``P`` must meet ``traceless (x) traceless`` only in zero.

They are tied together by the Choi correspondence, see :func:`cross_validate`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .channel import ContractError, KrausSet, choi, kraus_rank, reduce_to_independent, validate_ucpt
from .linalg import DEFAULT_TOL, Tolerances, gell_mann_basis, rank, singular_values
from .state import MarginalState, marginal_state, support_projection, validate_marginal

PS_MAX_N = 5


@dataclass(frozen=True)
class ExtremalityCertificate:
    method: Literal["LS", "PS"]
    n: int
    k_or_r: int
    stacked_rows: int
    stacked_cols: int
    achieved_rank: int
    required_rank: int
    is_extremal: bool
    tolerance_used: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CrossValidation:
    ls: ExtremalityCertificate
    ps: ExtremalityCertificate

    @property
    def agree(self) -> bool:
        return self.ls.is_extremal == self.ps.is_extremal


def ls_stacked_matrix(ks: KrausSet) -> np.ndarray:
    """``2n^2 x k^2`` matrix; column ``i*k + j`` is ``[vec(v_i v_j^*); vec(v_j^* v_i)]``."""
    v = ks.operators
    k, n = len(ks), ks.n
    left = np.einsum("iab,jcb->ijac", v, v.conj()).reshape(k * k, n * n)
    right = np.einsum("jba,ibc->ijac", v.conj(), v).reshape(k * k, n * n)
    return np.hstack([left, right]).T


def ls_bi_independence(ks: KrausSet, tol: Tolerances = DEFAULT_TOL) -> ExtremalityCertificate:
    """Extremality of a reduced UCPT Kraus set by joint linear independence.

    Raises
    ------
    ContractError
        If ``ks`` is not UCPT or its operators are linearly dependent.
    """
    if not validate_ucpt(ks, tol).is_ucpt:
        raise ContractError("Kraus set is not UCPT within tolerance")
    k = len(ks)
    if kraus_rank(ks, tol) != k:
        raise ContractError("Kraus operators are linearly dependent; reduce first")
    m = ls_stacked_matrix(ks)
    achieved = rank(m, tol)
    return ExtremalityCertificate(
        method="LS",
        n=ks.n,
        k_or_r=k,
        stacked_rows=m.shape[0],
        stacked_cols=m.shape[1],
        achieved_rank=achieved,
        required_rank=k * k,
        is_extremal=achieved == k * k,
        tolerance_used=tol.rank_rel_tol,
    )


def _corner_vectors(basis: np.ndarray) -> np.ndarray:
    """Rows ``vec(|u_s><u_t|)`` for the orthonormal columns ``u`` of ``basis``."""
    r = basis.shape[1]
    outer = np.einsum("as,bt->stab", basis, basis.conj())
    return outer.reshape(r * r, -1)


def traceless_product_vectors(n: int) -> np.ndarray:
    """Rows ``vec(F_a (x) F_b)`` over the Gell-Mann basis; orthonormal."""
    f = np.array(gell_mann_basis(n))
    return np.einsum("aij,bkl->abikjl", f, f).reshape(len(f) ** 2, -1)


def complement_vectors(n: int) -> np.ndarray:
    """Orthonormal rows spanning the complement of ``traceless (x) traceless``.

    ``{I (x) I / n} u {I (x) F / sqrt(n)} u {F (x) I / sqrt(n)}``, ``2n^2 - 1`` rows.
    """
    eye = np.eye(n)
    f = gell_mann_basis(n)
    rows = [np.kron(eye, eye).ravel() / n]
    rows += [np.kron(eye, x).ravel() / math.sqrt(n) for x in f]
    rows += [np.kron(x, eye).ravel() / math.sqrt(n) for x in f]
    return np.array(rows, dtype=np.complex128)


def ps_stacked_matrix(s: MarginalState, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``n^4 x (r^2 + (n^2-1)^2)`` matrix of the two vectorized bases."""
    basis = support_projection(s, tol).basis
    return np.vstack([_corner_vectors(basis), traceless_product_vectors(s.n)]).T


def ps_support_test(
    s: MarginalState,
    tol: Tolerances = DEFAULT_TOL,
    *,
    allow_large: bool = False,
    direct: bool = False,
) -> ExtremalityCertificate:
    """Extremality of a marginal tracial state via its support projection.

    The certificate reports the rank of the stacked matrix of both bases.
    By default that rank is obtained without forming the matrix: both bases
    are orthonormal, so ``rank = (n^2-1)^2 + rank(C^* A)`` where ``A`` holds
    the corner basis and ``C`` an orthonormal basis of the complement of
    ``traceless (x) traceless``. ``direct=True`` instead runs the one-sided
    Jacobi rank on the full ``n^4``-row matrix.

    Raises
    ------
    ContractError
        If the state is not marginal tracial, or ``n > 5`` without
        ``allow_large``.
    """
    n = s.n
    if n > PS_MAX_N and not allow_large:
        raise ContractError(f"PS test is gated to n <= {PS_MAX_N}; pass allow_large=True")
    if not validate_marginal(s, tol).is_marginal_tracial:
        raise ContractError("state is not marginal tracial within tolerance")
    basis = support_projection(s, tol).basis
    r = basis.shape[1]
    traceless_dim = (n * n - 1) ** 2
    required = r * r + traceless_dim
    if direct:
        achieved = rank(ps_stacked_matrix(s, tol), tol)
    else:
        projected = complement_vectors(n).conj() @ _corner_vectors(basis).T
        achieved = traceless_dim + rank(projected, tol)
    return ExtremalityCertificate(
        method="PS",
        n=n,
        k_or_r=r,
        stacked_rows=n**4,
        stacked_cols=required,
        achieved_rank=achieved,
        required_rank=required,
        is_extremal=achieved == required,
        tolerance_used=tol.rank_rel_tol,
    )


def cross_validate(ks: KrausSet, tol: Tolerances = DEFAULT_TOL, **ps_options) -> CrossValidation:
    """Run both criteria: LS on the reduced Kraus set, PS on its Choi state."""
    if not validate_ucpt(ks, tol).is_ucpt:
        raise ContractError("Kraus set is not UCPT within tolerance")
    ls = ls_bi_independence(reduce_to_independent(ks, tol), tol)
    ps = ps_support_test(marginal_state(choi(ks), ks.n, tol), tol, **ps_options)
    return CrossValidation(ls=ls, ps=ps)


def rank_bound(n: int) -> int:
    """Largest ``m`` with ``m^2 <= 2n^2 - 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.isqrt(2 * n * n - 1)


def smallest_singular_ratio(m, tol: Tolerances = DEFAULT_TOL) -> float:
    """``sigma_min / sigma_max`` of ``m``; the margin behind a rank verdict."""
    sv = singular_values(m, tol)
    return float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
