"""Marginal tracial states on ``M_n (x) M_n`` as density matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ContractError, KrausSet
from .linalg import (
    DEFAULT_TOL,
    ShapeError,
    Tolerances,
    as_matrix,
    fix_column_phases,
    hermitian_eig,
    partial_trace,
)


@dataclass(frozen=True, eq=False)
class MarginalState:
    """Density matrix on ``C^n (x) C^n`` with its spectral decomposition.

    Use :func:`marginal_state` to build one; the eigen-decomposition is done
    once there. Eigenvectors are phase-normalized (first significant entry
    real positive) so everything derived from them is deterministic.
    """

    n: int
    density: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class MarginalReport:
    pt_first_residual: float
    pt_second_residual: float
    psd_defect: float
    trace_defect: float
    is_marginal_tracial: bool

    def as_dict(self) -> dict:
        return {
            "pt_first_residual": self.pt_first_residual,
            "pt_second_residual": self.pt_second_residual,
            "psd_defect": self.psd_defect,
            "trace_defect": self.trace_defect,
            "is_marginal_tracial": self.is_marginal_tracial,
        }


@dataclass(frozen=True)
class SupportProjection:
    p: np.ndarray = field(repr=False)
    r: int
    basis: np.ndarray = field(repr=False)


def marginal_state(density, n: int | None = None, tol: Tolerances = DEFAULT_TOL) -> MarginalState:
    d = as_matrix(density, "density")
    size = d.shape[0]
    if d.shape[1] != size:
        raise ShapeError(f"density must be square, got {d.shape}")
    if n is None:
        n = int(round(np.sqrt(size)))
    if n * n != size:
        raise ShapeError(f"density of size {size} is not n^2 x n^2")
    w, q = hermitian_eig(d, tol)
    q = fix_column_phases(q)
    for arr in (d, w, q):
        arr.setflags(write=False)
    return MarginalState(n=n, density=d, eigenvalues=w, eigenvectors=q)


def validate_marginal(s: MarginalState, tol: Tolerances = DEFAULT_TOL) -> MarginalReport:
    target = np.eye(s.n) / s.n
    first = float(np.linalg.norm(partial_trace(s.density, s.n, "first") - target))
    second = float(np.linalg.norm(partial_trace(s.density, s.n, "second") - target))
    psd = float(max(0.0, -s.eigenvalues[-1]))
    trace = float(abs(np.trace(s.density) - 1.0))
    ok = max(first, second, psd, trace) <= tol.residual_abs_tol
    return MarginalReport(first, second, psd, trace, ok)


def _retained(s: MarginalState, tol: Tolerances) -> np.ndarray:
    w = s.eigenvalues
    if w[0] <= 0:
        return np.zeros(w.shape, dtype=bool)
    return w > tol.rank_rel_tol * w[0]


def state_rank(s: MarginalState, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of eigenvalues above ``rank_rel_tol * lambda_max``."""
    return int(np.count_nonzero(_retained(s, tol)))


def support_projection(s: MarginalState, tol: Tolerances = DEFAULT_TOL) -> SupportProjection:
    basis = s.eigenvectors[:, _retained(s, tol)]
    return SupportProjection(p=basis @ basis.conj().T, r=basis.shape[1], basis=basis)


def kraus_from_state(s: MarginalState, tol: Tolerances = DEFAULT_TOL) -> KrausSet:
    """Inverse of :func:`mts.channel.choi` on marginal tracial states.

    Each retained eigenpair ``(lam, zeta)`` gives the operator
    ``sqrt(lam * n) * reshape(zeta, (n, n))``: column ``j`` of the operator
    is the slice of ``zeta`` paired with ``e_j`` in the second factor.
    """
    if not validate_marginal(s, tol).is_marginal_tracial:
        raise ContractError("state is not marginal tracial within tolerance")
    keep = _retained(s, tol)
    lam = s.eigenvalues[keep]
    zeta = s.eigenvectors[:, keep]
    n = s.n
    ops = np.sqrt(lam * n)[:, None, None] * zeta.T.reshape(-1, n, n)
    return KrausSet(ops)
