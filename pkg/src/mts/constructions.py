"""Explicit UCPT maps: extremal families, negative controls and random samplers.

All randomness goes through :func:`make_rng`, a numpy ``Generator`` on the
PCG64 bit generator seeded with a single integer, so every sampler here is
reproducible from its seed alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ContractError, KrausSet, validate_ucpt
from .linalg import DEFAULT_TOL, NumericalError, Tolerances, as_matrix, hermitian_eig, orthonormalize

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)


class DegenerateEpsilonError(ValueError):
    """The normalizing matrix of a perturbed diagonal channel is singular."""


def e(i: int, j: int, n: int) -> np.ndarray:
    """Matrix unit with 1-based indices, as written in the tables."""
    m = np.zeros((n, n), dtype=np.complex128)
    m[i - 1, j - 1] = 1.0
    return m


def n3_operators() -> list[np.ndarray]:
    """The unscaled ``w_1..w_4`` in ``M_3`` (sum of ``w w^*`` is ``4I``)."""
    return [
        e(1, 1, 3),
        e(1, 2, 3) + SQ2 * e(2, 3, 3),
        SQ2 * e(2, 1, 3) + SQ3 * e(3, 2, 3),
        e(3, 1, 3) + SQ2 * e(1, 3, 3),
    ]


def n4_operators() -> list[np.ndarray]:
    """The unscaled ``w_1..w_5`` in ``M_4``."""
    return [
        e(1, 3, 4) + e(3, 2, 4),
        SQ2 * e(2, 4, 4) + SQ2 * e(4, 3, 4),
        SQ2 * e(1, 4, 4) + SQ3 * e(3, 1, 4),
        e(2, 1, 4) + SQ2 * e(4, 2, 4),
        e(1, 2, 4) + e(2, 3, 4),
    ]


def construct_n3() -> KrausSet:
    """Extremal UCPT map on ``M_3`` with four Kraus operators."""
    return KrausSet.from_operators([w / 2 for w in n3_operators()])


def construct_n4() -> KrausSet:
    """Extremal UCPT map on ``M_4`` with five Kraus operators."""
    return KrausSet.from_operators([w / 2 for w in n4_operators()])


def construct_general(n: int) -> KrausSet:
    """``n`` Kraus operators on ``M_n``: a scaled projection and ``n-1`` flips.

    ``v_1 = sqrt((n-2)/(n-1)) (I - e_11)`` and
    ``v_i = (e_1i + e_i1) / sqrt(n-1)`` for ``i >= 2``. Extremality is only
    claimed for ``n >= 5``; smaller ``n`` (down to 3) is built with a warning
    and should be certified, not assumed.
    """
    if n < 3:
        raise ValueError("construct_general needs n >= 3")
    if n < 5:
        warnings.warn(
            f"construct_general({n}): extremality is only established for n >= 5",
            stacklevel=2,
        )
    v1 = math.sqrt((n - 2) / (n - 1)) * sum(e(j, j, n) for j in range(2, n + 1))
    rest = [(e(1, i, n) + e(i, 1, n)) / math.sqrt(n - 1) for i in range(2, n + 1)]
    return KrausSet.from_operators([v1] + rest)


@dataclass(frozen=True)
class ThetaSchedule:
    a: int
    thetas: np.ndarray = field(repr=False)

    def ordered_differences(self) -> list[tuple[int, int, float]]:
        """``(p, q, theta_p - theta_q)`` for ``p != q``, ``p`` outer (0-based)."""
        t = self.thetas
        return [(p, q, float(t[p] - t[q])) for p in range(self.a) for q in range(self.a) if p != q]

    def min_separation(self) -> float:
        """Smallest circular distance between two ordered differences."""
        diffs = np.array([d for _, _, d in self.ordered_differences()])
        gaps = np.abs(diffs[:, None] - diffs[None, :]) % (2 * np.pi)
        gaps = np.minimum(gaps, 2 * np.pi - gaps)
        np.fill_diagonal(gaps, np.inf)
        return float(gaps.min())


def theta_schedule(a: int) -> ThetaSchedule:
    """Angles ``theta_i = 2 pi 2^(i-1) / 2^(a+1)``, ``i = 1..a``.

    Differences of distinct powers of two are distinct, and every difference
    stays inside ``(-pi/2, pi/2)``, so all ordered differences are distinct
    mod ``2 pi``.
    """
    if a < 2:
        raise ValueError("theta_schedule needs a >= 2")
    thetas = 2 * np.pi * 2.0 ** np.arange(a) / 2.0 ** (a + 1)
    schedule = ThetaSchedule(a, thetas)
    if schedule.min_separation() <= 1e-6:
        raise NumericalError(f"theta differences not separated for a={a}", 0)
    return schedule


@dataclass(frozen=True)
class DiagonalVandermondeSpec:
    """Entries of the diagonal Kraus operators, one row per operator.

    ``entries`` is the ``a x n`` array ``[identity head | b | c]``.
    """

    a: int
    n: int
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.a * self.a

    @property
    def l(self) -> int:
        return self.a * self.a - self.a

    @property
    def entries(self) -> np.ndarray:
        return np.hstack([np.eye(self.a), self.b, self.c])


def diagonal_vandermonde_spec(a: int, n: int) -> DiagonalVandermondeSpec:
    if a < 1:
        raise ValueError("a must be >= 1")
    if a * a > n:
        raise ValueError(f"need a^2 <= n, got a={a}, n={n}")
    m, l = a * a, a * a - a
    if a == 1:
        thetas = np.zeros(1)
        b = np.zeros((1, 0), dtype=np.complex128)
    else:
        thetas = theta_schedule(a).thetas
        powers = np.arange(1, l + 1)
        b = np.exp(1j * np.outer(thetas, powers)) / math.sqrt(a)
    c = np.full((a, n - m), 1 / math.sqrt(a), dtype=np.complex128)
    return DiagonalVandermondeSpec(a=a, n=n, b=b, c=c, thetas=thetas)


def diagonal_vandermonde(a: int, n: int) -> KrausSet:
    """``a`` diagonal Kraus operators on ``M_n`` forming an extremal UCPT map.

    Requires ``a^2 <= n``. For ``a = 1`` the result is the identity.
    """
    spec = diagonal_vandermonde_spec(a, n)
    return from_diagonal_entries(spec.entries)


def vandermonde_phase_matrix(thetas) -> np.ndarray:
    """``l x l`` matrix ``[exp(i k (theta_p - theta_q))]``, rows over ``p != q``."""
    thetas = np.asarray(thetas, dtype=float)
    a = len(thetas)
    diffs = np.array([thetas[p] - thetas[q] for p in range(a) for q in range(a) if p != q])
    powers = np.arange(1, len(diffs) + 1)
    return np.exp(1j * np.outer(diffs, powers))


def outer_rows(entries) -> np.ndarray:
    """Rows ``v_p v_q^*`` of diagonal operators, the ``p == q`` rows first."""
    v = as_matrix(entries)
    a = v.shape[0]
    order = [(p, p) for p in range(a)] + [(p, q) for p in range(a) for q in range(a) if p != q]
    return np.array([v[p] * v[q].conj() for p, q in order])


def from_diagonal_entries(entries) -> KrausSet:
    v = as_matrix(entries)
    return KrausSet(np.array([np.diag(row) for row in v]))


def diagonal_entries(ks: KrausSet) -> np.ndarray:
    return np.array([np.diag(v) for v in ks.operators])


@dataclass(frozen=True)
class PerturbationSpec:
    u: KrausSet
    v: KrausSet
    epsilon: float

    @property
    def a(self) -> int:
        return len(self.u)

    @property
    def n(self) -> int:
        return self.u.n


def perturb_diagonal(spec: PerturbationSpec, tol: Tolerances = DEFAULT_TOL) -> KrausSet:
    """Normalized ``w_i = u_i + eps v_i`` for diagonal Kraus sets ``u`` and ``v``.

    With ``S = sum w_i^* w_i`` (diagonal, entrywise positive) the output is
    ``w_i S^{-1/2}``, which is unital and trace preserving at once because all
    operators commute. ``eps = 0`` returns ``u`` unchanged.

    Raises
    ------
    ContractError
        If ``u`` or ``v`` are not diagonal UCPT sets of equal size.
    DegenerateEpsilonError
        If an entry of ``S`` is not above ``residual_abs_tol``.
    """
    u, v = spec.u, spec.v
    if len(u) != len(v) or u.n != v.n:
        raise ContractError("u and v must have the same number and size of operators")
    for name, ks in (("u", u), ("v", v)):
        off = ks.operators * (1 - np.eye(ks.n))
        if np.linalg.norm(off) > tol.residual_abs_tol:
            raise ContractError(f"{name} is not diagonal")
        if not validate_ucpt(ks, tol).is_ucpt:
            raise ContractError(f"{name} is not UCPT")
    if spec.epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    w = diagonal_entries(u) + spec.epsilon * diagonal_entries(v)
    s = np.sum(np.abs(w) ** 2, axis=0)
    if s.min() <= tol.residual_abs_tol:
        raise DegenerateEpsilonError(f"sum w^* w is singular at epsilon={spec.epsilon}")
    return from_diagonal_entries(w / np.sqrt(s))


def is_unitary(u, atol: float = 1e-10) -> bool:
    u = as_matrix(u)
    return u.shape[0] == u.shape[1] and np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= atol


def unitary_channel(u) -> KrausSet:
    if not is_unitary(u):
        raise ValueError("operator is not unitary within 1e-10")
    return KrausSet.from_operators([u])


def mixture_of_unitaries(weights: Sequence[float], us: Sequence) -> KrausSet:
    """Kraus operators ``sqrt(p_i) u_i``."""
    w = np.asarray(weights, dtype=float)
    if len(us) < 1 or w.shape != (len(us),):
        raise ValueError("need one weight per unitary")
    if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be positive and sum to 1")
    for u in us:
        if not is_unitary(u):
            raise ValueError("all operators must be unitary within 1e-10")
    return KrausSet.from_operators(list(us), weights=w)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / SQ2


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unitary from Gram-Schmidt on a complex Gaussian matrix."""
    while True:
        q = orthonormalize(complex_gaussian(rng, (n, n)))
        if q.shape[1] == n:
            return q


def random_diagonal_ucpt(a: int, n: int, seed: int) -> KrausSet:
    """``a`` diagonal operators whose ``a x n`` entry array has unit columns."""
    if a < 1 or n < 1:
        raise ValueError("a and n must be >= 1")
    entries = complex_gaussian(make_rng(seed), (a, n))
    return from_diagonal_entries(entries / np.linalg.norm(entries, axis=0))


def random_mixture(n: int, k: int, seed: int) -> KrausSet:
    """Equal-weight mixture of ``k`` random unitaries."""
    rng = make_rng(seed)
    return mixture_of_unitaries(np.full(k, 1.0 / k), [random_unitary(n, rng) for _ in range(k)])


def _inv_sqrt(h: np.ndarray, tol: Tolerances) -> np.ndarray:
    w, q = hermitian_eig(h, tol)
    if w[-1] <= 0:
        raise NumericalError("matrix is not positive definite", 0)
    return (q / np.sqrt(w)) @ q.conj().T


def sinkhorn_normalize(
    operators, tol: Tolerances = DEFAULT_TOL, max_iter: int = 2000, target: float | None = None
) -> KrausSet:
    """Operator Sinkhorn scaling of a Kraus family to a UCPT set.

    Alternates ``v -> T^{-1/2} v`` with ``T = sum v v^*`` and
    ``v -> v S^{-1/2}`` with ``S = sum v^* v`` until both sums are within
    ``target`` of the identity (default: a tenth of ``residual_abs_tol``).
    """
    if target is None:
        target = 0.1 * tol.residual_abs_tol
    ops = np.array(operators, dtype=np.complex128)
    eye = np.eye(ops.shape[1])
    for _ in range(max_iter):
        t = np.einsum("kij,klj->il", ops, ops.conj())
        ops = np.einsum("ij,kjl->kil", _inv_sqrt(t, tol), ops)
        s = np.einsum("kji,kjl->il", ops.conj(), ops)
        ops = ops @ _inv_sqrt(s, tol)
        t = np.einsum("kij,klj->il", ops, ops.conj())
        s = np.einsum("kji,kjl->il", ops.conj(), ops)
        if max(np.linalg.norm(t - eye), np.linalg.norm(s - eye)) <= target:
            return KrausSet(ops)
    raise NumericalError("operator Sinkhorn scaling did not converge", max_iter)


def random_perturbed_ucpt(
    base: KrausSet, k: int, epsilon: float, seed: int, max_iter: int = 2000
) -> KrausSet:
    """Perturb (and pad or truncate to ``k``) a Kraus set, then rescale to UCPT.

    Operators beyond ``len(base)`` start from zero, so they are of order
    ``epsilon``. Near a unitary channel the scaling contracts only at a rate
    of about ``1 - epsilon^2`` per step; ``max_iter`` bounds the work and a
    :class:`NumericalError` reports the failure.
    """
    rng = make_rng(seed)
    n = base.n
    ops = np.zeros((k, n, n), dtype=np.complex128)
    take = min(k, len(base))
    ops[:take] = base.operators[:take]
    ops += epsilon * complex_gaussian(rng, (k, n, n))
    return sinkhorn_normalize(ops, max_iter=max_iter)
