"""Seeded random search for extremal UCPT maps of large Kraus rank."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .channel import KrausSet, reduce_to_independent, validate_ucpt
from .constructions import construct_general, random_diagonal_ucpt, random_perturbed_ucpt
from .extremality import ExtremalityCertificate, ls_bi_independence, rank_bound
from .linalg import DEFAULT_TOL, NumericalError, Tolerances

Strategy = Literal["diagonal", "perturbation"]
STRATEGIES = ("diagonal", "perturbation")
SINKHORN_MAX_ITER = 300


@dataclass
class TrialOutcome:
    trial: int
    requested_k: int
    kraus_rank: int
    is_extremal: bool
    certificate: ExtremalityCertificate | None


@dataclass
class SearchResult:
    n: int
    strategy: str
    trials: int
    seed: int
    target_rank: int
    rank_bound: int
    valid_trials: int = 0
    extremal_hits: int = 0
    max_extremal_rank: int = 0
    hits_by_rank: dict[int, int] = field(default_factory=dict)
    best_certificate: ExtremalityCertificate | None = None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "strategy": self.strategy,
            "trials": self.trials,
            "seed": self.seed,
            "target_rank": self.target_rank,
            "rank_bound": self.rank_bound,
            "valid_trials": self.valid_trials,
            "extremal_hits": self.extremal_hits,
            "max_extremal_rank": self.max_extremal_rank,
            "hits_by_rank": {str(k): v for k, v in sorted(self.hits_by_rank.items())},
            "best_certificate": None if self.best_certificate is None else self.best_certificate.as_dict(),
        }


def trial_seed(seed: int, trial: int) -> int:
    """Independent 64-bit seed for one trial, a pure function of ``(seed, trial)``."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, np.uint64)[0])


def _base_channel(n: int) -> KrausSet:
    if n >= 3:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return construct_general(n)
    return KrausSet.from_operators([np.eye(n)])


def sample_trial(n: int, k: int, strategy: str, seed: int) -> KrausSet:
    if strategy == "diagonal":
        return random_diagonal_ucpt(k, n, seed)
    if strategy == "perturbation":
        eps = 10.0 ** np.random.Generator(np.random.PCG64(seed)).uniform(-3, -1)
        return random_perturbed_ucpt(_base_channel(n), k, eps, seed, max_iter=SINKHORN_MAX_ITER)
    raise ValueError(f"unknown strategy {strategy!r}")


def run_trial(n: int, target_rank: int, strategy: str, seed: int, trial: int, tol: Tolerances) -> TrialOutcome | None:
    s = trial_seed(seed, trial)
    k = int(np.random.Generator(np.random.PCG64(s)).integers(1, target_rank + 1))
    try:
        ks = sample_trial(n, k, strategy, s)
    except NumericalError:
        return None
    if not validate_ucpt(ks, tol).is_ucpt:
        return None
    reduced = reduce_to_independent(ks, tol)
    cert = ls_bi_independence(reduced, tol)
    return TrialOutcome(trial, k, len(reduced), cert.is_extremal, cert)


def run_search(
    n: int,
    target_rank: int | None = None,
    trials: int = 100,
    seed: int = 0,
    strategy: Strategy = "diagonal",
    tol: Tolerances = DEFAULT_TOL,
) -> SearchResult:
    """Sample ``trials`` UCPT maps on ``M_n`` and certify each with the LS test.

    Each trial draws its Kraus count uniformly from ``1..target_rank``
    (default: the rank bound) using its own seed, so the aggregate is the
    same whatever order trials are evaluated in.

    ``diagonal`` samples random diagonal UCPT maps. ``perturbation`` starts
    from the general extremal family (the identity for ``n < 3``), pads or
    truncates it to the drawn count, adds complex Gaussian noise of a random
    scale in ``[1e-3, 1e-1]`` and rescales back to UCPT by operator Sinkhorn
    iteration. Trials whose scaling does not converge within
    ``SINKHORN_MAX_ITER`` steps are skipped and do not count as valid.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    bound = rank_bound(n)
    target = bound if target_rank is None else int(target_rank)
    if target < 1:
        raise ValueError("target_rank must be >= 1")
    result = SearchResult(n=n, strategy=strategy, trials=trials, seed=seed, target_rank=target, rank_bound=bound)
    for t in range(trials):
        outcome = run_trial(n, target, strategy, seed, t, tol)
        if outcome is None:
            continue
        result.valid_trials += 1
        if not outcome.is_extremal:
            continue
        result.extremal_hits += 1
        r = outcome.kraus_rank
        result.hits_by_rank[r] = result.hits_by_rank.get(r, 0) + 1
        if r > result.max_extremal_rank:
            result.max_extremal_rank = r
            result.best_certificate = outcome.certificate
    return result
