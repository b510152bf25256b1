"""Marginal tracial states on M_n (x) M_n and unital quantum channels.

The package builds UCPT maps from Kraus operators, converts them to and from
their Choi density matrices, and certifies extremality by two independent
rank tests.
"""

from .channel import (
    ContractError,
    DiagonalProfile,
    KrausSet,
    UcptReport,
    apply,
    choi,
    diagonal_profile,
    pairing,
    reduce_to_independent,
    validate_ucpt,
)
from .extremality import (
    ExtremalityCertificate,
    cross_validate,
    ls_bi_independence,
    ps_support_test,
    rank_bound,
)
from .linalg import NumericalError, ShapeError, Tolerances
from .state import (
    MarginalState,
    kraus_from_state,
    marginal_state,
    state_rank,
    support_projection,
    validate_marginal,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "DiagonalProfile",
    "ExtremalityCertificate",
    "KrausSet",
    "MarginalState",
    "NumericalError",
    "ShapeError",
    "Tolerances",
    "UcptReport",
    "apply",
    "choi",
    "cross_validate",
    "diagonal_profile",
    "kraus_from_state",
    "ls_bi_independence",
    "marginal_state",
    "pairing",
    "ps_support_test",
    "rank_bound",
    "reduce_to_independent",
    "state_rank",
    "support_projection",
    "validate_marginal",
    "validate_ucpt",
]
