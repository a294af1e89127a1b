"""Singlet conversion protocols: closed forms and exact branch enumerations."""

from .branches import (
    direct_swap_success,
    distill_pair,
    hybrid_swap_success,
    pcm_branches,
    procrustean_success,
    recycling_success_bruteforce,
)
from .formulas import (
    SquareParams,
    majorization_pair_scp,
    scp_cep_1d,
    scp_cep_square,
    scp_direct_1d,
    scp_distillable_subspace,
    scp_hybrid_1d,
    scp_pair,
    scp_square,
    square_params,
    xz_swap_weight,
)
from .recycling import RecycleState, StepProbs, recycle_step, recycling_failure, scp_recycling

__all__ = [
    "RecycleState",
    "SquareParams",
    "StepProbs",
    "direct_swap_success",
    "distill_pair",
    "hybrid_swap_success",
    "majorization_pair_scp",
    "pcm_branches",
    "procrustean_success",
    "recycle_step",
    "recycling_failure",
    "recycling_success_bruteforce",
    "scp_cep_1d",
    "scp_cep_square",
    "scp_direct_1d",
    "scp_distillable_subspace",
    "scp_hybrid_1d",
    "scp_pair",
    "scp_recycling",
    "scp_square",
    "square_params",
    "xz_swap_weight",
]
