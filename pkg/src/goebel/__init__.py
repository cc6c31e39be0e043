"""Exact, p-adic and asymptotic computations for (k,l)-Goebel sequences."""

from .exact import (
    EXCEEDS_CAP,
    BudgetExceeded,
    DigitBudget,
    GoebelParams,
    eval_exact,
    eval_prefix,
    is_integral,
    naive_N,
    t_sequence,
)
from .padic import (
    NON_INTEGRAL,
    BudgetUnderflow,
    PrimePowerContext,
    Residue,
    compute_N,
    nu_p,
    nu_p_factorial,
    padic_eval,
    padic_step,
    totient,
)
from .reports import VerdictReport

__all__ = [
    "EXCEEDS_CAP",
    "BudgetExceeded",
    "BudgetUnderflow",
    "DigitBudget",
    "GoebelParams",
    "NON_INTEGRAL",
    "PrimePowerContext",
    "Residue",
    "VerdictReport",
    "compute_N",
    "eval_exact",
    "eval_prefix",
    "is_integral",
    "naive_N",
    "nu_p",
    "nu_p_factorial",
    "padic_eval",
    "padic_step",
    "t_sequence",
    "totient",
]
