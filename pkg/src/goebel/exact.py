"""Exact evaluation of (k,l)-Goebel sequences.

The recurrence is

    (n+1) g(n+1) = g(n) (n + g(n)^(k-1)),    g(1) = l,

evaluated with :class:`fractions.Fraction`, which keeps every value in
lowest terms.  Values grow doubly exponentially, so every step is guarded
by a :class:`DigitBudget`; hitting the budget raises :class:`BudgetExceeded`
and callers are expected to move to the p-adic or log-space machinery.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

ExactRational = Fraction

EXCEEDS_CAP = "exceeds-cap"

DEFAULT_MAX_BITS = 2**23


class BudgetExceeded(ArithmeticError):
    """An exact intermediate would be larger than the digit budget allows.

    ``last_n`` is the largest index whose value was fully computed
    (0 if none).
    """

    def __init__(self, message: str, last_n: int = 0):
        super().__init__(message)
        self.last_n = last_n


@dataclass(frozen=True)
class GoebelParams:
    k: int
    l: int

    def __post_init__(self):
        if not isinstance(self.k, int) or not isinstance(self.l, int):
            raise TypeError("k and l must be integers")
        if self.k < 1 or self.l < 1:
            raise ValueError(f"need k, l >= 1, got k={self.k}, l={self.l}")


@dataclass(frozen=True)
class DigitBudget:
    max_bits: int = DEFAULT_MAX_BITS

    def __post_init__(self):
        if self.max_bits < 64:
            raise ValueError("max_bits must be at least 64")


DEFAULT_BUDGET = DigitBudget()


def bit_size(x: Fraction) -> int:
    return abs(x.numerator).bit_length() + x.denominator.bit_length()


def goebel_step(g: Fraction, n: int, k: int) -> Fraction:
    """g(n+1) from g(n)."""
    return g * (n + g ** (k - 1)) / (n + 1)


# Prefix cache: (k, l) -> [g(1), g(2), ...].  Lists only ever grow; the lock
# makes extension atomic so concurrent readers never see a half-written entry.
_prefix_cache: dict[tuple[int, int], list[Fraction]] = {}
_cache_lock = threading.Lock()


def clear_cache() -> None:
    with _cache_lock:
        _prefix_cache.clear()


def _extend(params: GoebelParams, n_max: int, budget: DigitBudget) -> list[Fraction]:
    key = (params.k, params.l)
    with _cache_lock:
        values = _prefix_cache.setdefault(key, [Fraction(params.l)])
        k = params.k
        # Entries cached under a larger budget must not leak past a smaller one.
        for i, v in enumerate(values[:n_max]):
            if bit_size(v) > budget.max_bits:
                raise BudgetExceeded(
                    f"g_{{{k},{params.l}}}({i + 1}) has {bit_size(v)} bits", last_n=i
                )
        while len(values) < n_max:
            n = len(values)
            g = values[-1]
            # g^(k-1) is the largest intermediate; refuse before building it.
            if max(k, 2) * bit_size(g) > budget.max_bits:
                raise BudgetExceeded(
                    f"g_{{{k},{params.l}}}({n + 1}) needs more than "
                    f"{budget.max_bits} bits",
                    last_n=n,
                )
            nxt = goebel_step(g, n, k)
            if bit_size(nxt) > budget.max_bits:
                raise BudgetExceeded(
                    f"g_{{{k},{params.l}}}({n + 1}) has {bit_size(nxt)} bits",
                    last_n=n,
                )
            values.append(nxt)
        return values[:n_max]


def eval_prefix(
    params: GoebelParams, n_max: int, budget: DigitBudget = DEFAULT_BUDGET
) -> list[Fraction]:
    """Return ``[g(1), ..., g(n_max)]``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return _extend(params, n_max, budget)


def eval_exact(
    params: GoebelParams, n: int, budget: DigitBudget = DEFAULT_BUDGET
) -> Fraction:
    """Exact g_{k,l}(n) for n >= 1."""
    if n < 1:
        raise ValueError("sequence is indexed from n = 1")
    return _extend(params, n, budget)[n - 1]


def is_integral(x: Fraction) -> bool:
    return Fraction(x).denominator == 1


def naive_N(
    params: GoebelParams, cap: int, budget: DigitBudget = DEFAULT_BUDGET
) -> Union[int, str]:
    """First n <= cap with g(n) not an integer, by brute force.

    Returns ``EXCEEDS_CAP`` when g(1..cap) are all integers.  Raises
    :class:`BudgetExceeded` if the exact values outgrow the budget first.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    for n in range(1, cap + 1):
        if not is_integral(eval_exact(params, n, budget)):
            return n
    return EXCEEDS_CAP


def t_sequence(
    k: int,
    t0,
    n: int,
    budget: DigitBudget = DEFAULT_BUDGET,
    start: int = 0,
) -> Fraction:
    """Comparison sequence t(m+1) = t(m)^k / (m+1) with t(start) = t0.

    ``start`` re-bases the initial index (e.g. t'(3) = 5 is ``start=3``).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    t = Fraction(t0)
    if t <= 1:
        raise ValueError("t0 must exceed 1")
    if n < start:
        raise ValueError(f"n must be >= start index {start}")
    for m in range(start, n):
        if k * bit_size(t) > budget.max_bits:
            raise BudgetExceeded(f"t({m + 1}) exceeds {budget.max_bits} bits", last_n=m)
        t = t**k / (m + 1)
    return t
