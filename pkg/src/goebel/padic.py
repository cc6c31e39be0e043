"""Residue-with-budget state machine for g_{k,l}(n) modulo prime powers.

For a prime p and an initial exponent budget r, the state at index n is
either ``Residue(a, b)``, meaning g(n) lies in Z_(p) and g(n) = a mod p^b
with b = r - v_p(n!), or ``NON_INTEGRAL``, meaning g(n) is not p-integral.
Non-integrality is absorbing, so the first failing index of each prime is
well defined and N_{k,l} is the minimum over primes.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Union

from .exact import (
    DEFAULT_BUDGET,
    EXCEEDS_CAP,
    DigitBudget,
    GoebelParams,
    eval_exact,
)
from .reports import VerdictReport


class BudgetUnderflow(ValueError):
    """The requested index needs more p-adic precision than the budget r."""


# ---------------------------------------------------------------------------
# arithmetic helpers
# ---------------------------------------------------------------------------


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def _nu_int(p: int, m: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def nu_p(p: int, x) -> int:
    """p-adic valuation of a nonzero integer or rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of 0 is undefined")
    return _nu_int(p, abs(x.numerator)) - _nu_int(p, x.denominator)


def nu_p_factorial(p: int, n: int) -> int:
    """v_p(n!) by Legendre's formula."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    total = 0
    q = p
    while q <= n:
        total += n // q
        q *= p
    return total


def totient(m: int) -> int:
    if m < 1:
        raise ValueError("totient needs m >= 1")
    result = m
    rest = m
    d = 2
    while d * d <= rest:
        if rest % d == 0:
            while rest % d == 0:
                rest //= d
            result -= result // d
        d += 1
    if rest > 1:
        result -= result // rest
    return result


def mod_inverse(x: int, modulus: int) -> int:
    # pow(x, -1, 1) would raise; every integer is the inverse mod 1.
    if modulus == 1:
        return 1
    return pow(x, -1, modulus)


def residue_of(x, p: int, b: int) -> int:
    """Reduce a p-integral rational modulo p^b."""
    x = Fraction(x)
    mod = p**b
    if x.denominator % p == 0:
        raise ValueError(f"{x} is not {p}-integral")
    return x.numerator * mod_inverse(x.denominator % mod, mod) % mod


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Residue:
    a: int
    b: int


class NonIntegral:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NON_INTEGRAL"

    def __reduce__(self):
        return (NonIntegral, ())


NON_INTEGRAL = NonIntegral()

PadicState = Union[Residue, NonIntegral]


@dataclass(frozen=True)
class PrimePowerContext:
    p: int
    r: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.r < 1:
            raise ValueError("r must be >= 1")


def initial_state(ctx: PrimePowerContext, params: GoebelParams) -> Residue:
    return Residue(params.l % ctx.p**ctx.r, ctx.r)


def _step(p: int, k: int, n: int, a: int, b_prev: int) -> PadicState:
    # a is g(n-1) mod p^b_prev; returns the state at n.
    v = _nu_int(p, n)
    b = b_prev - v
    if b < 0:
        raise BudgetUnderflow(f"index {n} needs more than the available budget")
    mod_prev = p**b_prev
    t = a * (n - 1 + pow(a, k - 1, mod_prev)) % mod_prev
    pv = p**v
    if t % pv:
        return NON_INTEGRAL
    mod = p**b
    c = mod_inverse((n // pv) % mod, mod)
    return Residue(t // pv * c % mod, b)


def padic_step(
    ctx: PrimePowerContext, params: GoebelParams, n: int, prev: PadicState
) -> PadicState:
    """State at n from the state at n-1."""
    if n < 2:
        raise ValueError("padic_step needs n >= 2")
    if prev is NON_INTEGRAL:
        return NON_INTEGRAL
    if prev.b != ctx.r - nu_p_factorial(ctx.p, n - 1):
        raise ValueError(f"{prev} is not a state at index {n - 1}")
    return _step(ctx.p, params.k, n, prev.a, prev.b)


_runs: dict[tuple[int, int, int, int], list[PadicState]] = {}
_runs_lock = threading.Lock()


def clear_cache() -> None:
    with _runs_lock:
        _runs.clear()


def padic_eval(ctx: PrimePowerContext, params: GoebelParams, n: int) -> PadicState:
    """State of g_{k,l}(n) modulo p^(r - v_p(n!))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if nu_p_factorial(ctx.p, n) > ctx.r:
        raise BudgetUnderflow(
            f"v_{ctx.p}({n}!) = {nu_p_factorial(ctx.p, n)} exceeds r = {ctx.r}"
        )
    key = (params.k, params.l, ctx.p, ctx.r)
    with _runs_lock:
        states = _runs.setdefault(key, [initial_state(ctx, params)])
        while len(states) < n:
            m = len(states) + 1
            states.append(padic_step(ctx, params, m, states[-1]))
        return states[n - 1]


# ---------------------------------------------------------------------------
# N_{k,l}
# ---------------------------------------------------------------------------


class _PrimeRun:
    """One prime's run, re-started with a larger budget when needed."""

    def __init__(self, p: int, k: int, l: int):
        self.p, self.k, self.l = p, k, l
        self._restart(2 * p)

    def _restart(self, horizon: int) -> None:
        self.horizon = horizon
        self.r = nu_p_factorial(self.p, horizon)
        self.n = 1
        self.a = self.l % self.p**self.r
        self.b = self.r
        self.failed = False

    def advance(self, n: int) -> bool:
        """Move to index n; return True if g(n) is not p-integral."""
        if n > self.horizon:
            self._restart(2 * n)
        p, k = self.p, self.k
        while self.n < n and not self.failed:
            m = self.n + 1
            state = _step(p, k, m, self.a, self.b)
            if state is NON_INTEGRAL:
                self.failed = True
            else:
                self.a, self.b = state.a, state.b
            self.n = m
        return self.failed


def compute_N(params: GoebelParams, cap: int = 5000) -> Union[int, str]:
    """Least n <= cap with g_{k,l}(n) not an integer, else ``EXCEEDS_CAP``.

    Each prime p <= n keeps its own run; a run's budget is a horizon
    v_p(H!) with H >= n, doubled when n passes it.  Any budget r with
    v_p(n!) <= r gives the same verdict at n, so this agrees with
    recomputing at r = v_p(n!) for every n.
    """
    if params.k < 2 or params.l < 2:
        raise ValueError("compute_N needs k, l >= 2")
    if cap < 2:
        raise ValueError("cap must be >= 2")
    runs: list[_PrimeRun] = []
    primes = iter(primes_upto(cap))
    next_prime = next(primes, None)
    for n in range(2, cap + 1):
        if next_prime == n:
            runs.append(_PrimeRun(n, params.k, params.l))
            next_prime = next(primes, None)
        for run in runs:
            if run.advance(n):
                return n
    return EXCEEDS_CAP


def compute_N_reference(params: GoebelParams, cap: int = 5000) -> Union[int, str]:
    """Direct transcription of the defining search: for every n, every prime
    p <= n is re-run from scratch with r = v_p(n!).  Quadratic; for tests."""
    for n in range(2, cap + 1):
        for p in primes_upto(n):
            ctx = PrimePowerContext(p, nu_p_factorial(p, n))
            state: PadicState = initial_state(ctx, params)
            for m in range(2, n + 1):
                state = padic_step(ctx, params, m, state)
            if state is NON_INTEGRAL:
                return n
    return EXCEEDS_CAP


# ---------------------------------------------------------------------------
# key-lemma harness
# ---------------------------------------------------------------------------


def _p_integral(x: Fraction, p: int) -> bool:
    return x.denominator % p != 0


def _close(x: Fraction, y: Fraction, p: int, e: int) -> bool:
    # x - y in p^e Z_(p)
    d = x - y
    return d == 0 or nu_p(p, d) >= e


def check_key_lemma(
    ks: Iterable[int],
    ls: Iterable[int],
    n_max: int,
    p: int,
    r: int,
    budget: DigitBudget = DEFAULT_BUDGET,
) -> VerdictReport:
    """Check the four structural properties of p-integrality on a finite box.

    (1) n < p implies g(n) in Z_(p); (2) non-integrality persists;
    (3) k1 = k2 mod phi(p^r) with k1, k2 >= r gives the same verdicts and
    g_{k1,l}(n) - g_{k2,l}(n) in p^(r - v_p(n!)) Z_(p); (4) the same for
    l1 = l2 mod p^r.  Indices are limited to v_p(n!) <= r.  Counterexamples
    are (k, l, n, p) tuples, with the partner parameter appended for (3)
    and (4).
    """
    ks, ls = sorted(set(ks)), sorted(set(ls))
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    n_top = n_max
    while n_top > 1 and nu_p_factorial(p, n_top) > r:
        n_top -= 1
    values = {
        (k, l): [eval_exact(GoebelParams(k, l), n, budget) for n in range(1, n_top + 1)]
        for k in ks
        for l in ls
    }
    bad: list[tuple] = []
    checked = 0

    for (k, l), g in values.items():
        for n, x in enumerate(g, start=1):
            checked += 1
            if n < p and not _p_integral(x, p):
                bad.append((k, l, n, p, "prop1"))
            if n < len(g) and not _p_integral(x, p) and _p_integral(g[n], p):
                bad.append((k, l, n + 1, p, "prop2"))

    phi = totient(p**r)

    def compare(key1, key2, tag):
        nonlocal checked
        g1, g2 = values[key1], values[key2]
        for n, (x, y) in enumerate(zip(g1, g2), start=1):
            checked += 1
            i1, i2 = _p_integral(x, p), _p_integral(y, p)
            if i1 != i2 or (i1 and not _close(x, y, p, r - nu_p_factorial(p, n))):
                bad.append(key1 + (n, p, tag, key2))

    for k1, k2 in combinations(ks, 2):
        if k1 >= r and k2 >= r and (k1 - k2) % phi == 0:
            for l in ls:
                compare((k1, l), (k2, l), "prop3")
    for l1, l2 in combinations(ls, 2):
        if (l1 - l2) % p**r == 0:
            for k in ks:
                compare((k, l1), (k, l2), "prop4")

    return VerdictReport(
        claim=f"key-lemma p={p} r={r}",
        passed=not bad,
        counterexamples=bad,
        checked=checked,
    )
