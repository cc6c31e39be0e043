"""Asymptotic constants and expansions of (k,l)-Goebel sequences.

High-precision quantities are computed with mpmath.  Each public routine
runs its computation twice, at ``digits + GUARD`` and ``digits +
CHECK_GUARD`` working digits, and returns the second value with an error
bound that is the larger of the analytic bound (series tails, dropped
terms, rounding) and the discrepancy between the two runs.  A discrepancy
above 10^-digits raises :class:`PrecisionError`.

Working precision is measured in decimal digits *after the point*; routines
whose values grow like k^n add enough extra significant digits to keep that
absolute accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional

import mpmath
from mpmath import mpf

from .exact import (
    BudgetExceeded,
    DigitBudget,
    GoebelParams,
    eval_exact,
    eval_prefix,
    t_sequence,
)
from .reports import VerdictReport

GUARD = 30
CHECK_GUARD = 60
SEED_MAX_N = 12
SEED_BITS = 2**20


class PrecisionError(ArithmeticError):
    """Two working precisions disagree beyond the requested tolerance."""


@dataclass(frozen=True)
class HighPrecReal:
    value: mpf
    err: mpf
    digits: int

    @property
    def lower(self) -> mpf:
        return self.value - self.err

    @property
    def upper(self) -> mpf:
        return self.value + self.err

    def decimal(self) -> str:
        """Decimal string with ``digits`` places; scientific for tiny values."""
        v = self.value
        if v != 0 and abs(v) < mpf(10) ** -3:
            return mpmath.nstr(v, self.digits, strip_zeros=False, min_fixed=0, max_fixed=0)
        with mpmath.workdps(self.digits + 20 + max(0, int(mpmath.log10(abs(v) + 1)))):
            q = int(mpmath.nint(v * mpf(10) ** self.digits))
        sign = "-" if q < 0 else ""
        s = str(abs(q)).rjust(self.digits + 1, "0")
        if self.digits == 0:
            return sign + s
        return f"{sign}{s[:-self.digits]}.{s[-self.digits:]}"

    def __str__(self) -> str:
        return self.decimal()


def _eps() -> mpf:
    return mpf(2) ** (-mpmath.mp.prec)


def _two_runs(
    compute: Callable[[int], tuple[mpf, mpf]], digits: int, relative: bool = False
) -> HighPrecReal:
    v1, _ = compute(digits + GUARD)
    v2, e2 = compute(digits + CHECK_GUARD)
    with mpmath.workdps(digits + CHECK_GUARD + 10):
        disc = abs(v1 - v2)
        tol = mpf(10) ** -digits
        if relative:
            tol *= abs(v2)
        if disc > tol:
            raise PrecisionError(
                f"runs at {digits + GUARD} and {digits + CHECK_GUARD} digits "
                f"differ by {mpmath.nstr(disc, 5)}"
            )
        err = max(e2, disc)
    return HighPrecReal(v2, err, digits)


# ---------------------------------------------------------------------------
# Eulerian polynomials and the coefficients a_{k,r}
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerianPolynomial:
    """A_r(t); ``coefficients[j]`` is the coefficient of t^j."""

    r: int
    coefficients: tuple[int, ...]

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def __str__(self) -> str:
        terms = []
        for j in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[j]
            if c == 0:
                continue
            if j == 0:
                terms.append(str(c))
            else:
                power = "t" if j == 1 else f"t^{j}"
                terms.append(power if c == 1 else f"{c}{power}")
        return " + ".join(terms)


@lru_cache(maxsize=None)
def _eulerian_row(r: int) -> tuple[int, ...]:
    if r == 0:
        return (1,)
    if r == 1:
        return (0, 1)
    prev = _eulerian_row(r - 1)
    # E(r, j) = j E(r-1, j) + (r - j + 1) E(r-1, j-1), for t^j with 1 <= j <= r
    row = [0] * (r + 1)
    for j in range(1, r + 1):
        same = prev[j] if j < len(prev) else 0
        row[j] = j * same + (r - j + 1) * prev[j - 1]
    return tuple(row)


def eulerian_polynomial(r: int) -> EulerianPolynomial:
    if r < 0:
        raise ValueError("r must be nonnegative")
    return EulerianPolynomial(r, _eulerian_row(r))


def _partitions(r: int, largest: Optional[int] = None) -> Iterator[list[int]]:
    # integer partitions of r as non-increasing part lists
    if largest is None:
        largest = r
    if r == 0:
        yield []
        return
    for part in range(min(r, largest), 0, -1):
        for rest in _partitions(r - part, part):
            yield [part] + rest


def multiplicity_vectors(r: int) -> Iterator[tuple[int, ...]]:
    """All (m_1, ..., m_r) >= 0 with m_1 + 2 m_2 + ... + r m_r = r."""
    for parts in _partitions(r):
        m = [0] * r
        for part in parts:
            m[part - 1] += 1
        yield tuple(m)


def _log_coefficient(k: int, j: int) -> Fraction:
    return Fraction((-1) ** (j - 1) * eulerian_polynomial(j)(k), j * (k - 1) ** (j + 1))


@lru_cache(maxsize=None)
def asym_coeff(k: int, r: int) -> Fraction:
    """a_{k,r} as an exact partition sum."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return Fraction(1)
    c = [_log_coefficient(k, j) for j in range(1, r + 1)]
    total = Fraction(0)
    for m in multiplicity_vectors(r):
        term = Fraction(1)
        for j, mj in enumerate(m):
            if mj:
                term *= c[j] ** mj / math.factorial(mj)
        total += term
    return total


def asym_coeffs(k: int, R: int) -> list[Fraction]:
    return [asym_coeff(k, r) for r in range(R + 1)]


# ---------------------------------------------------------------------------
# Somos constants
# ---------------------------------------------------------------------------


def log_shift_tail_bound(k: int, n: int, M: int) -> mpf:
    """Upper bound for sum_{m > M} log(m + n) / k^m, valid for M + n >= 1.

    Uses log(M + n + j) <= log(M + n) + j together with
    sum_{j>=1} k^-j = 1/(k-1) and sum_{j>=1} j k^-j = k/(k-1)^2.
    """
    if M + n < 1:
        raise ValueError("bound needs M + n >= 1")
    return (mpmath.log(M + n) / (k - 1) + mpf(k) / (k - 1) ** 2) / mpf(k) ** M


def _log_shift_sum(k: int, n: int, dps: int) -> tuple[mpf, mpf]:
    # sum_{m>=1} log(m+n)/k^m and an error bound, at the current precision
    target = mpf(10) ** -dps
    M = 1
    while log_shift_tail_bound(k, n, M) > target:
        M += 1
    kk = mpf(k)
    total = mpmath.fsum(mpmath.log(m + n) / kk**m for m in range(1, M + 1))
    err = log_shift_tail_bound(k, n, M) + 4 * M * _eps() * (abs(total) + 1)
    return total, err


def somos_constant(k: int, digits: int) -> HighPrecReal:
    """sigma_k = exp(sum_{m>=1} log(m) / k^m)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if digits < 1:
        raise ValueError("digits must be >= 1")

    def run(dps: int):
        with mpmath.workdps(dps):
            # log(1) = 0, so the shifted sum from m = 1 with n = 0 is the same
            s, e = _log_shift_sum(k, 0, dps)
            value = mpmath.exp(s)
            return value, value * mpmath.expm1(e) + value * _eps()

    return _two_runs(run, digits)


def somos_sequence(n: int) -> int:
    """s_n with s_0 = 1 and s_n = n s_{n-1}^2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    s = 1
    for i in range(1, n + 1):
        s = i * s * s
    return s


# ---------------------------------------------------------------------------
# log g in log space
# ---------------------------------------------------------------------------


def _check_params(params: GoebelParams) -> None:
    if params.k < 2 or params.l < 2:
        raise ValueError("asymptotic quantities need k, l >= 2")


@lru_cache(maxsize=None)
def seed_depth(k: int, l: int) -> int:
    """Largest n <= 12 whose exact value stays within SEED_BITS."""
    try:
        eval_prefix(GoebelParams(k, l), SEED_MAX_N, DigitBudget(SEED_BITS))
        return SEED_MAX_N
    except BudgetExceeded as exc:
        return max(exc.last_n, 1)


def _log_magnitude_digits(k: int, l: int, n: int) -> int:
    # C(n) <= C(1) = l^(1/k), so 0 < log g(n) <= k^(n-1) log l
    return int(mpmath.log10(mpf(k) ** (n - 1) * math.log(l) + 1)) + 3


def _exact_log(x: Fraction) -> mpf:
    return mpmath.log(mpf(x.numerator)) - mpmath.log(mpf(x.denominator))


@lru_cache(maxsize=64)
def _log_g_run(k: int, l: int, n_max: int, dps: int) -> tuple[tuple[mpf, mpf], ...]:
    """(log g(n), err) for n = 1..n_max, at ``dps`` digits after the point."""
    params = GoebelParams(k, l)
    seed = min(seed_depth(k, l), n_max)
    work = dps + _log_magnitude_digits(k, l, n_max)
    out = []
    with mpmath.workdps(work):
        eps = _eps()
        drop_below = mpf(10) ** -(dps)
        for g in eval_prefix(params, seed):
            log_num = mpmath.log(mpf(g.numerator))
            log_den = mpmath.log(mpf(g.denominator))
            out.append((log_num - log_den, 4 * eps * (log_num + log_den + 1)))
        for n in range(seed, n_max):
            L, err = out[-1]
            x = n * mpmath.exp(-(k - 1) * L)
            if x < drop_below:
                # log1p(x) < x: drop the correction and charge it to err
                nxt = k * L - mpmath.log(n + 1)
                new_err = k * err + x
            else:
                nxt = k * L + mpmath.log1p(x) - mpmath.log(n + 1)
                new_err = (k + (k - 1) * x) * err
            new_err += 4 * eps * (k * abs(L) + mpmath.log(n + 1) + 1)
            out.append((nxt, new_err))
    return tuple(out)


def log_g(params: GoebelParams, n: int, digits: int = 30) -> HighPrecReal:
    """log g_{k,l}(n): exact below the seed depth, then
    L(n+1) = k L(n) + log1p(n exp(-(k-1) L(n))) - log(n+1)."""
    _check_params(params)
    if n < 1:
        raise ValueError("n must be >= 1")
    return _two_runs(lambda dps: _log_g_run(params.k, params.l, n, dps)[n - 1], digits)


def C_of_n(params: GoebelParams, n: int, digits: int = 30) -> HighPrecReal:
    """C_{k,l}(n) = g(n)^(1/k^n)."""
    _check_params(params)
    k = params.k

    def run(dps: int):
        L, err = _log_g_run(params.k, params.l, n, dps)[n - 1]
        with mpmath.workdps(dps + 10):
            scale = mpf(k) ** n
            value = mpmath.exp(L / scale)
            return value, value * mpmath.expm1(err / scale) + value * _eps()

    return _two_runs(run, digits)


# ---------------------------------------------------------------------------
# epsilon and the constant C_{k,l}
# ---------------------------------------------------------------------------


def _eps_series(k: int, l: int, n: int, dps: int, absolute_target: mpf) -> tuple[mpf, mpf]:
    """epsilon(n) = sum_{m>=1} k^-m log(1 + (m+n-1) / g(m+n-1)^(k-1)).

    Terms are added until the tail bound drops below ``absolute_target``
    or below 10^-dps relative to the partial sum.  The tail after M terms
    is at most k^-M ((M+n-1)/(k-1) + k/(k-1)^2) / g(M+n)^(k-1) because g
    is nondecreasing.
    """
    kk = mpf(k)
    M = 1
    while True:
        run = _log_g_run(k, l, M + n, dps)
        with mpmath.workdps(dps + _log_magnitude_digits(k, l, M + n)):
            terms = []
            term_err = mpf(0)
            for m in range(1, M + 1):
                L, err = run[m + n - 2]
                x = (m + n - 1) * mpmath.exp(-(k - 1) * L)
                t = mpmath.log1p(x) / kk**m
                terms.append(t)
                # d log1p(x) / dL is at most (k-1) x in magnitude
                term_err += (k - 1) * x * err / kk**m + 4 * _eps() * t
            total = mpmath.fsum(terms)
            L_next, err_next = run[M + n - 1]
            tail = (
                ((M + n - 1) / mpf(k - 1) + kk / (k - 1) ** 2)
                / kk**M
                * mpmath.exp(-(k - 1) * (L_next - err_next))
            )
            if tail < absolute_target or tail < total * mpf(10) ** -dps:
                return total, term_err + tail
        M += 1


def epsilon(params: GoebelParams, n: int, digits: int = 30) -> HighPrecReal:
    """epsilon_{k,l}(n), with ``digits`` significant digits."""
    _check_params(params)
    if n < 1:
        raise ValueError("n must be >= 1")

    def run(dps: int):
        return _eps_series(params.k, params.l, n, dps, mpf(0))

    return _two_runs(run, digits, relative=True)


def default_depth(params: GoebelParams) -> int:
    return seed_depth(params.k, params.l)


@lru_cache(maxsize=64)
def _log_constant_run(k: int, l: int, depth: int, dps: int) -> tuple[mpf, mpf]:
    # log C = log C(n) + k^-n (epsilon(n) - sum_{m>=1} log(m+n)/k^m), n = depth
    run = _log_g_run(k, l, depth, dps)
    L, err_L = run[depth - 1]
    with mpmath.workdps(dps + _log_magnitude_digits(k, l, depth)):
        scale = mpf(k) ** depth
        target = mpf(10) ** -dps * scale
        e_sum, e_err = _eps_series(k, l, depth, dps, target)
        s_sum, s_err = _log_shift_sum(k, depth, dps + _log_magnitude_digits(k, l, depth))
        value = L / scale + (e_sum - s_sum) / scale
        err = (err_L + e_err + s_err) / scale + 8 * _eps() * (abs(value) + 1)
    return value, err


def log_goebel_constant(
    params: GoebelParams, digits: int = 30, depth: Optional[int] = None
) -> HighPrecReal:
    _check_params(params)
    n = depth if depth is not None else default_depth(params)
    if n < 1:
        raise ValueError("depth must be >= 1")
    return _two_runs(lambda dps: _log_constant_run(params.k, params.l, n, dps), digits)


def goebel_constant(
    params: GoebelParams, digits: int = 30, depth: Optional[int] = None
) -> HighPrecReal:
    """C_{k,l} = lim g(n)^(1/k^n).

    ``depth`` is the index n at which the exact identity
    k^n (log C - log C(n)) = epsilon(n) - sum_{m>=1} log(m+n)/k^m is applied;
    it defaults to the deepest exactly computed term (at most 12).
    """
    _check_params(params)
    n = depth if depth is not None else default_depth(params)

    def run(dps: int):
        logc, err = _log_constant_run(params.k, params.l, n, dps)
        with mpmath.workdps(dps + 10):
            value = mpmath.exp(logc)
            return value, value * mpmath.expm1(err) + value * _eps()

    return _two_runs(run, digits)


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticExpansion:
    k: int
    l: int
    constant: HighPrecReal
    log_constant: HighPrecReal
    coeffs: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1


def asymptotic_expansion(params: GoebelParams, R: int, digits: int = 30) -> AsymptoticExpansion:
    _check_params(params)
    return AsymptoticExpansion(
        params.k,
        params.l,
        goebel_constant(params, digits),
        log_goebel_constant(params, digits),
        tuple(asym_coeffs(params.k, R)),
    )


def _poly_part(coeffs: Iterable[Fraction], n: int) -> Fraction:
    return sum((Fraction(a) / Fraction(n) ** r for r, a in enumerate(coeffs)), Fraction(0))


def expansion_eval(exp: AsymptoticExpansion, n: int, R: int) -> HighPrecReal:
    """log of C^(k^n) n^(1/(k-1)) (1 + sum_{r=1}^R a_{k,r} / n^r).

    The result is a logarithm because the value itself overflows any
    fixed exponent range for moderate n.
    """
    if R > exp.order:
        raise ValueError(f"expansion only carries coefficients up to order {exp.order}")
    if n < 1:
        raise ValueError("n must be >= 1")
    k = exp.k
    poly = _poly_part(exp.coeffs[: R + 1], n)
    if poly <= 0:
        raise ValueError(f"truncated series is not positive at n = {n}")
    digits = exp.log_constant.digits
    with mpmath.workdps(digits + int(n * math.log10(k)) + 20):
        scale = mpf(k) ** n
        value = (
            scale * exp.log_constant.value
            + mpmath.log(n) / (k - 1)
            + mpmath.log(mpf(poly.numerator) / poly.denominator)
        )
        err = scale * exp.log_constant.err + 8 * _eps() * abs(value)
    return HighPrecReal(value, err, digits)


def expansion_ratio(exp: AsymptoticExpansion, n: int, R: int, g_value) -> HighPrecReal:
    """g(n) / expansion(n).

    ``g_value`` is either log g(n) as a HighPrecReal or g(n) itself as an
    exact rational.
    """
    approx = expansion_eval(exp, n, R)
    with mpmath.workdps(approx.digits + int(n * math.log10(exp.k)) + 20):
        if isinstance(g_value, HighPrecReal):
            lv, lerr = g_value.value, g_value.err
        else:
            lv = _exact_log(Fraction(g_value))
            lerr = 4 * _eps() * abs(lv)
        ratio = mpmath.exp(lv - approx.value)
        err = ratio * mpmath.expm1(lerr + approx.err)
    return HighPrecReal(ratio, err, approx.digits)


def _log_g_best(params: GoebelParams, n: int, digits: int) -> tuple[mpf, mpf]:
    try:
        g = eval_exact(params, n, DigitBudget(SEED_BITS))
    except BudgetExceeded:
        h = log_g(params, n, digits)
        return h.value, h.err
    L = _exact_log(g)
    return L, 4 * _eps() * (abs(L) + 1)


def convergence_report(
    params: GoebelParams, n_values: Iterable[int], R: int, digits: int = 20
) -> list[dict]:
    """Scaled residuals rho_R(n) = (g(n)/C^(k^n) / n^(1/(k-1)) - sum_{r<=R} a_r/n^r) n^(R+1).

    g(n) comes from the exact value where it fits ``SEED_BITS`` and from
    the log-space recurrence otherwise.  Each record is
    ``{"n", "rho", "err"}`` with mpf values.
    """
    _check_params(params)
    n_values = list(n_values)
    k = params.k
    coeffs = asym_coeffs(k, R)
    n_top = max(n_values)
    need = digits + int((R + 1) * math.log10(n_top)) + int(n_top * math.log10(k)) + 10
    logc = log_goebel_constant(params, need)
    rows = []
    for n in n_values:
        with mpmath.workdps(need + 20):
            L, L_err = _log_g_best(params, n, need)
            scale = mpf(k) ** n
            core = L - scale * logc.value - mpmath.log(n) / (k - 1)
            ratio = mpmath.exp(core)
            poly = _poly_part(coeffs, n)
            weight = mpf(n) ** (R + 1)
            rho = (ratio - mpf(poly.numerator) / poly.denominator) * weight
            err = ratio * mpmath.expm1(L_err + scale * logc.err) * weight
            rows.append({"n": n, "rho": +rho, "err": +err})
    return rows


def error_term(params: GoebelParams, n: int, digits: int = 30) -> HighPrecReal:
    """exp(sum_{m>=1} log(m+n)/k^m) - (C(n)/C)^(k^n)."""
    _check_params(params)
    k = params.k
    extra = int(n * math.log10(k)) + 5
    logc = log_goebel_constant(params, digits + extra)
    Lh = log_g(params, n, digits + extra)
    with mpmath.workdps(digits + extra + 20):
        s, s_err = _log_shift_sum(k, n, digits + extra)
        scale = mpf(k) ** n
        power = mpmath.exp(Lh.value - scale * logc.value)
        value = mpmath.exp(s) - power
        err = mpmath.exp(s) * mpmath.expm1(s_err) + power * mpmath.expm1(
            Lh.err + scale * logc.err
        )
    return HighPrecReal(value, err, digits)


def epsilon_bound(k: int, n: int) -> mpf:
    """2n / exp(k^(n-1))."""
    return 2 * n / mpmath.exp(mpf(k) ** (n - 1))


# ---------------------------------------------------------------------------
# lower-bound sequences
# ---------------------------------------------------------------------------


def lower_bound_limit(k: int, t0, start: int = 0, digits: int = 30) -> HighPrecReal:
    """lim k^-n log t(n) for t(start) = t0, t(m+1) = t(m)^k / (m+1).

    Equals k^-start (log t0 - sum_{j>=1} log(start + j) / k^j).
    """
    t0 = Fraction(t0)

    def run(dps: int):
        with mpmath.workdps(dps + 10):
            s, s_err = _log_shift_sum(k, start, dps)
            scale = mpf(k) ** start
            value = (_exact_log(t0) - s) / scale
            return value, (s_err + 4 * _eps()) / scale

    return _two_runs(run, digits)


def check_lower_bound(
    params: GoebelParams,
    t0,
    n_max: int,
    start: int = 0,
    budget: DigitBudget = DigitBudget(),
) -> VerdictReport:
    """g(n) >= t(n) for every n up to n_max, exactly.

    With ``start = 0`` the premise is l >= t0^k; for a re-based sequence
    with t(start) = t0 it is g(start) >= t0 and the comparison runs from
    n = start.
    """
    k = params.k
    t0 = Fraction(t0)
    if t0 <= 1:
        raise ValueError("t0 must exceed 1")
    if start == 0:
        if params.l < t0**k:
            raise ValueError("premise l >= t0^k fails")
        first = 1
    else:
        if eval_exact(params, start, budget) < t0:
            raise ValueError(f"premise g({start}) >= t0 fails")
        first = start
    bad = []
    for n in range(first, n_max + 1):
        g = eval_exact(params, n, budget)
        t = t_sequence(k, t0, n, budget, start=start)
        if g < t:
            bad.append((k, params.l, n, None))
    return VerdictReport(
        claim=f"g >= t lower bound, t0={t0}, start={start}",
        passed=not bad,
        counterexamples=bad,
        checked=n_max - first + 1,
    )
