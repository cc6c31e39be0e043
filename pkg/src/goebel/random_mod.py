"""Residues of g_{k,l}(n) modulo p^r for 1 <= n < p.

Restricting to the indices where g(n) = 0 mod p^(r-1), the residues mod p^r
are either all zero or pairwise distinct.  Below p no index carries a
factor of p, so the p-adic run keeps its full budget r throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exact import GoebelParams
from .padic import (
    NON_INTEGRAL,
    PrimePowerContext,
    is_prime,
    padic_eval,
    primes_upto,
)
from .reports import VerdictReport

SINGLETON_ZERO = "singleton-zero"
ALL_DISTINCT = "all-distinct"
VIOLATION = "violation"


class NotPIntegral(ArithmeticError):
    pass


@dataclass
class ResidueSetReport:
    k: int
    l: int
    p: int
    r: int
    index_set: list[int] = field(default_factory=list)
    residues: list[int] = field(default_factory=list)
    verdict: str = ALL_DISTINCT

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "p": self.p,
            "r": self.r,
            "verdict": self.verdict,
            "index_set": list(self.index_set),
            "residues": list(self.residues),
        }


def _residues_below_p(params: GoebelParams, p: int, r: int) -> list[int]:
    ctx = PrimePowerContext(p, r)
    out = []
    for n in range(1, p):
        state = padic_eval(ctx, params, n)
        if state is NON_INTEGRAL:
            raise NotPIntegral(f"g_{{{params.k},{params.l}}}({n}) is not {p}-integral")
        out.append(state.a)
    return out


def classify(residues: list[int]) -> str:
    if residues and all(a == 0 for a in residues):
        return SINGLETON_ZERO
    if len(set(residues)) == len(residues):
        return ALL_DISTINCT
    return VIOLATION


def residue_set(params: GoebelParams, p: int, r: int) -> ResidueSetReport:
    if params.k < 2 or params.l < 2 or r < 2:
        raise ValueError("need k, l, r >= 2")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    values = _residues_below_p(params, p, r)
    step = p ** (r - 1)
    index_set = [n for n, a in enumerate(values, start=1) if a % step == 0]
    residues = [values[n - 1] for n in index_set]
    return ResidueSetReport(
        params.k, params.l, p, r, index_set, residues, classify(residues)
    )


def lemma_holds(params: GoebelParams, p: int, r: int) -> bool:
    """n g(n) = a b p^(r-1) mod p^r for a <= n < p, where a is the first
    index with g(a) = 0 mod p^(r-1) and g(a) = b p^(r-1) mod p^r."""
    values = _residues_below_p(params, p, r)
    step, mod = p ** (r - 1), p**r
    hits = [n for n, a in enumerate(values, start=1) if a % step == 0]
    if not hits:
        return True
    a = hits[0]
    b = values[a - 1] // step
    target = a * b * step % mod
    return all(n * values[n - 1] % mod == target for n in range(a, p))


def verify_random_theorem(k_max: int, p_max: int, r_max: int) -> VerdictReport:
    """Dichotomy and lemma over 2 <= k, l <= k_max, p <= p_max, 2 <= r <= r_max."""
    bad = []
    checked = 0
    for k in range(2, k_max + 1):
        for l in range(2, k_max + 1):
            params = GoebelParams(k, l)
            for p in primes_upto(p_max):
                for r in range(2, r_max + 1):
                    checked += 1
                    report = residue_set(params, p, r)
                    if report.verdict == VIOLATION:
                        bad.append((k, l, None, p, r, "dichotomy"))
                    if not lemma_holds(params, p, r):
                        bad.append((k, l, None, p, r, "lemma"))
    return VerdictReport(
        claim=f"residue dichotomy k,l<={k_max} p<={p_max} r<={r_max}",
        passed=not bad,
        counterexamples=bad,
        checked=checked,
    )


def scan_nonintegral_primes(params: GoebelParams, p_max: int) -> list[int]:
    """Primes p <= p_max with g_{k,l}(p) not p-integral (budget v_p(p!) = 1)."""
    found = []
    for p in primes_upto(p_max):
        if padic_eval(PrimePowerContext(p, 1), params, p) is NON_INTEGRAL:
            found.append(p)
    return found
