import pickle
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goebel.exact import EXCEEDS_CAP, GoebelParams, eval_exact
from goebel.padic import (
    NON_INTEGRAL,
    BudgetUnderflow,
    PrimePowerContext,
    Residue,
    check_key_lemma,
    compute_N,
    compute_N_reference,
    initial_state,
    is_prime,
    mod_inverse,
    nu_p,
    nu_p_factorial,
    padic_eval,
    padic_step,
    primes_upto,
    residue_of,
    totient,
)

from oracles import (
    legendre_bruteforce,
    lifted_padic_values,
    reference_states,
    totient_bruteforce,
)


def test_nu_p_examples():
    assert nu_p(2, 48) == 4
    assert nu_p(7, Fraction(1, 7)) == -1
    assert nu_p(3, Fraction(18, 5)) == 2


def test_nu_p_zero_is_undefined():
    with pytest.raises(ValueError):
        nu_p(5, 0)


def test_nu_p_factorial_examples():
    assert nu_p_factorial(2, 7) == 4
    assert nu_p_factorial(11, 7) == 0
    assert nu_p_factorial(3, 9) == 4
    assert nu_p_factorial(5, 0) == 0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7, 11, 13]), st.integers(0, 120))
def test_legendre_against_factorization(p, n):
    assert nu_p_factorial(p, n) == legendre_bruteforce(p, n)


@pytest.mark.parametrize("m,phi", [(16, 8), (1, 1), (49, 42), (13, 12)])
def test_totient_examples(m, phi):
    assert totient(m) == phi


def test_totient_against_counting():
    for m in range(1, 300):
        assert totient(m) == totient_bruteforce(m)


def test_primes():
    assert primes_upto(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert [n for n in range(60) if is_prime(n)] == primes_upto(59)


def test_mod_inverse_trivial_modulus():
    assert mod_inverse(7, 1) == 1
    assert mod_inverse(3, 7) == 5


def test_residue_of():
    assert residue_of(Fraction(1, 2), 3, 2) == 5
    with pytest.raises(ValueError):
        residue_of(Fraction(1, 3), 3, 2)


def test_context_validation():
    with pytest.raises(ValueError):
        PrimePowerContext(4, 2)
    with pytest.raises(ValueError):
        PrimePowerContext(5, 0)


def test_nonintegral_is_absorbing():
    ctx = PrimePowerContext(5, 3)
    for n in (2, 5, 9):
        assert padic_step(ctx, GoebelParams(3, 4), n, NON_INTEGRAL) is NON_INTEGRAL


def test_nonintegral_singleton_survives_pickle():
    assert pickle.loads(pickle.dumps(NON_INTEGRAL)) is NON_INTEGRAL


def test_step_into_43_fails_for_2_2():
    ctx = PrimePowerContext(43, 1)
    params = GoebelParams(2, 2)
    prev = padic_eval(ctx, params, 42)
    assert isinstance(prev, Residue) and prev.b == 1
    assert padic_step(ctx, params, 43, prev) is NON_INTEGRAL


def test_step_checks_budget_bookkeeping():
    ctx = PrimePowerContext(2, 4)
    with pytest.raises(ValueError):
        padic_step(ctx, GoebelParams(2, 2), 3, Residue(2, 4))


def test_budget_underflow():
    ctx = PrimePowerContext(2, 3)
    padic_eval(ctx, GoebelParams(2, 2), 5)
    with pytest.raises(BudgetUnderflow):
        padic_eval(ctx, GoebelParams(2, 2), 6)


def test_budget_law():
    ctx = PrimePowerContext(3, 6)
    for n in range(1, 15):
        state = padic_eval(ctx, GoebelParams(2, 5), n)
        if state is not NON_INTEGRAL:
            assert state.b == 6 - nu_p_factorial(3, n)


def test_padic_eval_examples():
    assert padic_eval(PrimePowerContext(13, 2), GoebelParams(4, 4), 3) == Residue(143, 2)
    assert padic_eval(PrimePowerContext(5, 1), GoebelParams(2, 2), 1) == Residue(2, 1)
    assert padic_eval(PrimePowerContext(7, 1), GoebelParams(2, 3), 7) is NON_INTEGRAL


def test_initial_state_reduces_l():
    assert initial_state(PrimePowerContext(3, 2), GoebelParams(2, 20)) == Residue(2, 2)


@pytest.mark.parametrize("k,l,N", [(2, 2, 43), (11, 15, 1097), (17, 17, 59), (2, 3, 7), (3, 2, 89)])
def test_compute_N_examples(k, l, N):
    assert compute_N(GoebelParams(k, l)) == N


def test_compute_N_cap():
    assert compute_N(GoebelParams(2, 2), cap=42) == EXCEEDS_CAP
    assert compute_N(GoebelParams(2, 2), cap=43) == 43


@pytest.mark.parametrize("k,l", [(2, 2), (3, 5), (8, 10), (5, 7), (4, 2), (2, 9)])
def test_compute_N_matches_reference(k, l):
    params = GoebelParams(k, l)
    assert compute_N(params, cap=300) == compute_N_reference(params, cap=300)


def test_compute_N_rejects_degenerate():
    with pytest.raises(ValueError):
        compute_N(GoebelParams(1, 3))


def test_key_lemma_k_periodicity():
    # 12 - 4 = phi(16)
    report = check_key_lemma([4, 12], [2], 7, p=2, r=4)
    assert report.passed, report.summary()
    assert report.checked > 0


def test_key_lemma_l_periodicity():
    report = check_key_lemma([2, 3, 4, 5], [3, 10], 7, p=7, r=1)
    assert report.passed, report.summary()


def test_key_lemma_small_index():
    report = check_key_lemma([3], [2], 7, p=11, r=1)
    assert report.passed
    assert eval_exact(GoebelParams(3, 2), 7).denominator % 11 != 0


def test_key_lemma_box():
    for p, r in [(2, 4), (3, 2), (5, 1)]:
        report = check_key_lemma(range(2, 8), range(2, 12), 8, p=p, r=r)
        assert report.passed, report.summary()


def test_lifted_oracle_matches_fractions():
    # the two oracles overlap wherever exact terms are small
    for k, l in [(2, 2), (2, 3), (3, 2), (3, 7), (4, 4)]:
        for p in (2, 3, 5, 7):
            lifted = lifted_padic_values(k, l, p, 8)
            for n in range(1, 9):
                x = eval_exact(GoebelParams(k, l), n)
                val, g = lifted[n - 1]
                assert val == nu_p(p, x)
                if val >= 0:
                    mod = p**6
                    assert g.residue(6) == residue_of(x, p, 6) % mod


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_padic_eval_against_reference(p):
    # r = v_13(12!) would be 0, which is not a valid budget; r = 1 is the
    # smallest one and still covers every n <= 12.
    r = max(1, nu_p_factorial(p, 12))
    ctx = PrimePowerContext(p, r)
    for k in range(2, 11):
        for l in range(2, 11):
            ref = reference_states(k, l, p, r, 12)
            for n, (verdict, res, _) in enumerate(ref, start=1):
                state = padic_eval(ctx, GoebelParams(k, l), n)
                if verdict == "F":
                    assert state is NON_INTEGRAL, (k, l, p, n)
                else:
                    assert state == Residue(res, r - nu_p_factorial(p, n)), (k, l, p, n)
