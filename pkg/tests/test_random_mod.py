import pytest

from goebel.exact import GoebelParams, eval_exact
from goebel.padic import primes_upto, residue_of
from goebel.random_mod import (
    ALL_DISTINCT,
    SINGLETON_ZERO,
    VIOLATION,
    classify,
    lemma_holds,
    residue_set,
    scan_nonintegral_primes,
    verify_random_theorem,
)

from oracles import lifted_padic_values

EXAMPLE_4_4 = [130, 143, 65, 52, 156, 13, 117, 104, 26, 39, 78]


def test_all_distinct_example():
    report = residue_set(GoebelParams(4, 4), 13, 2)
    assert report.index_set == list(range(2, 13))
    assert report.residues == EXAMPLE_4_4
    assert report.verdict == ALL_DISTINCT


def test_singleton_zero_example():
    report = residue_set(GoebelParams(3, 2), 13, 2)
    assert report.verdict == SINGLETON_ZERO
    assert report.index_set
    assert set(report.residues) == {0}


def test_empty_index_set_is_all_distinct():
    assert classify([]) == ALL_DISTINCT
    empty = [
        (k, l, p)
        for k in range(2, 6)
        for l in range(2, 6)
        for p in (5, 7, 11)
        if not residue_set(GoebelParams(k, l), p, 2).index_set
    ]
    assert empty
    k, l, p = empty[0]
    report = residue_set(GoebelParams(k, l), p, 2)
    assert report.residues == [] and report.verdict == ALL_DISTINCT


def test_classify():
    assert classify([0, 0, 0]) == SINGLETON_ZERO
    assert classify([13, 26]) == ALL_DISTINCT
    assert classify([13, 26, 13]) == VIOLATION


def test_residues_against_exact():
    for k, l, p in [(4, 4, 13), (3, 2, 13), (2, 5, 11), (5, 3, 7)]:
        for r in (2, 3):
            report = residue_set(GoebelParams(k, l), p, r)
            for n, a in zip(report.index_set, report.residues):
                try:
                    g = eval_exact(GoebelParams(k, l), n)
                except ArithmeticError:
                    continue
                assert residue_of(g, p, r) == a


def test_to_dict():
    d = residue_set(GoebelParams(4, 4), 13, 2).to_dict()
    assert d["verdict"] == ALL_DISTINCT and d["residues"] == EXAMPLE_4_4
    assert list(d) == ["k", "l", "p", "r", "verdict", "index_set", "residues"]


def test_argument_checks():
    with pytest.raises(ValueError):
        residue_set(GoebelParams(2, 2), 12, 2)
    with pytest.raises(ValueError):
        residue_set(GoebelParams(2, 2), 13, 1)


def test_lemma_examples():
    assert lemma_holds(GoebelParams(4, 4), 13, 2)
    assert lemma_holds(GoebelParams(3, 2), 13, 2)


def test_theorem_small_box():
    report = verify_random_theorem(6, 23, 3)
    assert report.passed, report.summary()
    assert report.checked == 25 * len(primes_upto(23)) * 2


def test_scan_examples():
    assert scan_nonintegral_primes(GoebelParams(2, 3), 7) == [7]
    assert scan_nonintegral_primes(GoebelParams(2, 2), 41) == []


def test_scan_2_2_to_90():
    found = scan_nonintegral_primes(GoebelParams(2, 2), 90)
    assert found == [43, 61, 67, 83]


def test_scan_against_lifted_oracle():
    expected = [
        p for p in primes_upto(90) if lifted_padic_values(2, 2, p, p)[p - 1][0] < 0
    ]
    assert expected == scan_nonintegral_primes(GoebelParams(2, 2), 90)
