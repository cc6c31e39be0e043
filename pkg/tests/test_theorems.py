from dataclasses import replace

import pytest

from goebel.exact import EXCEEDS_CAP, GoebelParams, eval_exact
from goebel.padic import nu_p
from goebel.theorems import (
    NTable,
    build_table,
    classify_N7,
    compare_table,
    load_table1,
    table1_text,
    verify_min7_reduction,
)


def test_fixture_shape():
    table = load_table1()
    assert table.k_range == (2, 17) and table.l_range == (2, 17)
    assert table.get(2, 2) == 43
    assert table.get(11, 15) == 1097
    assert table.get(17, 17) == 59
    assert max(cell for _, _, cell in table.cells()) == 1097


def test_fixture_round_trips_byte_for_byte():
    assert load_table1().to_csv() == table1_text()


def test_full_grid_matches_fixture(full_table):
    report = compare_table(full_table, load_table1())
    assert report.passed, report.summary()
    assert report.checked == 256
    assert full_table.to_csv() == table1_text()


def test_single_cells():
    assert build_table((6, 6), (10, 10)).get(6, 10) == 347
    assert build_table((2, 2), (2, 2)).entries == [[43]]


def test_parallel_build_matches_serial():
    serial = build_table((2, 6), (2, 5))
    parallel = build_table((2, 6), (2, 5), jobs=2)
    assert serial.entries == parallel.entries


def test_cap_yields_exceeds_cap_cells():
    table = build_table((2, 3), (2, 2), cap=50)
    assert table.entries == [[43, EXCEEDS_CAP]]


def test_table_rejects_bad_ranges():
    with pytest.raises(ValueError):
        build_table((1, 4), (2, 4))
    with pytest.raises(ValueError):
        NTable((2, 3), (2, 2), [[5]], 100)


def test_compare_table_self_and_perturbed():
    table = load_table1()
    assert compare_table(table, table).passed
    entries = [row[:] for row in table.entries]
    entries[3][4] += 1
    perturbed = replace(table, entries=entries)
    report = compare_table(table, perturbed)
    assert not report.passed
    # row 3 is l = 5, column 4 is k = 6
    assert report.counterexamples == [(6, 5, table.get(6, 5), table.get(6, 5) + 1)]


def test_minimum_is_seven(full_table):
    assert min(cell for _, _, cell in full_table.cells()) == 7


def test_seven_cells(full_table):
    sevens = {(k, l) for k, l, cell in full_table.cells() if cell == 7}
    assert sevens == {(k, l) for k in (2, 8, 14) for l in (3, 10, 17)}


def test_main1_reduction():
    report = verify_min7_reduction()
    assert report.passed, report.summary()
    assert [part.claim for part in report.parts] == [
        "main1-claim-p2",
        "main1-claim-p3",
        "main1-claim-p5",
        "main1-claim-p7",
    ]


def test_2_3_fails_only_at_seven():
    g = eval_exact(GoebelParams(2, 3), 7)
    assert nu_p(7, g) < 0
    assert nu_p(2, g) >= 0


def test_classify_small_box():
    report = classify_N7(30, 30)
    assert report.passed, report.summary()
    assert report.checked == 29 * 29


def test_classify_examples(full_table):
    assert full_table.get(8, 10) == 7 and 8 % 6 == 2 and 10 % 7 == 3
    assert full_table.get(14, 17) == 7
    assert full_table.get(2, 2) == 43 and 2 % 7 != 3


@pytest.mark.slow
def test_classify_full_range():
    assert classify_N7(200, 200).passed
