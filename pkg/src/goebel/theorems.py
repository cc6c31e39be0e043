"""Tables of N_{k,l} and the finite checks behind the minimum-index theorem."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

from .exact import EXCEEDS_CAP, GoebelParams
from .padic import (
    NON_INTEGRAL,
    PrimePowerContext,
    compute_N,
    nu_p_factorial,
    padic_eval,
)
from .reports import VerdictReport

Cell = Union[int, str]


@dataclass
class NTable:
    """Grid of N_{k,l}; ``entries[i][j]`` is the cell for l = l_lo + i, k = k_lo + j."""

    k_range: tuple[int, int]
    l_range: tuple[int, int]
    entries: list[list[Cell]]
    cap: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        k_lo, k_hi = self.k_range
        l_lo, l_hi = self.l_range
        if len(self.entries) != l_hi - l_lo + 1 or any(
            len(row) != k_hi - k_lo + 1 for row in self.entries
        ):
            raise ValueError("entries do not match the k and l ranges")
        for row in self.entries:
            for cell in row:
                if cell != EXCEEDS_CAP and not 2 <= cell <= self.cap:
                    raise ValueError(f"cell value {cell} outside 2..{self.cap}")

    @property
    def ks(self) -> range:
        return range(self.k_range[0], self.k_range[1] + 1)

    @property
    def ls(self) -> range:
        return range(self.l_range[0], self.l_range[1] + 1)

    def get(self, k: int, l: int) -> Cell:
        return self.entries[l - self.l_range[0]][k - self.k_range[0]]

    def cells(self):
        for l, row in zip(self.ls, self.entries):
            for k, cell in zip(self.ks, row):
                yield k, l, cell

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["l\\k", *self.ks])
        for l, row in zip(self.ls, self.entries):
            writer.writerow([l, *row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, cap: int = 5000) -> "NTable":
        rows = list(csv.reader(io.StringIO(text)))
        ks = [int(x) for x in rows[0][1:]]
        ls = [int(row[0]) for row in rows[1:]]
        entries = [
            [int(x) if x != EXCEEDS_CAP else EXCEEDS_CAP for x in row[1:]]
            for row in rows[1:]
        ]
        return cls((ks[0], ks[-1]), (ls[0], ls[-1]), entries, cap)


def table1_text() -> str:
    return resources.files("goebel").joinpath("data/table1.csv").read_text()


def load_table1() -> NTable:
    return NTable.from_csv(table1_text())


def _cell(args: tuple[int, int, int]) -> Cell:
    k, l, cap = args
    return compute_N(GoebelParams(k, l), cap)


def default_jobs() -> int:
    env = os.environ.get("GOEBEL_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_table(
    k_range: tuple[int, int],
    l_range: tuple[int, int],
    cap: int = 5000,
    jobs: Optional[int] = 1,
) -> NTable:
    k_lo, k_hi = k_range
    l_lo, l_hi = l_range
    if min(k_lo, l_lo) < 2 or k_hi < k_lo or l_hi < l_lo:
        raise ValueError("ranges must lie in 2..cap and be nonempty")
    tasks = [(k, l, cap) for l in range(l_lo, l_hi + 1) for k in range(k_lo, k_hi + 1)]
    jobs = default_jobs() if jobs is None else jobs
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map() yields in submission order, so the grid is independent of
            # completion order.
            flat = list(pool.map(_cell, tasks, chunksize=4))
    else:
        flat = [_cell(t) for t in tasks]
    width = k_hi - k_lo + 1
    entries = [flat[i : i + width] for i in range(0, len(flat), width)]
    return NTable(k_range, l_range, entries, cap)


def compare_table(computed: NTable, reference: NTable) -> VerdictReport:
    """Cell-by-cell diff; counterexamples are (k, l, computed, reference)."""
    if computed.k_range != reference.k_range or computed.l_range != reference.l_range:
        raise ValueError("tables cover different ranges")
    diffs = [
        (k, l, cell, reference.get(k, l))
        for k, l, cell in computed.cells()
        if cell != reference.get(k, l)
    ]
    return VerdictReport(
        claim="table-match",
        passed=not diffs,
        counterexamples=diffs,
        checked=len(computed.entries) * len(computed.entries[0]),
    )


# (p, k range, l range) for the four claims at index 7.
MAIN1_CLAIMS = [
    (2, range(2, 12), range(1, 17)),
    (3, range(2, 8), range(1, 10)),
    (5, range(1, 5), range(1, 6)),
    (7, range(1, 7), range(1, 8)),
]


def _integral_at_7(k: int, l: int, p: int) -> bool:
    ctx = PrimePowerContext(p, nu_p_factorial(p, 7))
    return padic_eval(ctx, GoebelParams(k, l), 7) is not NON_INTEGRAL


def verify_min7_reduction() -> VerdictReport:
    """The four finite claims at n = 7 for p = 2, 3, 5, 7.

    For p = 2, 3, 5 every g_{k,l}(7) in the box must be p-integral; for
    p = 7 it must fail to be 7-integral exactly at (k, l) = (2, 3).
    """
    parts = []
    for p, ks, ls in MAIN1_CLAIMS:
        bad = []
        for k in ks:
            for l in ls:
                integral = _integral_at_7(k, l, p)
                expected = not (p == 7 and (k, l) == (2, 3))
                if integral != expected:
                    bad.append((k, l, 7, p))
        parts.append(
            VerdictReport(
                claim=f"main1-claim-p{p}",
                passed=not bad,
                counterexamples=bad,
                checked=len(ks) * len(ls),
            )
        )
    failures = [c for part in parts for c in part.counterexamples]
    return VerdictReport(
        claim="main1-reduction",
        passed=not failures,
        counterexamples=failures,
        checked=sum(part.checked for part in parts),
        parts=parts,
    )


def classify_N7(k_max: int = 200, l_max: int = 200) -> VerdictReport:
    """Check N_{k,l} = 7 iff k = 2 mod 6 and l = 3 mod 7, and N_{k,l} >= 7.

    compute_N with cap 7 returns the true N whenever N <= 7 and
    ``EXCEEDS_CAP`` otherwise, which is all either assertion needs.
    Counterexamples are (k, l, result, None).
    """
    if k_max < 2 or l_max < 2:
        raise ValueError("k_max and l_max must be >= 2")
    bad = []
    for k in range(2, k_max + 1):
        for l in range(2, l_max + 1):
            result = compute_N(GoebelParams(k, l), cap=7)
            predicted = k % 6 == 2 and l % 7 == 3
            if result != EXCEEDS_CAP and result < 7:
                bad.append((k, l, result, None))
            elif (result == 7) != predicted:
                bad.append((k, l, result, None))
    return VerdictReport(
        claim=f"N=7 classification k<={k_max} l<={l_max}",
        passed=not bad,
        counterexamples=bad,
        checked=(k_max - 1) * (l_max - 1),
    )
