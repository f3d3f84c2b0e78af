from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pytest

from metarank.bifiltration import GradedComplex, GradeMap, RawSimplex, refine_to_simplexwise
from metarank.generators import random_flag, random_shelling
from metarank.mrk import MetaRankTable, compute_metarank
from metarank.oracle import RankFunction, rank_invariant
from metarank.signed import MetaDiagram, mobius_invert

CORPUS_SIZE = 210
CORPUS_SEED = 20240611


@dataclass
class Case:
    name: str
    complex: GradedComplex
    gmap: GradeMap
    generic: bool  # real grade values with no ties on either axis
    _table: MetaRankTable | None = field(default=None, repr=False)
    _rank: RankFunction | None = field(default=None, repr=False)
    _mdgm: MetaDiagram | None = field(default=None, repr=False)

    @property
    def table(self) -> MetaRankTable:
        if self._table is None:
            self._table = compute_metarank(self.complex)
        return self._table

    @property
    def rank(self) -> RankFunction:
        if self._rank is None:
            self._rank = rank_invariant(self.complex)
        return self._rank

    @property
    def mdgm(self) -> MetaDiagram:
        if self._mdgm is None:
            self._mdgm = mobius_invert(self.table)
        return self._mdgm

    @property
    def dims(self) -> list[int]:
        return list(range(self.complex.max_dim + 1))


def _generic(g: GradeMap) -> bool:
    return all(len(set(g.values(ax))) == g.n for ax in ("x", "y"))


def build_corpus(size: int = CORPUS_SIZE, seed: int = CORPUS_SEED) -> list[Case]:
    """Flag complexes with real grades, flag complexes with tied integer grades, and shellings; 5 <= n <= 40."""
    out = []
    for i in range(size):
        rng = np.random.default_rng([seed, i])
        kind = i % 3
        if kind == 2:
            cx, g = random_shelling(rng, int(rng.integers(7, 41)))
            name = f"shelling-{i}"
        else:
            n_max = int(rng.integers(5, 41))
            nv = int(rng.integers(3, 10))
            cx, g = random_flag(rng, n_max=n_max, n_vertices=nv, p=0.6, integer_grades=(kind == 1))
            name = f"flag-{'int' if kind else 'real'}-{i}"
        if cx.n < 5:
            continue
        out.append(Case(name, cx, g, _generic(g)))
    return out


@pytest.fixture(scope="session")
def corpus() -> list[Case]:
    return build_corpus()


TRIANGLE_TEXT = """\
0 ; 0 0
1 ; 1 0
2 ; 0 1
0 1 ; 1 0.5
0 2 ; 0.5 1
1 2 ; 1 1
0 1 2 ; 2 2
"""


@pytest.fixture
def triangle() -> tuple[GradedComplex, GradeMap]:
    raw = [
        RawSimplex((0,), 0, 0), RawSimplex((1,), 1, 0), RawSimplex((2,), 0, 1),
        RawSimplex((0, 1), 1, 0.5), RawSimplex((0, 2), 0.5, 1), RawSimplex((1, 2), 1, 1),
        RawSimplex((0, 1, 2), 2, 2),
    ]
    return refine_to_simplexwise(raw)


@pytest.fixture
def triangle_file(tmp_path):
    p = tmp_path / "triangle.txt"
    p.write_text(TRIANGLE_TEXT)
    return str(p)


# acceptance report: one line per criterion, printed after the run
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def report():
    def record(criterion: int, ok: bool, detail: str) -> None:
        ACCEPTANCE.setdefault(criterion, []).append((ok, detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for p, _ in parts)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  " + "; ".join(d for _, d in parts))
