"""Signed barcodes, Moebius inversion of meta-rank tables, and rank decompositions."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .bifiltration import GradedComplex
from .mrk import CellArrays, MetaRankTable, iter_rows
from .reduction import InvariantError

Bar = tuple[int, int]
Rect = tuple[int, int, int, int]  # (s, t, lo, hi): [s, t] x [lo, hi]


class SignedBarcode(Mapping):
    """Bar -> non-zero integer multiplicity (a canonical element of the signed module group)."""

    __slots__ = ("_m",)

    def __init__(self, mult: Mapping[Bar, int] | Iterable[tuple[Bar, int]] = ()):
        items = mult.items() if isinstance(mult, Mapping) else mult
        m: dict[Bar, int] = {}
        for bar, k in items:
            m[bar] = m.get(bar, 0) + int(k)
        self._m = {b: k for b, k in sorted(m.items()) if k}

    def __getitem__(self, bar: Bar) -> int:
        return self._m[bar]

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __repr__(self):
        terms = [f"{'+' if k > 0 else '-'}{abs(k) if abs(k) != 1 else ''}[{lo},{hi}]" for (lo, hi), k in self._m.items()]
        return "SignedBarcode(" + (" ".join(terms) or "0") + ")"

    def __eq__(self, other):
        if isinstance(other, SignedBarcode):
            return self._m == other._m
        if isinstance(other, Mapping):
            return self._m == {b: k for b, k in other.items() if k}
        return NotImplemented

    def __add__(self, other: SignedBarcode) -> SignedBarcode:
        return SignedBarcode(list(self._m.items()) + list(other.items()))

    def __neg__(self) -> SignedBarcode:
        return SignedBarcode({b: -k for b, k in self._m.items()})

    def __sub__(self, other: SignedBarcode) -> SignedBarcode:
        return self + (-other)

    @property
    def positive(self) -> Counter:
        return Counter({b: k for b, k in self._m.items() if k > 0})

    @property
    def negative(self) -> Counter:
        return Counter({b: -k for b, k in self._m.items() if k < 0})

    def counts(self) -> tuple[int, int]:
        return sum(self.positive.values()), sum(self.negative.values())


def canonicalize(pos: Iterable[Bar] | Mapping[Bar, int], neg: Iterable[Bar] | Mapping[Bar, int]) -> SignedBarcode:
    """The representative with disjoint positive and negative parts."""
    p = Counter(pos)
    q = Counter(neg)
    return SignedBarcode(list(p.items()) + [(b, -k) for b, k in q.items()])


@dataclass
class MetaDiagram:
    """Per homology dimension: cell (s, t) -> SignedBarcode (absent cells are zero)."""

    n: int
    cells: dict[int, dict[tuple[int, int], SignedBarcode]] = field(default_factory=dict)

    def get(self, dim: int, s: int, t: int) -> SignedBarcode:
        return self.cells.get(dim, {}).get((s, t), SignedBarcode())

    @property
    def dims(self) -> list[int]:
        return sorted(self.cells)


@dataclass
class RankDecomposition:
    """Positive and negative rectangle multisets, (s, t, lo, hi) = [s, t] x [lo, hi]."""

    R: Counter
    S: Counter

    def rank(self, p: tuple[int, int], q: tuple[int, int]) -> int:
        (a, b), (c, e) = p, q

        def count(rects: Counter) -> int:
            return sum(m for (s, t, lo, hi), m in rects.items() if s <= a and c <= t and lo <= b and e <= hi)

        return count(self.R) - count(self.S)


def _keys(cell: CellArrays | None, n: int) -> np.ndarray:
    """Encode (dim, lo, hi) as one integer per bar."""
    if cell is None:
        return np.zeros(0, dtype=np.int64)
    d, lo, hi = cell
    w = n + 2
    return (d.astype(np.int64) * w + lo) * w + hi


def _decode(keys: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w = n + 2
    return keys // (w * w), (keys // w) % w, keys % w


def _signed_sum(plus: list[np.ndarray], minus: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Canonical signed multiset of bar keys: (keys, non-zero multiplicities)."""
    allk = np.concatenate(plus + minus)
    if allk.size == 0:
        return allk, allk
    w = np.concatenate([np.ones(sum(len(a) for a in plus), dtype=np.int64),
                        -np.ones(sum(len(a) for a in minus), dtype=np.int64)])
    uk, inv = np.unique(allk, return_inverse=True)
    mult = np.bincount(inv, weights=w, minlength=len(uk)).astype(np.int64)
    nz = mult != 0
    return uk[nz], mult[nz]


def _invert_row(row_t: list[CellArrays | None], row_next: list[CellArrays | None] | None, t: int, n: int
                ) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Moebius inversion of row t, given row t+1 (None past the grid).

    mdgm[s,t] = mrk[s,t] - mrk[s,t+1] + mrk[s-1,t+1] - mrk[s-1,t], with
    out-of-range cells read as zero.
    """
    keys_t = [_keys(c, n) for c in row_t]
    keys_n = [_keys(c, n) for c in row_next] if row_next is not None else None
    empty = np.zeros(0, dtype=np.int64)
    for s in range(1, t + 1):
        plus = [keys_t[s - 1]]
        minus = []
        if keys_n is not None:
            minus.append(keys_n[s - 1])
            if s > 1:
                plus.append(keys_n[s - 2])
        if s > 1:
            minus.append(keys_t[s - 2])
        k, m = _signed_sum(plus, minus or [empty])
        if len(k):
            yield s, k, m


def _table_rows(table: MetaRankTable) -> list[list[CellArrays | None]]:
    n = table.n
    return [[table.cells.get((k, t)) for k in range(1, t + 1)] for t in range(1, n + 1)]


def mobius_invert(table: MetaRankTable) -> MetaDiagram:
    """Meta-diagram of a meta-rank table (interior, boundary and corner cases)."""
    n = table.n
    out = MetaDiagram(n)
    rows = _table_rows(table)
    for t in range(1, n + 1):
        nxt = rows[t] if t < n else None
        for s, keys, mult in _invert_row(rows[t - 1], nxt, t, n):
            d, lo, hi = _decode(keys, n)
            for dd in np.unique(d).tolist():
                m = d == dd
                out.cells.setdefault(int(dd), {})[(s, t)] = SignedBarcode(
                    zip(zip(lo[m].tolist(), hi[m].tolist()), mult[m].tolist())
                )
    return out


def mobius_invert_cells(cells: Mapping[tuple[int, int], Counter], n: int) -> dict[tuple[int, int], SignedBarcode]:
    """Direct cell-by-cell inversion of one dimension's bar multisets (reference form)."""
    out = {}
    z = Counter()
    for s in range(1, n + 1):
        for t in range(s, n + 1):
            acc = SignedBarcode(cells.get((s, t), z))
            if t < n:
                acc = acc - SignedBarcode(cells.get((s, t + 1), z))
                if s > 1:
                    acc = acc + SignedBarcode(cells.get((s - 1, t + 1), z))
            if s > 1:
                acc = acc - SignedBarcode(cells.get((s - 1, t), z))
            if acc:
                out[(s, t)] = acc
    return out


def mrk_from_mdgm(mdgm: MetaDiagram, dim: int, s: int, t: int) -> Counter:
    """Sum of mdgm over all grid intervals [a, b] containing [s, t]."""
    if s > t:
        raise ValueError("need s <= t")
    acc: Counter = Counter()
    for (a, b), sb in mdgm.cells.get(dim, {}).items():
        if a <= s and t <= b:
            for bar, k in sb.items():
                acc[bar] += k
    if any(k < 0 for k in acc.values()):
        raise InvariantError(f"negative multiplicity recovered at cell [{s},{t}] in dim {dim}")
    return +acc


def mrk_from_mdgm_all(mdgm: MetaDiagram, dim: int) -> dict[tuple[int, int], Counter]:
    """Every cell of the meta-rank from the meta-diagram by 2-d suffix sums (n^2 cells)."""
    n = mdgm.n
    cells = mdgm.cells.get(dim, {})
    bars = sorted({b for sb in cells.values() for b in sb})
    if not bars:
        return {}
    idx = {b: j for j, b in enumerate(bars)}
    acc = np.zeros((n + 2, n + 2, len(bars)), dtype=np.int64)
    for (a, b), sb in cells.items():
        for bar, k in sb.items():
            acc[a, b, idx[bar]] += k
    # value at (s, t) = sum over a <= s, b >= t
    acc = np.cumsum(acc, axis=0)
    acc = np.flip(np.cumsum(np.flip(acc, axis=1), axis=1), axis=1)
    if np.any(acc < 0):
        s, t, _ = np.argwhere(acc < 0)[0]
        raise InvariantError(f"negative multiplicity recovered at cell [{s},{t}] in dim {dim}")
    out = {}
    for s in range(1, n + 1):
        for t in range(s, n + 1):
            nz = np.flatnonzero(acc[s, t])
            if len(nz):
                out[(s, t)] = Counter({bars[j]: int(acc[s, t, j]) for j in nz})
    return out


def rank_decomposition(mdgm: MetaDiagram, dim: int) -> RankDecomposition:
    """Rectangles [s, t] x [lo, hi] from the meta-diagram, split by sign."""
    R: Counter = Counter()
    S: Counter = Counter()
    for (s, t), sb in mdgm.cells.get(dim, {}).items():
        for (lo, hi), k in sb.items():
            (R if k > 0 else S)[(s, t, lo, hi)] += abs(k)
    return RankDecomposition(R, S)


def signed_bar_count(mdgm: MetaDiagram, dim: int | None = None) -> tuple[int, int]:
    pos = neg = 0
    for d, cells in mdgm.cells.items():
        if dim is not None and d != dim:
            continue
        for sb in cells.values():
            p, q = sb.counts()
            pos += p
            neg += q
    return pos, neg


def stream_signed_counts(complex_: GradedComplex) -> tuple[int, int, int]:
    """(meta-rank bars, positive, negative) signed-bar totals without storing the table."""
    n = complex_.n
    total = pos = neg = 0
    prev = None
    prev_t = 0

    def flush(row, nxt, t):
        nonlocal pos, neg
        for _, _, m in _invert_row(row, nxt, t, n):
            pos += int(m[m > 0].sum())
            neg += int(-m[m < 0].sum())

    for t, row in iter_rows(complex_):
        total += sum(len(c[0]) for c in row)
        if prev is not None:
            flush(prev, row, prev_t)
        prev, prev_t = row, t
    if prev is not None:
        flush(prev, None, prev_t)
    return total, pos, neg
