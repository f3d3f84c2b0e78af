"""Meta-rank tables.

Bars are closed grid intervals ``(lo, hi)`` with ``1 <= lo <= hi <= n`` on
the vertical axis.  A cell ``[s, t]`` (columns ``s <= t``) holds the barcode
of the image of the vertical slice at column s inside the slice at column t.
In real coordinates, cell ``[s, t]`` answers the query ``[x_s, x_{t+1})``.

Two row generators produce the table column by column:

* :func:`iter_rows` (default) computes each image barcode exactly by image
  persistence.  For a target column t the boundary matrix of the slice is
  kept reduced with the rows of the source slice listed first; lowering the
  source column by one moves a single row, which costs a handful of local
  column operations.
* :func:`iter_rows_vineyard` runs the vineyard sweep and intersects
  slot-aligned intervals.  It is cheaper but only an approximation: when a
  class of an earlier slice becomes homologous to an older class, the slot
  it is aligned with can die too early.  ``tests/test_mrk.py`` pins down a
  five-simplex counterexample.
"""
from __future__ import annotations

from collections import Counter
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .bifiltration import GradedComplex
from .vineyard import Sweep, restrict_and_shift

Bar = tuple[int, int]
BarcodeList = list[Optional[Bar]]
# cell (s, t) -> multiset of bars; absent cells are empty
CellTable = dict[tuple[int, int], Counter]
# one cell as parallel arrays (dims, lo, hi)
CellArrays = tuple[np.ndarray, np.ndarray, np.ndarray]

NONE = -1


def intersect_bars(a: Optional[Bar], b: Optional[Bar]) -> Optional[Bar]:
    if a is None or b is None:
        return None
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def intersect_step(curr: Sequence[Optional[Bar]], prev: Sequence[Optional[Bar]]) -> BarcodeList:
    """Slot-wise intersection of the slice barcode at i with the cell [k, i-1]."""
    if len(curr) != len(prev):
        raise ValueError(f"slot lists differ in length ({len(curr)} != {len(prev)})")
    return [intersect_bars(c, p) for c, p in zip(curr, prev)]


def _bits_to_bool(v: int, width: int) -> np.ndarray:
    raw = np.frombuffer(v.to_bytes((width + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:width].astype(bool)


def iter_rows(complex_: GradedComplex) -> Iterator[tuple[int, list[CellArrays]]]:
    """Yield ``(t, cells)`` with ``cells[k-1]`` the bars of cell [k, t], k = 1..t.

    Every simplex is addressed by its y-grade.  Births of cell [k, t] are the
    births of slice k; the death of the class born at sigma is the column of
    the image-reduced matrix whose low is sigma (or none: alive to the top).
    """
    n = complex_.n
    if n == 0:
        return
    w = n + 2
    xg = np.full(w, n + 5, dtype=np.int64)  # x-grade of the simplex with y-grade y
    dim_by_y = np.zeros(w, dtype=np.int64)
    faces = [0] * w
    for k, s in enumerate(complex_.simplices):
        y = complex_.ygrade[k]
        xg[y] = complex_.xgrade[k]
        dim_by_y[y] = len(s) - 1
    for k in range(n):
        faces[complex_.ygrade[k]] = sum(1 << complex_.ygrade[f] for f in complex_.facet_index[k])
    y_of_x = np.zeros(w, dtype=np.int64)
    y_of_x[xg[1 : n + 1]] = np.arange(1, n + 1)
    births: dict[int, np.ndarray] = {}

    for t in range(1, n + 1):
        # reduce the slice at column t in y-order; bits are y-grades so low = bit_length - 1
        cols = np.flatnonzero(xg[: n + 1] <= t)
        low_inv = np.full(w, NONE, dtype=np.int64)
        reduced: dict[int, int] = {}
        owner: dict[int, int] = {}
        for c in cols.tolist():
            col = faces[c]
            while col:
                lo = col.bit_length() - 1
                j = owner.get(lo)
                if j is None:
                    break
                col ^= reduced[j]
            reduced[c] = col
            if col:
                lo = col.bit_length() - 1
                owner[lo] = c
                low_inv[lo] = c
        births[t] = np.array([c for c in cols.tolist() if not reduced[c]], dtype=np.int64)
        R = np.zeros((w, w), dtype=bool)
        for c, v in reduced.items():
            if v:
                R[c] = _bits_to_bool(v, w)

        row: list[CellArrays] = [None] * t  # type: ignore[list-item]

        def read(k: int) -> None:
            b = births[k]
            d = low_inv[b]
            row[k - 1] = (dim_by_y[b], b, np.where(d == NONE, n, d - 1))

        read(t)
        for k in range(t - 1, 0, -1):
            # the simplex with x-grade k+1 leaves the source block
            r = int(y_of_x[k + 1])
            above = np.flatnonzero(xg[r + 1 : n + 1] <= k) + r + 1
            tail = xg[1:r]
            below = np.flatnonzero((tail > k) & (tail <= t)) + 1
            passed = np.concatenate([above, below])  # rows r overtakes, in order
            owners = low_inv[passed]
            hit = np.flatnonzero(owners >= 0)
            hit = hit[R[owners[hit], r]]
            for lam in passed[hit].tolist():
                b_col = int(low_inv[lam])
                a_col = int(low_inv[r])
                if a_col == NONE:
                    low_inv[r] = b_col
                    low_inv[lam] = NONE
                elif a_col < b_col:
                    R[b_col] ^= R[a_col]
                else:
                    R[a_col] ^= R[b_col]
                    low_inv[lam] = a_col
                    low_inv[r] = b_col
            read(k)
        yield t, row


def iter_rows_vineyard(complex_: GradedComplex, check: bool = False,
                       sweep: Sweep | None = None) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Slot-aligned rows from the vineyard sweep: ``(t, lo, hi)``, row k-1 = cell [k, t].

    Cell [k, t] is cell [k, t-1] intersected slot-wise with the slice at t.
    Empty slots have lo > hi.  Rows depend only on the previous row.
    """
    n = complex_.n
    if n == 0:
        return
    if sweep is None:
        sweep = Sweep(complex_, check=check)
    prev_lo = prev_hi = None
    for i in range(1, n + 1):
        if i > 1:
            sweep.advance()
        birth, death = sweep.endpoints()
        lo_i, hi_i = restrict_and_shift(birth, death, i, n)
        if prev_lo is None:
            lo, hi = lo_i[None, :], hi_i[None, :]
        else:
            lo = np.vstack([np.maximum(prev_lo, lo_i), lo_i[None, :]])
            hi = np.vstack([np.minimum(prev_hi, hi_i), hi_i[None, :]])
        yield i, lo, hi
        prev_lo, prev_hi = lo, hi


class MetaRankTable:
    """Bars of every non-empty cell [s, t], all homology dimensions.

    ``cells[(s, t)]`` is a ``(dims, lo, hi)`` triple of equal-length arrays.
    Equality compares bar multisets per cell.
    """

    def __init__(self, n: int, cells: dict[tuple[int, int], CellArrays] | None = None):
        self.n = n
        self.cells = cells if cells is not None else {}

    @property
    def dims(self) -> list[int]:
        out: set[int] = set()
        for d, _, _ in self.cells.values():
            out.update(int(v) for v in np.unique(d))
        return sorted(out)

    def bars(self, dim: int, s: int, t: int) -> Counter:
        cell = self.cells.get((s, t))
        if cell is None:
            return Counter()
        d, lo, hi = cell
        m = d == dim
        return Counter(zip(lo[m].tolist(), hi[m].tolist()))

    def multisets(self, dim: int) -> CellTable:
        """All non-empty cells of one dimension as bar multisets."""
        out: CellTable = {}
        for key, (d, lo, hi) in self.cells.items():
            m = d == dim
            if m.any():
                out[key] = Counter(zip(lo[m].tolist(), hi[m].tolist()))
        return out

    def total_bars(self) -> int:
        return sum(len(d) for d, _, _ in self.cells.values())

    def __eq__(self, other):
        if not isinstance(other, MetaRankTable):
            return NotImplemented
        if self.n != other.n:
            return False
        return all(cells_equal(self.multisets(d), other.multisets(d)) is None for d in set(self.dims) | set(other.dims))


def _store(cells: dict, key: tuple[int, int], d: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> None:
    keep = lo <= hi
    if keep.any():
        cells[key] = (d[keep].astype(np.int8), lo[keep].astype(np.int32), hi[keep].astype(np.int32))


def compute_metarank(complex_: GradedComplex, method: str = "image", check: bool = False) -> MetaRankTable:
    """Horizontal meta-rank of the homology of a simplex-wise bifiltration, all dimensions.

    ``method="image"`` is exact; ``method="vineyard"`` is the slot-intersection
    recurrence (``check`` turns on its matrix and monotonicity assertions).
    For the vertical meta-rank pass the result of
    :func:`~metarank.bifiltration.transpose_axes`.
    """
    n = complex_.n
    cells: dict[tuple[int, int], CellArrays] = {}
    if method == "image":
        for t, row in iter_rows(complex_):
            for k, (d, lo, hi) in enumerate(row, start=1):
                _store(cells, (k, t), d, lo, hi)
    elif method == "vineyard":
        if n == 0:
            return MetaRankTable(0, cells)
        sweep = Sweep(complex_, check=check)
        dims = sweep.slot_dims
        for t, lo, hi in iter_rows_vineyard(complex_, sweep=sweep):
            for k in range(t):
                _store(cells, (k + 1, t), dims, lo[k], hi[k])
    else:
        raise ValueError(f"unknown method {method!r}")
    return MetaRankTable(n, cells)


def table_from_cells(cells_by_dim: dict[int, CellTable], n: int) -> MetaRankTable:
    """Build a table from per-dimension bar multisets."""
    acc: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for d, cells in cells_by_dim.items():
        for key, bars in cells.items():
            for (lo, hi), m in bars.items():
                acc.setdefault(key, []).extend([(d, lo, hi)] * m)
    out = {}
    for key, rows in sorted(acc.items()):
        a = np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)
        _store(out, key, a[:, 0], a[:, 1], a[:, 2])
    return MetaRankTable(n, out)


def cells_equal(a: CellTable, b: CellTable) -> Optional[tuple[int, int]]:
    """First cell where two multiset tables differ, or None."""
    for key in sorted(set(a) | set(b)):
        if +a.get(key, Counter()) != +b.get(key, Counter()):
            return key
    return None


def reindex_cells(cells: CellTable, xmap: Sequence[int], ymap: Sequence[int], n_new: int) -> CellTable:
    """Express a factor's table on a refined grid.

    ``xmap[i]``/``ymap[i]`` give the refined index of factor index i (1-based).
    The refined cell [S, T] reads the factor cell [X(S), X(T)], where X(S) is
    the largest factor index mapped to <= S; a factor bar [lo, hi] becomes
    [ymap[lo], ymap[hi+1] - 1] with ymap[n+1] := n_new + 1.
    """
    n_old = len(xmap) - 1
    back = [0] * (n_new + 1)  # refined index -> factor index X(S)
    j = 0
    for S in range(1, n_new + 1):
        while j < n_old and xmap[j + 1] <= S:
            j += 1
        back[S] = j
    yext = list(ymap) + [n_new + 1]
    out: CellTable = {}
    for S in range(1, n_new + 1):
        if back[S] == 0:
            continue
        for T in range(S, n_new + 1):
            src = cells.get((back[S], back[T]))
            if not src:
                continue
            c = Counter()
            for (lo, hi), mult in src.items():
                c[(yext[lo], yext[hi + 1] - 1)] += mult
            out[(S, T)] = c
    return out


def cells_union(*tables: Iterable[CellTable]) -> CellTable:
    out: CellTable = {}
    for tab in tables:
        for key, bars in tab.items():
            out.setdefault(key, Counter()).update(bars)
    return out
