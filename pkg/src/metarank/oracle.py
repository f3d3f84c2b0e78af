"""Brute-force ground truth, sharing no code with the sweep.

The rank invariant is computed from two-step filtrations with a separate
column reduction; the meta-rank is then rebuilt from it by
inclusion-exclusion.  Rectangle-sum modules get closed-form answers.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .bifiltration import GradeMap, GradedComplex

# cell (s, t) -> Counter of (lo, hi); same shape as mrk.CellTable
Cells = dict[tuple[int, int], Counter]
# closed grid rectangle [s, s'] x [t, t']
Rect = tuple[int, int, int, int]


class OracleMismatch(AssertionError):
    pass


@dataclass
class RankFunction:
    """``ranks[d][a, b, c, e]`` = rank of H_d(F(a,b)) -> H_d(F(c,e)) for (a,b) <= (c,e).

    Index 0 on any axis stands for the empty subcomplex (rank 0); entries at
    incomparable pairs are 0 and carry no meaning.
    """

    n: int
    ranks: dict[int, np.ndarray]

    def __call__(self, dim: int, p: tuple[int, int], q: tuple[int, int]) -> int:
        if dim not in self.ranks:
            return 0
        return int(self.ranks[dim][p[0], p[1], q[0], q[1]])

    def comparable_mask(self) -> np.ndarray:
        i = np.arange(self.n + 1)
        le = i[:, None] <= i[None, :]
        return le[:, None, :, None] & le[None, :, None, :]

    def check_monotone(self) -> None:
        """Shrinking the source or growing the target never increases the rank."""
        for d, r in self.ranks.items():
            m = self.comparable_mask()
            # grow target: r[a,b,c,e] >= r[a,b,c+1,e] and >= r[a,b,c,e+1]
            if np.any(m[:, :, :-1, :] & (r[:, :, :-1, :] < r[:, :, 1:, :])) or np.any(
                m[:, :, :, :-1] & (r[:, :, :, :-1] < r[:, :, :, 1:])
            ):
                raise OracleMismatch(f"dim {d}: rank increases as the target grows")
            # shrink source: r[a,b,...] >= r[a-1,b,...] where comparable
            if np.any(m[1:] & (r[1:] < r[:-1])) or np.any(m[:, 1:] & (r[:, 1:] < r[:, :-1])):
                raise OracleMismatch(f"dim {d}: rank increases as the source shrinks")


def _reduce_bitsets(cols: list[int]) -> list[int]:
    """Standard reduction; bit j of a column is filtration index j.  Returns low per column (-1 for zero)."""
    owner: dict[int, int] = {}
    lows = []
    for j, c in enumerate(cols):
        while c:
            lo = c.bit_length() - 1
            k = owner.get(lo)
            if k is None:
                break
            c ^= cols[k]
        cols[j] = c
        if c:
            lo = c.bit_length() - 1
            owner[lo] = j
            lows.append(lo)
        else:
            lows.append(-1)
    return lows


def rank_invariant(complex_: GradedComplex, dims: Optional[Iterable[int]] = None) -> RankFunction:
    """Rank of every internal map, by one two-block reduction per (a, b, c).

    For a source (a, b) and target column c the filtration lists F(a, b)
    first and then the rest of F(c, n) by y-grade, so every F(c, e) with
    e >= b is a prefix.  The rank into F(c, e) counts classes born in the
    first block whose killer is absent from F(c, e).
    """
    n = complex_.n
    maxd = complex_.max_dim if n else 0
    dims = sorted(set(range(maxd + 1) if dims is None else dims))
    ranks = {d: np.zeros((n + 1,) * 4, dtype=np.int32) for d in dims}
    if n == 0:
        return RankFunction(0, ranks)
    xg, yg = complex_.xgrade, complex_.ygrade
    sdim = [len(s) - 1 for s in complex_.simplices]
    faces = complex_.facet_index
    by_y = sorted(range(n), key=lambda k: yg[k])
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            src = [k for k in range(n) if xg[k] <= a and yg[k] <= b]
            if not src:
                continue
            src.sort(key=lambda k: (sdim[k], k))
            src_set = set(src)
            for c in range(a, n + 1):
                order = src + [k for k in by_y if xg[k] <= c and k not in src_set]
                where = {k: j for j, k in enumerate(order)}
                cols = [sum(1 << where[f] for f in faces[k]) for k in order]
                lows = _reduce_bitsets(cols)
                nsrc = len(src)
                killer = {lo: j for j, lo in enumerate(lows) if lo >= 0}
                for d in dims:
                    # count[e] = classes alive at F(c, e), from their killer's y-grade
                    alive = np.zeros(n + 2, dtype=np.int32)
                    for j in range(nsrc):
                        if lows[j] != -1 or sdim[order[j]] != d:
                            continue
                        kj = killer.get(j)
                        if kj is not None and kj < nsrc:
                            continue
                        death_y = n + 1 if kj is None else max(yg[order[kj]], b)
                        alive[b] += 1
                        alive[death_y] -= 1
                    ranks[d][a, b, c, :] = np.cumsum(alive)[: n + 1]
                    ranks[d][a, b, c, :b] = 0
    return RankFunction(n, ranks)


def mrk_from_rank(rk: RankFunction, dim: int) -> Cells:
    """Meta-rank cells rebuilt from the rank invariant by inclusion-exclusion.

    Within cell [s, t], r(y, y') = rank((s, y), (t, y')) is the rank function
    of the image module; a closed bar [i, j] with j < n has multiplicity
    r(i,j) - r(i,j+1) - r(i-1,j) + r(i-1,j+1), and a bar [i, n] has
    r(i,n) - r(i-1,n).
    """
    n = rk.n
    out: Cells = {}
    if dim not in rk.ranks or n == 0:
        return out
    R = rk.ranks[dim]
    i = np.arange(n + 1)
    upper = i[:, None] <= i[None, :]
    for s in range(1, n + 1):
        for t in range(s, n + 1):
            r = np.where(upper, R[s, :, t, :], 0)
            mult = np.zeros((n + 1, n + 1), dtype=np.int64)
            mult[1:, 1:n] = r[1:, 1:n] - r[1:, 2:] - r[:-1, 1:n] + r[:-1, 2:]
            mult[1:, n] = r[1:, n] - r[:-1, n]
            mult = np.where(upper, mult, 0)
            if np.any(mult < 0):
                lo, hi = np.argwhere(mult < 0)[0]
                raise OracleMismatch(f"negative multiplicity for bar [{lo},{hi}] in cell [{s},{t}]")
            nz = np.argwhere(mult > 0)
            if len(nz):
                out[(s, t)] = Counter({(int(lo), int(hi)): int(mult[lo, hi]) for lo, hi in nz})
    return out


def mrk_from_rank_real(rk: RankFunction, gmap: GradeMap, dim: int, s: float, t: float) -> Counter:
    """Real-coordinate reconstruction of the bars of the cell [s, t).

    Literal form of the inclusion-exclusion over y-values: with X = S<=(s)
    and X' = S<(t), the bar [y_i, y_j) has multiplicity
    r(X,i; X',j-1) - r(X,i; X',j) + r(X,i-1; X',j) - r(X,i-1; X',j-1),
    and [y_i, inf) has r(X,i; X',n) - r(X,i-1; X',n).  With tied y-values
    some of these bars have zero length; they are dropped.
    """
    n = rk.n
    xs = gmap.index_at("x", s)
    xt = gmap.index_before("x", t)
    out: Counter = Counter()
    if xs == 0 or xs > xt:
        return out
    ys = gmap.values("y")

    def r(i: int, j: int) -> int:
        if i <= 0 or j <= 0 or i > j:
            return 0
        return rk(dim, (xs, i), (xt, min(j, n)))

    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            m = r(i, j - 1) - r(i, j) + r(i - 1, j) - r(i - 1, j - 1)
            if m and ys[j - 1] > ys[i - 1]:
                out[(ys[i - 1], ys[j - 1])] += m
        m = r(i, n) - r(i - 1, n)
        if m:
            out[(ys[i - 1], float("inf"))] += m
    if any(v < 0 for v in out.values()):
        raise OracleMismatch(f"negative multiplicity in real cell [{s}, {t})")
    return out


def rank_from_mrk(cells: Cells, p: tuple[int, int], q: tuple[int, int]) -> int:
    """Number of bars of cell [s, t] containing [y, y'] for p = (s, y) <= q = (t, y')."""
    (s, y), (t, y2) = p, q
    bars = cells.get((s, t))
    if not bars:
        return 0
    return sum(m for (lo, hi), m in bars.items() if lo <= y and y2 <= hi)


def rank_from_mrk_real(cells: Cells, gmap: GradeMap, p: tuple[float, float], q: tuple[float, float]) -> int:
    """Real form: the cell [s, S>(t)) is the grid cell [S<=(s), S<=(t)]."""
    (s, y), (t, y2) = p, q
    a, c = gmap.index_at("x", s), gmap.index_at("x", t)
    b, e = gmap.index_at("y", y), gmap.index_at("y", y2)
    if min(a, b) == 0:
        return 0
    return rank_from_mrk(cells, (a, b), (c, e))


def rank_table_from_cells(cells: Cells, n: int) -> np.ndarray:
    """Dense [a, b, c, e] table of bar-counting ranks (comparable pairs only)."""
    out = np.zeros((n + 1,) * 4, dtype=np.int32)
    for (s, t), bars in cells.items():
        for (lo, hi), m in bars.items():
            # bar [lo, hi] in cell [s, t] contributes at (s, b) -> (t, e) for lo <= b <= e <= hi
            blk = np.triu(np.ones((hi - lo + 1, hi - lo + 1), dtype=np.int32)) * m
            out[s, lo:hi + 1, t, lo:hi + 1] += blk
    return out


def rank_from_rectangles(pos: Iterable[Rect], neg: Iterable[Rect], n: int) -> np.ndarray:
    """Dense [a, b, c, e] table of (#pos rectangles containing both points) - (#neg ...).

    Rectangles are (s, t, lo, hi) meaning [s, t] x [lo, hi]; built with a
    4-d difference array so the cost is O(#rects + n^4).
    """
    diff = np.zeros((n + 2,) * 4, dtype=np.int64)
    for sign, rects in ((1, pos), (-1, neg)):
        for s, t, lo, hi in rects:
            for da, va in ((s, 1), (t + 1, -1)):
                for db, vb in ((lo, 1), (hi + 1, -1)):
                    for dc, vc in ((s, 1), (t + 1, -1)):
                        for de, ve in ((lo, 1), (hi + 1, -1)):
                            diff[da, db, dc, de] += sign * va * vb * vc * ve
    for ax in range(4):
        diff = np.cumsum(diff, axis=ax)
    return diff[: n + 1, : n + 1, : n + 1, : n + 1]


def first_rank_mismatch(a: np.ndarray, b: np.ndarray, n: int) -> Optional[tuple[int, int, int, int]]:
    """First comparable pair of grid points (indices >= 1) where two rank tables differ."""
    i = np.arange(n + 1)
    le = (i[:, None] <= i[None, :]) & (i[:, None] >= 1)
    mask = le[:, None, :, None] & le[None, :, None, :]
    bad = np.argwhere(mask & (a != b))
    if len(bad) == 0:
        return None
    return tuple(int(v) for v in bad[0])


def synth_rectangle_mrk(rects: Iterable[Rect], a: int, b: int) -> Counter:
    """Bars of the cell [a, b] for a sum of closed rectangles [s, s'] x [t, t'].

    A rectangle contributes [t, t'] exactly when s <= a <= b <= s'.
    """
    out: Counter = Counter()
    for s, s2, t, t2 in rects:
        if s <= a <= b <= s2:
            out[(t, t2)] += 1
    return out


def synth_rectangle_cells(rects: Sequence[Rect], n: int) -> Cells:
    out: Cells = {}
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            c = synth_rectangle_mrk(rects, a, b)
            if c:
                out[(a, b)] = c
    return out


def synth_rectangle_rank(rects: Iterable[Rect], p: tuple[int, int], q: tuple[int, int]) -> int:
    (a, b), (c, e) = p, q
    return sum(1 for s, s2, t, t2 in rects if s <= a and c <= s2 and t <= b and e <= t2)
