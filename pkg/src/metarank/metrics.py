"""Truncation, the containment preorder, and erosion distances.

Real bars are half-open ``(lo, hi)`` tuples with ``hi`` possibly ``inf``.
A meta-rank is queried in real coordinates through its grid table and
grade values: the real interval [s, t) reads the grid cell
``[index_at(s), index_before(t)]``.
"""
from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .bifiltration import GradeMap, irreg
from .mrk import MetaRankTable

RealBar = tuple[float, float]
INF = math.inf


def to_real_barcode(bars: Mapping[tuple[int, int], int] | Iterable[Optional[tuple[int, int]]],
                    values: Sequence[float]) -> Counter:
    """Grid bars [lo, hi] -> real bars [v(lo), v(hi+1)), v(n+1) = inf.

    Bars that collapse to zero length (tied grade values) vanish.
    """
    n = len(values)
    items = bars.items() if isinstance(bars, Mapping) else ((b, 1) for b in bars if b is not None)
    out: Counter = Counter()
    for (lo, hi), m in items:
        a = values[lo - 1]
        b = INF if hi + 1 > n else values[hi]
        if b > a:
            out[(a, b)] += m
    return out


def truncate(bars: Mapping[RealBar, int] | Iterable[RealBar], eps: float) -> Counter:
    """[s, t) -> [s + eps, t); bars with t - s <= eps disappear."""
    items = bars.items() if isinstance(bars, Mapping) else ((b, 1) for b in bars)
    out: Counter = Counter()
    for (s, t), m in items:
        if t - s > eps:
            out[(s + eps, t)] += m
    return out


def shift_down(bars: Mapping[RealBar, int], eps: float) -> Counter:
    """The eps-shift of a module moves every bar down by eps."""
    out: Counter = Counter()
    for (s, t), m in bars.items():
        out[(s - eps, t - eps)] += m
    return out


def containment_matching(js: Sequence[RealBar], ks: Sequence[RealBar]) -> int:
    """Size of a maximum matching J -> K with J contained in K.

    Containment between intervals is a 2-d dominance order (K.lo <= J.lo,
    J.hi <= K.hi), for which this sweep is optimal: take J by decreasing hi,
    make every K with hi >= J.hi available, and give J the available K with
    the largest lo <= J.lo.
    """
    jsorted = sorted(js, key=lambda b: -b[1])
    ksorted = sorted(ks, key=lambda b: -b[1])
    avail: list[float] = []
    p = 0
    size = 0
    for lo, hi in jsorted:
        while p < len(ksorted) and ksorted[p][1] >= hi:
            bisect.insort(avail, ksorted[p][0])
            p += 1
        q = bisect.bisect_right(avail, lo) - 1
        if q >= 0:
            avail.pop(q)
            size += 1
    return size


def containment_matching_kuhn(js: Sequence[RealBar], ks: Sequence[RealBar]) -> int:
    """Augmenting-path maximum matching; reference implementation for the sweep."""
    adj = [[k for k, (klo, khi) in enumerate(ks) if klo <= jlo and jhi <= khi] for jlo, jhi in js]
    match_k = [-1] * len(ks)

    def augment(j: int, seen: list[bool]) -> bool:
        for k in adj[j]:
            if not seen[k]:
                seen[k] = True
                if match_k[k] == -1 or augment(match_k[k], seen):
                    match_k[k] = j
                    return True
        return False

    return sum(augment(j, [False] * len(ks)) for j in range(len(js)))


def _expand(bars: Mapping[RealBar, int] | Iterable[RealBar]) -> list[RealBar]:
    if isinstance(bars, Mapping):
        return [b for b, m in bars.items() for _ in range(m)]
    return list(bars)


def dominates(a: Mapping[RealBar, int] | Iterable[RealBar], b: Mapping[RealBar, int] | Iterable[RealBar],
              eps: float) -> bool:
    """Decide a <=_eps b: the eps-truncation of a injects into b by containment."""
    js = _expand(truncate(a, eps))
    if not js:
        return True
    ks = _expand(b)
    if len(ks) < len(js):
        return False
    return containment_matching(js, ks) == len(js)


def _eroded_dominates(a: Counter, b: Counter, eps: float) -> bool:
    """a^eps <=_{2 eps} b, the comparison used by both erosion distances."""
    return dominates(shift_down(a, eps), b, 2 * eps)


def _eroded_dominates_lists(a: list[RealBar], b: list[RealBar], eps: float) -> bool:
    """Same as :func:`_eroded_dominates` on expanded bar lists, without building Counters."""
    if not a:
        return True
    js = [(lo + eps, hi - eps) for lo, hi in a if hi - lo > 2 * eps]
    if not js:
        return True
    if len(b) < len(js):
        return False
    return containment_matching(js, b) == len(js)


class RealMetaRank:
    """One homology dimension of a meta-rank, queried in real coordinates."""

    def __init__(self, table: MetaRankTable, gmap: GradeMap, dim: int):
        self.gmap = gmap
        self.dim = dim
        self.n = table.n
        self._cells = table.multisets(dim)
        self._cache: dict[tuple[int, int], Counter] = {}
        self.xvalues = gmap.values("x")
        self.yvalues = gmap.values("y")

    def cell(self, a: int, b: int) -> Counter:
        """Real bars of grid cell [a, b] (empty when a = 0 or a > b)."""
        if a <= 0 or a > b:
            return Counter()
        key = (a, b)
        got = self._cache.get(key)
        if got is None:
            got = to_real_barcode(self._cells.get(key, Counter()), self.yvalues)
            self._cache[key] = got
        return got

    def index_at(self, s: float) -> int:
        return bisect.bisect_right(self.xvalues, s)

    def index_before(self, t: float) -> int:
        return bisect.bisect_left(self.xvalues, t)

    def query(self, s: float, t: float) -> Counter:
        """Bars of the meta-rank at the real interval [s, t), s < t <= inf."""
        return self.cell(self.index_at(s), self.index_before(t))


def candidate_set(*gmaps: GradeMap) -> list[float]:
    """{0} plus all pairwise gaps between grade values (both axes) and their halves."""
    vals = sorted({v for g in gmaps for ax in ("x", "y") for v in g.values(ax)})
    arr = np.array(vals, dtype=float)
    if len(arr) == 0:
        return [0.0]
    d = np.abs(arr[:, None] - arr[None, :]).ravel()
    cand = np.unique(np.concatenate([[0.0], d, d / 2]))
    return [float(c) for c in cand]


def resolution(*gmaps: GradeMap) -> float:
    """Half the smallest positive gap between grade values; the tolerance of the candidate search."""
    vals = sorted({v for g in gmaps for ax in ("x", "y") for v in g.values(ax)})
    gaps = [b - a for a, b in zip(vals, vals[1:]) if b > a]
    return min(gaps) / 2 if gaps else 0.0


def _mrk_feasible(A: RealMetaRank, B: RealMetaRank, eps: float) -> bool:
    """Every query of B is dominated by A's eroded query, reduced to worst cases.

    Enlarging a query interval shrinks the meta-rank in the <=_0 order, so
    for a fixed grid cell of B only the smallest expanded A-interval over
    the real queries landing in that cell matters.
    """
    w = sorted(set(B.xvalues))
    m = len(w)
    # queries whose s and t fall in different B-pieces: one worst A cell each
    for j1 in range(m - 1):
        a1 = A.index_before(w[j1 + 1] - eps)
        b1 = B.index_at(w[j1])
        for j2 in range(j1 + 1, m):
            a2 = A.index_at(w[j2] + eps)
            if not _eroded_dominates(A.cell(a1, a2), B.cell(b1, B.index_at(w[j2])), eps):
                return False
    # queries with s and t in the same piece (or below every B grade): t -> s+
    # breakpoints are kept as (base, offset in units of eps) so that s - eps
    # and s + eps are computed from the base, never as (u + eps) - eps
    pts = {(v, 0) for v in w} | {(u, k) for u in set(A.xvalues) for k in (-1, 1)}

    def at(base: float, k: int) -> float:
        return base + k * eps if k else base

    for base, k in pts:
        b1 = B.index_at(at(base, k))
        target = B.cell(b1, b1) if b1 > 0 else Counter()
        src = A.cell(A.index_at(at(base, k - 1)), A.index_at(at(base, k + 1)))
        if not _eroded_dominates(src, target, eps):
            return False
    return True


def _least_feasible(cands: list[float], feasible, monotone: bool) -> float:
    """Infimum of the feasible set, which is a union of intervals with ends in ``cands``.

    The predicate is constant strictly between consecutive candidates, so it
    is probed at the midpoints, away from float ties at the breakpoints.  A
    monotone predicate cannot be feasible at a lone point, so only midpoints
    are needed and a binary search applies.  Otherwise a candidate also
    counts when the predicate holds exactly there.
    """
    def mid(k: int) -> float:
        c = cands[k]
        nxt = cands[k + 1] if k + 1 < len(cands) else c + max(1.0, abs(c))
        return (c + nxt) / 2

    if monotone:
        lo, hi = 0, len(cands) - 1
        if not feasible(mid(hi)):
            return INF
        while lo < hi:
            m = (lo + hi) // 2
            if feasible(mid(m)):
                hi = m
            else:
                lo = m + 1
        return cands[lo]
    for k in range(len(cands)):
        if feasible(cands[k]) or feasible(mid(k)):
            return cands[k]
    return INF


def erosion_mrk(table_a: MetaRankTable, gmap_a: GradeMap, table_b: MetaRankTable, gmap_b: GradeMap,
                dim: int, candidates: Optional[list[float]] = None) -> float:
    """Erosion distance between two meta-ranks of one homology dimension (binary search over candidates)."""
    A = RealMetaRank(table_a, gmap_a, dim)
    B = RealMetaRank(table_b, gmap_b, dim)
    cands = candidates if candidates is not None else candidate_set(gmap_a, gmap_b)
    return _least_feasible(cands, lambda e: _mrk_feasible(A, B, e) and _mrk_feasible(B, A, e), monotone=True)


@dataclass
class MdgmDistance:
    distance: float
    irreg_x: float
    irreg_y: float

    @property
    def irreg(self) -> float:
        return max(self.irreg_x, self.irreg_y)


def mdgm_on_grid(R: RealMetaRank, S: Sequence[float]) -> dict[tuple[int, int], Counter]:
    """Meta-diagram over the grid S (real bars, signed multiplicities).

    Cell [i, j] stands for the real interval [S_i, S_{j+1}) with S_{m+1} = inf.
    """
    m = len(S)
    Sx = list(S) + [INF]

    def mrk(i: int, j: int) -> Counter:
        if i < 1 or j > m:
            return Counter()
        return R.query(Sx[i - 1], Sx[j])

    out: dict[tuple[int, int], Counter] = {}
    for i in range(1, m + 1):
        for j in range(i, m + 1):
            acc = Counter(mrk(i, j))
            acc.subtract(mrk(i, j + 1))
            acc.update(mrk(i - 1, j + 1))
            acc.subtract(mrk(i - 1, j))
            acc = Counter({b: k for b, k in acc.items() if k})
            if acc:
                out[(i, j)] = acc
    return out


def pn(mdgm_a: Mapping[tuple[int, int], Counter], mdgm_b: Mapping[tuple[int, int], Counter],
       cell: tuple[int, int]) -> Counter:
    """Positive bars of A plus negative bars of B at a cell, as an unsigned multiset."""
    out: Counter = Counter()
    for bar, k in mdgm_a.get(cell, Counter()).items():
        if k > 0:
            out[bar] += k
    for bar, k in mdgm_b.get(cell, Counter()).items():
        if k < 0:
            out[bar] += -k
    return out


def floor_index(S: Sequence[float], x: float) -> int:
    """1-based index of the largest element of S that is <= x; 0 below S."""
    return bisect.bisect_right(S, x)


def ceil_index(S: Sequence[float], x: float) -> int:
    """1-based index of the smallest element of S that is >= x; len(S)+1 (inf) above S."""
    return bisect.bisect_left(S, x) + 1


def _mdgm_breakpoints(S: Sequence[float], Y: Sequence[float]) -> list[float]:
    """The part of the candidate set at which the meta-diagram predicate can change.

    Grid lookups move at gaps of S, containment of shifted bars at gaps of
    the y-values, truncation at half those gaps.  The least feasible
    candidate over this subset equals the one over the full candidate set.
    """
    xs = np.asarray(S, dtype=float)
    ys = np.asarray(Y, dtype=float)
    dx = np.abs(xs[:, None] - xs[None, :]).ravel()
    dy = np.abs(ys[:, None] - ys[None, :]).ravel()
    return [float(c) for c in np.unique(np.concatenate([[0.0], dx, dy, dy / 2]))]


def erosion_mdgm(table_a: MetaRankTable, gmap_a: GradeMap, table_b: MetaRankTable, gmap_b: GradeMap,
                 dim: int, strict_def: bool = False, widen_by_irreg: bool = False,
                 candidates: Optional[list[float]] = None) -> MdgmDistance:
    """Erosion distance between meta-diagrams over the common grid S of both x-value sets.

    The cell [s, t) is eroded to [floor_S(s - eps), ceil_S(t + eps)).  With
    ``strict_def`` the right end is ceil_S(s + eps), which makes every cell
    collapse to an empty interval at eps = 0, so that form always returns 0.
    ``widen_by_irreg`` adds irreg(S) to eps inside both grid lookups (the
    uneven-grid variant).  Candidates are scanned in ascending order because
    feasibility is not monotone in eps.
    """
    A = RealMetaRank(table_a, gmap_a, dim)
    B = RealMetaRank(table_b, gmap_b, dim)
    S = sorted(set(gmap_a.values("x")) | set(gmap_b.values("x")))
    Y = sorted(set(gmap_a.values("y")) | set(gmap_b.values("y")))
    cands = candidates if candidates is not None else _mdgm_breakpoints(S, Y)
    m = len(S)
    slack = irreg(S) if widen_by_irreg else 0.0
    da, db = mdgm_on_grid(A, S), mdgm_on_grid(B, S)
    Sx = list(S) + [INF]
    keys = set(da) | set(db)
    pn_ab = {c: _expand(pn(da, db, c)) for c in keys}
    pn_ba = {c: _expand(pn(db, da, c)) for c in keys}
    cells = [(i, j) for i in range(1, m + 1) for j in range(i, m + 1)]
    last_bad: list[tuple[int, int]] = []
    empty: list[RealBar] = []

    def eroded(i: int, j: int, eps: float) -> tuple[int, int]:
        a = floor_index(S, Sx[i - 1] - eps - slack)
        right = (Sx[i - 1] if strict_def else Sx[j]) + eps + slack
        b = m + 1 if right == INF else ceil_index(S, right)
        return a, b - 1

    def check(c: tuple[int, int], eps: float) -> bool:
        src = eroded(c[0], c[1], eps)
        if src not in pn_ab:
            return True
        return (_eroded_dominates_lists(pn_ab[src], pn_ba.get(c, empty), eps)
                and _eroded_dominates_lists(pn_ba[src], pn_ab.get(c, empty), eps))

    def feasible(eps: float) -> bool:
        for c in last_bad:
            if not check(c, eps):
                return False
        for c in cells:
            if not check(c, eps):
                last_bad[:] = [c]
                return False
        return True

    dist = _least_feasible(cands, feasible, monotone=False)
    return MdgmDistance(dist, irreg(S), irreg(Y))
