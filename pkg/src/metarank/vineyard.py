"""Pushing the staircase path through the grid one unit square at a time.

The sweep state holds a D = RU decomposition for the filtration along the
current path, plus the interval list with stable slot ids.  Passing a
square either leaves the path filtration unchanged, moves one simplex by
one position, or swaps two adjacent simplices; only the last one touches
the matrices (vineyard transposition update, O(n) bit operations).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .bifiltration import GradedComplex, path_position
from .reduction import IMPLICIT, NONE, InvariantError, PairingList, RUDecomposition, extract_pairs


class ChangeKind(enum.Enum):
    NO_CHANGE = "no_change"
    ARRIVAL_SHIFT = "arrival_shift"
    TRANSPOSITION = "transposition"


@dataclass(frozen=True)
class SquareChange:
    kind: ChangeKind
    simplex: int = -1  # shifted simplex (ARRIVAL_SHIFT)
    direction: int = 0  # +1 later, -1 earlier (ARRIVAL_SHIFT)
    position: int = 0  # earlier of the two swapped positions (TRANSPOSITION)
    pair: tuple[int, int] = (-1, -1)  # (earlier, later) simplex ids before the swap


NO_CHANGE = SquareChange(ChangeKind.NO_CHANGE)


def classify_square(complex_: GradedComplex, i: int, j: int, by_x=None, by_y=None) -> SquareChange:
    """Classify pushing the path through the square (i, j) -> (i+1, j-1).

    The path vertex at (i, j), position i+j-1, is replaced by (i+1, j-1).
    sigma is the simplex with x-grade i+1, tau the one with y-grade j.
    """
    if by_x is None:
        by_x = complex_.by_xgrade()
    if by_y is None:
        by_y = complex_.by_ygrade()
    sigma = by_x[i]
    tau = by_y[j - 1]
    if sigma == tau:
        return NO_CHANGE
    has_tau = complex_.xgrade[tau] <= i  # tau arrives at (i, j) on the old path
    has_sigma = complex_.ygrade[sigma] <= j - 1  # sigma arrives at (i+1, j-1) on the new path
    q = i + j - 1
    if has_tau and has_sigma:
        return SquareChange(ChangeKind.TRANSPOSITION, position=q, pair=(tau, sigma))
    if has_tau:
        return SquareChange(ChangeKind.ARRIVAL_SHIFT, simplex=tau, direction=+1, position=q)
    if has_sigma:
        return SquareChange(ChangeKind.ARRIVAL_SHIFT, simplex=sigma, direction=-1, position=q + 1)
    return NO_CHANGE


def transpose_update(ru: RUDecomposition, a: int, b: int) -> bool:
    """Swap adjacent simplices a (earlier) and b (later) in the filtration.

    Keeps D = RU with R reduced and U upper unitriangular.  Returns True when
    the pairing function changed, in which case the intervals (as position
    pairs) are unchanged and a and b exchange their partners.
    """
    R, U, low, low_inv, pos = ru.R, ru.U, ru.low, ru.low_inv, ru.pos
    if (ru.D[b] >> a) & 1 or (ru.D[a] >> b) & 1:
        raise InvariantError(f"cannot transpose face {a} past coface {b}")
    if pos[a] >= pos[b]:
        raise InvariantError("transpose_update expects a before b")
    partner_a = ru.partner(a)

    k = low_inv[a]  # column killing a, if a is positive and paired
    l = low_inv[b]
    # Column l's low moves from b to a when it also contains a.
    l_takes_a = l != NONE and (R[l] >> a) & 1

    collide_ab = False
    old_low_b = low[b]
    if (U[a] >> b) & 1:
        # Clear U[a, b] so that U stays upper triangular after the swap.
        U[a] ^= U[b]
        Ra = R[a]
        if Ra:
            la, lb = low[a], low[b]
            R[b] ^= Ra
            if lb != NONE and pos[lb] > pos[la]:
                pass  # low of b unchanged
            else:
                collide_ab = True

    pos[a], pos[b] = pos[b], pos[a]

    if collide_ab:
        # b now precedes a and both columns end at low[a]; adding b into a
        # restores the original column b there.
        R[a] ^= R[b]
        U[b] ^= U[a]
        la = low[a]
        low[b] = la
        low_inv[la] = b
        low[a] = old_low_b
        if old_low_b != NONE:
            low_inv[old_low_b] = a
    if l_takes_a:
        if k == NONE:
            low[l] = a
            low_inv[a] = l
            low_inv[b] = NONE
        else:
            # Columns k and l both end at a; add the earlier to the later.
            e, f = (k, l) if pos[k] < pos[l] else (l, k)
            R[f] ^= R[e]
            U[e] ^= U[f]
            low[e] = a
            low_inv[a] = e
            low[f] = b
            low_inv[b] = f
    return ru.partner(a) != partner_a


class Sweep:
    """State machine for the column-by-column vineyard sweep.

    After ``advance()`` has been called ``i - 1`` times the path is the
    staircase through column ``i``.  ``check`` enables the D = RU assertions
    after every square and the monotonicity assertions within each column.
    """

    def __init__(self, complex_: GradedComplex, check: bool = False):
        self.complex = complex_
        self.n = n = complex_.n
        self.check = check
        self.column = 1
        self.by_x = complex_.by_xgrade()
        self.by_y = complex_.by_ygrade()
        self.dims = [complex_.dim(k) for k in range(n)]
        pos = [path_position(complex_, k, 1) for k in range(n)]
        self.ru = RUDecomposition(complex_.facet_index, pos)
        self.pairs = extract_pairs(self.ru, self.dims)
        self.slot_of = [0] * n
        for s, (bi, de) in enumerate(zip(self.pairs.birth, self.pairs.death)):
            self.slot_of[bi] = s
            if de != IMPLICIT:
                self.slot_of[de] = s
        self.slot_dims = np.array(self.pairs.dims, dtype=np.int64)
        self.stats = {"transpositions": 0, "pairing_changes": 0, "shifts": 0}
        self._shrunk_birth: set[int] = set()
        self._shrunk_death: set[int] = set()

    @property
    def m(self) -> int:
        return len(self.pairs)

    def _record(self, simplex: int, delta: int) -> None:
        """Monotonicity bookkeeping for one endpoint move within a column."""
        s = self.slot_of[simplex]
        if self.pairs.birth[s] == simplex:
            if delta > 0:
                self._shrunk_birth.add(s)
            elif s in self._shrunk_birth:
                raise InvariantError(f"slot {s}: birth moved earlier after shrinking in column {self.column}")
        else:
            if delta < 0:
                self._shrunk_death.add(s)
            elif s in self._shrunk_death:
                raise InvariantError(f"slot {s}: death moved later after shrinking in column {self.column}")

    def apply(self, change: SquareChange) -> None:
        ru = self.ru
        if change.kind is ChangeKind.NO_CHANGE:
            return
        if change.kind is ChangeKind.ARRIVAL_SHIFT:
            ru.pos[change.simplex] += change.direction
            self.stats["shifts"] += 1
            if self.check:
                self._record(change.simplex, change.direction)
            return
        a, b = change.pair
        self.stats["transpositions"] += 1
        changed = transpose_update(ru, a, b)
        if changed:
            self.stats["pairing_changes"] += 1
            sa, sb = self.slot_of[a], self.slot_of[b]
            pl = self.pairs
            if self.dims[a] != self.dims[b]:
                raise InvariantError(f"pairing change between simplices {a} and {b} of different dimension")
            for s, old, new in ((sa, a, b), (sb, b, a)):
                if pl.birth[s] == old:
                    pl.birth[s] = new
                else:
                    pl.death[s] = new
            self.slot_of[a], self.slot_of[b] = sb, sa
        elif self.check:
            self._record(a, +1)
            self._record(b, -1)
        if self.check:
            ru.check()

    def advance(self) -> None:
        """Sweep from the path through column i to the one through column i+1."""
        i = self.column
        if i >= self.n:
            raise ValueError("already at the last column")
        self._shrunk_birth.clear()
        self._shrunk_death.clear()
        for j in range(self.n, 1, -1):
            self.apply(classify_square(self.complex, i, j, self.by_x, self.by_y))
        self.column = i + 1

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Birth and death positions per slot (IMPLICIT death -> 2n+1)."""
        pos = np.asarray(self.ru.pos, dtype=np.int64)
        birth = pos[np.asarray(self.pairs.birth, dtype=np.int64)]
        death_ids = np.asarray(self.pairs.death, dtype=np.int64)
        death = np.where(death_ids == IMPLICIT, 2 * self.n + 1, pos[np.maximum(death_ids, 0)])
        return birth, death

    def pairing_snapshot(self) -> PairingList:
        return PairingList(list(self.pairs.birth), list(self.pairs.death), list(self.pairs.dims))


def restrict_and_shift(birth: np.ndarray, death: np.ndarray, i: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Bars of the vertical slice at column i from path intervals [birth, death).

    The slice occupies path positions i .. i+n-1; heights are 1-based.
    Returns (lo, hi) arrays; slots with lo > hi are empty placeholders.
    """
    lo = np.maximum(birth, i) - i + 1
    hi = np.minimum(death - 1, i + n - 1) - i + 1
    return lo, hi
