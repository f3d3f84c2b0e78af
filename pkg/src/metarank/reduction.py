"""GF(2) boundary matrices and the D = RU decomposition.

Columns of R and rows of U are stored as Python ints used as bitsets over
*simplex ids*, not filtration positions.  Reordering the filtration then
only touches the ``pos`` array; the low of a column is the id of its entry
with the largest position.  Column additions on R and the matching row
additions on U are single XORs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

IMPLICIT = -1  # death of an essential class; the path never kills it
NONE = -1


class InvariantError(AssertionError):
    """Internal consistency failure in the matrix engine."""


def bits(x: int):
    while x:
        b = x & -x
        yield b.bit_length() - 1
        x ^= b


def boundary_matrix(simplices: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Boundary columns of an ordered simplex list (1-based row positions)."""
    where: dict[tuple[int, ...], int] = {}
    cols = []
    for j, s in enumerate(simplices, start=1):
        rows = []
        if len(s) > 1:
            for k in range(len(s)):
                f = s[:k] + s[k + 1:]
                if f not in where:
                    raise ValueError(f"facet {list(f)} of {list(s)} does not precede it")
                rows.append(where[f])
        cols.append(tuple(sorted(rows)))
        where[tuple(s)] = j
    return cols


class RUDecomposition:
    """Mutable D = RU state over a fixed set of simplex ids.

    ``pos[k]`` is the filtration key of simplex k (any distinct integers);
    ``D[k]``/``R[k]`` are column bitsets and ``U[k]`` is row k of U.
    """

    __slots__ = ("n", "pos", "D", "R", "U", "low", "low_inv")

    def __init__(self, boundary: Sequence[Sequence[int]], pos: Sequence[int]):
        n = len(boundary)
        self.n = n
        self.pos = list(pos)
        self.D = [sum(1 << f for f in set(col)) for col in boundary]
        self.R = list(self.D)
        self.U = [1 << k for k in range(n)]
        self.low = [NONE] * n
        self.low_inv = [NONE] * n
        self._reduce()

    def _low_of(self, col: int) -> int:
        pos = self.pos
        best, best_pos = NONE, -1
        for b in bits(col):
            if pos[b] > best_pos:
                best, best_pos = b, pos[b]
        return best

    def _reduce(self):
        R, U, low, low_inv = self.R, self.U, self.low, self.low_inv
        for j in sorted(range(self.n), key=self.pos.__getitem__):
            for f in bits(self.D[j]):
                if self.pos[f] >= self.pos[j]:
                    raise ValueError("face arrives after coface")
            col = R[j]
            lo = self._low_of(col)
            while lo != NONE and low_inv[lo] != NONE:
                k = low_inv[lo]
                col ^= R[k]
                U[k] ^= U[j]
                lo = self._low_of(col)
            R[j] = col
            low[j] = lo
            if lo != NONE:
                low_inv[lo] = j

    def order(self) -> list[int]:
        return sorted(range(self.n), key=self.pos.__getitem__)

    def partner(self, k: int) -> int:
        """Simplex paired with k, or IMPLICIT when k is never killed."""
        if self.R[k]:
            return self.low[k]
        return self.low_inv[k]

    def pairs(self) -> list[tuple[int, int]]:
        """(birth id, death id or IMPLICIT) for every interval."""
        out = []
        for k in range(self.n):
            if self.R[k]:
                continue
            out.append((k, self.low_inv[k]))
        return out

    def check(self) -> None:
        """Verify D = RU, R reduced and U upper unitriangular (raises InvariantError)."""
        n, pos = self.n, self.pos
        seen = {}
        for k in range(n):
            if self.R[k]:
                lo = self._low_of(self.R[k])
                if lo != self.low[k]:
                    raise InvariantError(f"stale low for column {k}")
                if lo in seen:
                    raise InvariantError(f"columns {seen[lo]} and {k} share low {lo}")
                seen[lo] = k
                if self.low_inv[lo] != k:
                    raise InvariantError(f"low_inv out of sync at {lo}")
            elif self.low[k] != NONE:
                raise InvariantError(f"zero column {k} has a low")
            if not (self.U[k] >> k) & 1:
                raise InvariantError(f"U diagonal missing at {k}")
            for c in bits(self.U[k]):
                if pos[c] < pos[k]:
                    raise InvariantError(f"U not upper triangular at ({k}, {c})")
        cols = [0] * n
        for k in range(n):
            for c in bits(self.U[k]):
                cols[c] ^= self.R[k]
        if cols != self.D:
            raise InvariantError("D != RU")


def ru_decompose(boundary: Sequence[Sequence[int]], pos: Sequence[int] | None = None) -> RUDecomposition:
    """Left-to-right reduction.  Without ``pos`` the column order is the filtration order."""
    if pos is None:
        pos = range(len(boundary))
    return RUDecomposition(boundary, pos)


@dataclass
class PairingList:
    """Ordered interval list with stable slot ids.

    Slot ``s`` holds the simplex ids of its birth and death (``IMPLICIT`` for
    essential classes) and the homology dimension of the birth simplex.
    """

    birth: list[int]
    death: list[int]
    dims: list[int]

    def __len__(self):
        return len(self.birth)

    def slot_of(self) -> dict[int, int]:
        out = {}
        for s, (b, d) in enumerate(zip(self.birth, self.death)):
            out[b] = s
            if d != IMPLICIT:
                out[d] = s
        return out

    def intervals(self, pos: Sequence[int], implicit_pos: float = float("inf")) -> list[tuple[int, float, int]]:
        """(dim, birth position, death position) per slot, in slot order."""
        return [
            (dm, pos[b], implicit_pos if d == IMPLICIT else pos[d])
            for b, d, dm in zip(self.birth, self.death, self.dims)
        ]


def extract_pairs(ru: RUDecomposition, dims: Sequence[int]) -> PairingList:
    """Pairing list ordered by birth position (ties by simplex id)."""
    prs = sorted(ru.pairs(), key=lambda bd: (ru.pos[bd[0]], bd[0]))
    return PairingList([b for b, _ in prs], [d for _, d in prs], [dims[b] for b, _ in prs])
