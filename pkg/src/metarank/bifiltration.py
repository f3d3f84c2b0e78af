"""Bifiltered simplicial complexes: parsing, validation and grid refinement.

A one-critical bifiltration assigns every simplex a single real bigrade.
:func:`refine_to_simplexwise` turns it into a :class:`GradedComplex` whose
x-grades and y-grades are each a permutation of ``1..n``, so that every
unit step of the ``n x n`` grid adds at most one simplex.  The real value
of every grid index is kept in a :class:`GradeMap`.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

Simplex = tuple[int, ...]

# Sentinels returned by grade lookups.  Grid indices are 1-based, so 0 sits
# below the grid and ``len(values) + 1`` plays the role of +infinity.
BELOW = 0


class BifiltrationError(ValueError):
    """Raised for malformed or invalid bifiltration input."""


class ParseError(BifiltrationError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class RawSimplex:
    vertices: Simplex
    x: float
    y: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def facets(simplex: Simplex) -> list[Simplex]:
    if len(simplex) <= 1:
        return []
    return [simplex[:k] + simplex[k + 1:] for k in range(len(simplex))]


def parse_bifiltration(text: str) -> list[RawSimplex]:
    """Parse ``v0 v1 ... vk ; x y`` lines into raw simplices (file order)."""
    out: list[RawSimplex] = []
    seen: dict[Simplex, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count(";") != 1:
            raise ParseError(lineno, "expected exactly one ';' separating vertices and grade")
        lhs, rhs = (part.split() for part in line.split(";"))
        if not lhs:
            raise ParseError(lineno, "no vertices")
        try:
            verts = [int(v) for v in lhs]
        except ValueError:
            raise ParseError(lineno, f"bad vertex id in {lhs!r}") from None
        if any(v < 0 for v in verts):
            raise ParseError(lineno, "vertex ids must be non-negative")
        simplex = tuple(sorted(verts))
        if len(set(simplex)) != len(simplex):
            raise ParseError(lineno, f"repeated vertex in {lhs!r}")
        if len(rhs) != 2:
            raise ParseError(lineno, f"malformed grade: expected 2 coordinates, got {len(rhs)}")
        try:
            x, y = float(rhs[0]), float(rhs[1])
        except ValueError:
            raise ParseError(lineno, f"malformed grade {rhs!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(lineno, "grades must be finite")
        if simplex in seen:
            raise ParseError(
                lineno,
                f"duplicate simplex {list(simplex)} (first on line {seen[simplex]}); "
                "multi-critical input is not supported",
            )
        seen[simplex] = lineno
        out.append(RawSimplex(simplex, x, y))
    return out


def format_bifiltration(raw: Iterable[RawSimplex]) -> str:
    lines = [" ".join(map(str, r.vertices)) + f" ; {r.x!r} {r.y!r}" for r in raw]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class GradeMap:
    """Real value of every grid index, per axis.

    Values are non-decreasing; ties from the refinement are kept verbatim.
    The constructibility set of an axis is its set of distinct values.
    """

    xvalues: tuple[float, ...]
    yvalues: tuple[float, ...]

    def __post_init__(self):
        for vals in (self.xvalues, self.yvalues):
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise BifiltrationError("grade values must be non-decreasing")
        if len(self.xvalues) != len(self.yvalues):
            raise BifiltrationError("axes must have the same grid size")

    @property
    def n(self) -> int:
        return len(self.xvalues)

    def values(self, axis: str) -> tuple[float, ...]:
        if axis == "x":
            return self.xvalues
        if axis == "y":
            return self.yvalues
        raise ValueError(f"unknown axis {axis!r}")

    def distinct(self, axis: str) -> list[float]:
        return sorted(set(self.values(axis)))

    def irreg(self, axis: str) -> float:
        return irreg(self.distinct(axis))

    def transposed(self) -> GradeMap:
        return GradeMap(self.yvalues, self.xvalues)

    def shifted(self, dx: float, dy: float) -> GradeMap:
        return GradeMap(tuple(v + dx for v in self.xvalues), tuple(v + dy for v in self.yvalues))

    def index_at(self, axis: str, t: float) -> int:
        """Largest grid index whose value is <= t (0 if none).

        This is the grid column realizing the real coordinate ``t``.
        """
        return bisect.bisect_right(self.values(axis), t)

    def index_before(self, axis: str, t: float) -> int:
        """Largest grid index whose value is < t (0 if none); t may be inf."""
        return bisect.bisect_left(self.values(axis), t)

    def value(self, axis: str, index: int) -> float:
        """Real value of a 1-based grid index; index n+1 maps to +inf."""
        vals = self.values(axis)
        if index == len(vals) + 1:
            return math.inf
        if not 1 <= index <= len(vals):
            raise IndexError(index)
        return vals[index - 1]


def irreg(values: Sequence[float]) -> float:
    """Spread between the largest and smallest consecutive gap (0 if < 3 values)."""
    gaps = [b - a for a, b in zip(values, values[1:])]
    if not gaps:
        return 0.0
    return max(gaps) - min(gaps)


LOOKUP_MODES = ("<", "<=", ">=", ">")


def grade_lookup(values: Sequence[float], mode: str, t: float) -> int:
    """Index into the sorted distinct ``values`` selected by ``mode``.

    ``"<"``/``"<="`` return the largest 1-based index with value < t / <= t,
    or :data:`BELOW` when there is none.  ``">="``/``">"`` return the
    smallest index with value >= t / > t, or ``len(values) + 1`` (infinity)
    past the top.
    """
    if mode == "<":
        return bisect.bisect_left(values, t)
    if mode == "<=":
        return bisect.bisect_right(values, t)
    if mode == ">=":
        return bisect.bisect_left(values, t) + 1
    if mode == ">":
        return bisect.bisect_right(values, t) + 1
    raise ValueError(f"unknown lookup mode {mode!r}")


@dataclass(frozen=True)
class GradedComplex:
    """Simplex-wise bifiltration: x- and y-grades are permutations of 1..n."""

    simplices: tuple[Simplex, ...]
    xgrade: tuple[int, ...]
    ygrade: tuple[int, ...]
    facet_index: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.simplices)
        if len(self.xgrade) != n or len(self.ygrade) != n:
            raise BifiltrationError("grade arrays must match the number of simplices")
        if sorted(self.xgrade) != list(range(1, n + 1)) or sorted(self.ygrade) != list(range(1, n + 1)):
            raise BifiltrationError("grades must be permutations of 1..n")
        where = {s: k for k, s in enumerate(self.simplices)}
        if len(where) != n:
            raise BifiltrationError("duplicate simplex")
        fidx = []
        for k, s in enumerate(self.simplices):
            if list(s) != sorted(set(s)):
                raise BifiltrationError(f"simplex {s} must have strictly increasing vertices")
            row = []
            for f in facets(s):
                j = where.get(f)
                if j is None:
                    raise BifiltrationError(f"missing facet {list(f)} of simplex {list(s)}")
                if self.xgrade[j] > self.xgrade[k] or self.ygrade[j] > self.ygrade[k]:
                    raise BifiltrationError(f"face {list(f)} arrives after coface {list(s)}")
                row.append(j)
            fidx.append(tuple(row))
        object.__setattr__(self, "facet_index", tuple(fidx))

    @property
    def n(self) -> int:
        return len(self.simplices)

    def dim(self, k: int) -> int:
        return len(self.simplices[k]) - 1

    @property
    def max_dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def by_xgrade(self) -> list[int]:
        """Simplex indices ordered by x-grade: entry a-1 is the simplex at x = a."""
        out = [0] * self.n
        for k, g in enumerate(self.xgrade):
            out[g - 1] = k
        return out

    def by_ygrade(self) -> list[int]:
        out = [0] * self.n
        for k, g in enumerate(self.ygrade):
            out[g - 1] = k
        return out

    def subcomplex(self, a: int, b: int) -> list[int]:
        """Indices of simplices present at grid point (a, b)."""
        return [k for k in range(self.n) if self.xgrade[k] <= a and self.ygrade[k] <= b]


def refine_to_simplexwise(raw: Sequence[RawSimplex]) -> tuple[GradedComplex, GradeMap]:
    """Refine real bigrades to a simplex-wise grid.

    Ties are broken by (grade, dimension, input index) on each axis.
    """
    where = {r.vertices: k for k, r in enumerate(raw)}
    if len(where) != len(raw):
        raise BifiltrationError("duplicate simplex in input")
    for r in raw:
        for f in facets(r.vertices):
            j = where.get(f)
            if j is None:
                raise BifiltrationError(f"complex is not closed: facet {list(f)} of {list(r.vertices)} is missing")
            g = raw[j]
            if g.x > r.x or g.y > r.y:
                raise BifiltrationError(
                    f"face-monotonicity violated: {list(f)} at ({g.x}, {g.y}) "
                    f"after {list(r.vertices)} at ({r.x}, {r.y})"
                )
    n = len(raw)
    xorder = sorted(range(n), key=lambda k: (raw[k].x, raw[k].dim, k))
    yorder = sorted(range(n), key=lambda k: (raw[k].y, raw[k].dim, k))
    xgrade = [0] * n
    ygrade = [0] * n
    for g, k in enumerate(xorder, start=1):
        xgrade[k] = g
    for g, k in enumerate(yorder, start=1):
        ygrade[k] = g
    complex_ = GradedComplex(tuple(r.vertices for r in raw), tuple(xgrade), tuple(ygrade))
    gmap = GradeMap(tuple(raw[k].x for k in xorder), tuple(raw[k].y for k in yorder))
    return complex_, gmap


def load_bifiltration(path: str) -> tuple[GradedComplex, GradeMap]:
    with open(path, encoding="utf-8") as fh:
        return refine_to_simplexwise(parse_bifiltration(fh.read()))


def path_position(complex_: GradedComplex, k: int, i: int) -> int:
    """Arrival position of simplex k along the staircase path through column i.

    The path runs (1,1) -> (i,1) -> (i,n) -> (n,n); its vertices are numbered
    1..2n-1, with (i, h) at position i + h - 1.
    """
    n = complex_.n
    x, y = complex_.xgrade[k], complex_.ygrade[k]
    if x > i:
        return n - 1 + x
    if y == 1:
        return x
    return i + y - 1


def filtration_along_path(complex_: GradedComplex, i: int) -> list[tuple[int, int]]:
    """All simplices as (index, arrival position), ordered by arrival along the path."""
    if not 1 <= i <= max(complex_.n, 1):
        raise ValueError(f"column {i} out of range")
    arr = [(k, path_position(complex_, k, i)) for k in range(complex_.n)]
    arr.sort(key=lambda kp: kp[1])
    return arr


def transpose_axes(complex_: GradedComplex) -> GradedComplex:
    """Swap the roles of the two parameters."""
    return GradedComplex(complex_.simplices, complex_.ygrade, complex_.xgrade)


def disjoint_union(
    a: GradedComplex, ga: GradeMap, b: GradedComplex, gb: GradeMap
) -> tuple[GradedComplex, GradeMap, dict[str, list[int]]]:
    """Disjoint union on a merged grid.

    Vertex ids of ``b`` are offset past those of ``a``.  On each axis the two
    grade orders are merged by real value, ties ``a`` first.  The returned
    ``index_maps`` give, for each factor and axis, the union grid index of
    every factor grid index (keys ``ax``, ``ay``, ``bx``, ``by``; 1-based,
    entry 0 unused).
    """
    offset = 1 + max((v for s in a.simplices for v in s), default=-1)
    simplices = a.simplices + tuple(tuple(v + offset for v in s) for s in b.simplices)
    na, nb = a.n, b.n
    maps: dict[str, list[int]] = {}
    grades: dict[str, list[int]] = {}
    values: dict[str, tuple[float, ...]] = {}
    for axis in ("x", "y"):
        va, vb = ga.values(axis), gb.values(axis)
        merged = sorted(
            [(v, 0, i) for i, v in enumerate(va, start=1)] + [(v, 1, i) for i, v in enumerate(vb, start=1)]
        )
        ma = [0] * (na + 1)
        mb = [0] * (nb + 1)
        for g, (_, side, i) in enumerate(merged, start=1):
            (ma if side == 0 else mb)[i] = g
        maps["a" + axis], maps["b" + axis] = ma, mb
        ga_ = a.xgrade if axis == "x" else a.ygrade
        gb_ = b.xgrade if axis == "x" else b.ygrade
        grades[axis] = [ma[g] for g in ga_] + [mb[g] for g in gb_]
        values[axis] = tuple(v for v, _, _ in merged)
    union = GradedComplex(simplices, tuple(grades["x"]), tuple(grades["y"]))
    return union, GradeMap(values["x"], values["y"]), maps


def is_subcomplex(simplices: Iterable[Simplex]) -> bool:
    present = set(simplices)
    return all(f in present for s in present for f in facets(s))


def all_faces(simplex: Simplex) -> list[Simplex]:
    """Every non-empty face of a simplex, including itself."""
    return [c for d in range(1, len(simplex) + 1) for c in combinations(simplex, d)]
