"""Random and fixed bifiltrations used by the tests, the verifier and the benchmark."""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .bifiltration import GradedComplex, GradeMap, RawSimplex, refine_to_simplexwise


def _lower_star(simplices: list[tuple[int, ...]], fx: dict[int, float], fy: dict[int, float]) -> list[RawSimplex]:
    return [RawSimplex(s, max(fx[v] for v in s), max(fy[v] for v in s)) for s in simplices]


def random_flag(rng: np.random.Generator, n_max: int = 40, n_vertices: int | None = None,
                p: float = 0.5, max_dim: int = 2, integer_grades: bool = False) -> tuple[GradedComplex, GradeMap]:
    """Flag complex of a random graph with random (face-monotone) bigrades, at most ``n_max`` simplices.

    Each simplex gets the max of its facets' grades plus a random non-negative
    increment on each axis, so ties and non-lower-star grades both occur.
    """
    if n_vertices is None:
        n_vertices = int(rng.integers(3, 8))
    verts = list(range(n_vertices))
    edges = [e for e in combinations(verts, 2) if rng.random() < p]
    adj = {v: set() for v in verts}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    simplices: list[tuple[int, ...]] = [(v,) for v in verts] + edges
    layer = edges
    for _ in range(2, max_dim + 1):
        nxt = []
        for s in layer:
            for w in adj[s[-1]]:
                if w > s[-1] and all(w in adj[u] for u in s):
                    nxt.append(s + (w,))
        simplices += nxt
        layer = nxt
    simplices = simplices[:n_max]  # vertices, then edges, then triangles: prefixes stay closed
    grade: dict[tuple[int, ...], tuple[float, float]] = {}
    raw = []
    for s in simplices:
        base = [0.0, 0.0]
        if len(s) > 1:
            for k in range(len(s)):
                fx, fy = grade[s[:k] + s[k + 1:]]
                base = [max(base[0], fx), max(base[1], fy)]
        if integer_grades:
            inc = rng.integers(0, 3, size=2).astype(float)
        else:
            inc = rng.exponential(1.0, size=2)
        g = (base[0] + inc[0], base[1] + inc[1])
        grade[s] = g
        raw.append(RawSimplex(s, g[0], g[1]))
    return refine_to_simplexwise(raw)


def _random_linear_extension(rng: np.random.Generator, simplices: list[tuple[int, ...]]) -> list[int]:
    """Random order of the simplices in which every face precedes its cofaces."""
    index = {s: k for k, s in enumerate(simplices)}
    missing = [len(s) if len(s) > 1 else 0 for s in simplices]
    cofaces: dict[int, list[int]] = {k: [] for k in range(len(simplices))}
    for k, s in enumerate(simplices):
        if len(s) > 1:
            for j in range(len(s)):
                cofaces[index[s[:j] + s[j + 1:]]].append(k)
    ready = [k for k, m in enumerate(missing) if m == 0]
    order = []
    while ready:
        k = ready.pop(int(rng.integers(len(ready))))
        order.append(k)
        for c in cofaces[k]:
            missing[c] -= 1
            if missing[c] == 0:
                ready.append(c)
    return order


def random_shelling(rng: np.random.Generator, n_target: int = 30) -> tuple[GradedComplex, GradeMap]:
    """Triangles glued one at a time along an edge (or a new vertex), closed, then
    graded by two independent random face-respecting orders.
    """
    simplices: list[tuple[int, ...]] = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
    have = set(simplices)
    next_v = 3
    while len(simplices) < n_target:
        tris = [s for s in simplices if len(s) == 3]
        t = tris[int(rng.integers(len(tris)))]
        if rng.random() < 0.3 and next_v > 3:
            # close a triangle on existing vertices when possible
            u, v = sorted(rng.choice(next_v, size=2, replace=False).tolist())
            w = int(rng.integers(next_v))
            new = tuple(sorted({u, v, w}))
        else:
            e = list(combinations(t, 2))[int(rng.integers(3))]
            new = tuple(sorted(e + (next_v,)))
            next_v += 1
        if len(new) < 3:
            continue
        for f in [(v,) for v in new] + list(combinations(new, 2)) + [new]:
            if f not in have and len(simplices) < n_target:
                # only add a simplex when all its faces are present
                if len(f) == 1 or all(g in have for g in combinations(f, len(f) - 1)):
                    have.add(f)
                    simplices.append(f)
    simplices.sort(key=lambda s: (len(s), s))
    ox = _random_linear_extension(rng, simplices)
    oy = _random_linear_extension(rng, simplices)
    xgrade = [0] * len(simplices)
    ygrade = [0] * len(simplices)
    for g, k in enumerate(ox, start=1):
        xgrade[k] = g
    for g, k in enumerate(oy, start=1):
        ygrade[k] = g
    n = len(simplices)
    cx = GradedComplex(tuple(simplices), tuple(xgrade), tuple(ygrade))
    return cx, GradeMap(tuple(float(v) for v in range(1, n + 1)), tuple(float(v) for v in range(1, n + 1)))


def triangulated_grid(n: int, seed: int = 0) -> tuple[GradedComplex, GradeMap]:
    """Lower-star bifiltration of a triangulated square lattice, cut to n simplices.

    The first function is the lattice x-coordinate plus noise, the second a
    random field; the complex is the first n simplices in order of the first
    function (ties by dimension), which is always a subcomplex.
    """
    rng = np.random.default_rng(seed)
    m = max(2, math.ceil(math.sqrt(n / 3)) + 1)
    vid = lambda i, j: i * m + j  # noqa: E731
    simplices: list[tuple[int, ...]] = []
    for i in range(m):
        for j in range(m):
            simplices.append((vid(i, j),))
    for i in range(m):
        for j in range(m):
            if i + 1 < m:
                simplices.append(tuple(sorted((vid(i, j), vid(i + 1, j)))))
            if j + 1 < m:
                simplices.append(tuple(sorted((vid(i, j), vid(i, j + 1)))))
            if i + 1 < m and j + 1 < m:
                simplices.append(tuple(sorted((vid(i, j), vid(i + 1, j + 1)))))
                simplices.append(tuple(sorted((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))))
                simplices.append(tuple(sorted((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)))))
    fx = {vid(i, j): float(i) + 0.5 * rng.random() for i in range(m) for j in range(m)}
    fy = {v: float(rng.random()) for v in fx}
    raw = _lower_star(simplices, fx, fy)
    raw.sort(key=lambda r: (r.x, r.dim, r.vertices))
    return refine_to_simplexwise(raw[:n])


def rectangle_fixture() -> tuple[GradedComplex, GradeMap]:
    """A bifiltration whose degree-1 homology is the module of [0,1) x [0,2).

    A hollow triangle appears at the origin; it is filled by a 2-simplex at
    x = 1 and, independently, by a cone at y = 2.
    """
    raw = [
        RawSimplex((0,), 0.0, 0.0), RawSimplex((1,), 0.0, 0.0), RawSimplex((2,), 0.0, 0.0),
        RawSimplex((0, 1), 0.0, 0.0), RawSimplex((0, 2), 0.0, 0.0), RawSimplex((1, 2), 0.0, 0.0),
        RawSimplex((0, 1, 2), 1.0, 0.0),
        RawSimplex((3,), 0.0, 2.0),
        RawSimplex((0, 3), 0.0, 2.0), RawSimplex((1, 3), 0.0, 2.0), RawSimplex((2, 3), 0.0, 2.0),
        RawSimplex((0, 1, 3), 0.0, 2.0), RawSimplex((0, 2, 3), 0.0, 2.0), RawSimplex((1, 2, 3), 0.0, 2.0),
    ]
    return refine_to_simplexwise(raw)


def random_rectangles(rng: np.random.Generator, n: int, count: int) -> list[tuple[int, int, int, int]]:
    out = []
    for _ in range(count):
        s, s2 = sorted(rng.integers(1, n + 1, size=2).tolist())
        t, t2 = sorted(rng.integers(1, n + 1, size=2).tolist())
        out.append((s, s2, t, t2))
    return out
