from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metarank.bifiltration import (BELOW, BifiltrationError, GradeMap, ParseError, RawSimplex,
                                   all_faces, disjoint_union, filtration_along_path, format_bifiltration,
                                   grade_lookup, irreg, is_subcomplex, parse_bifiltration,
                                   refine_to_simplexwise, transpose_axes)
from metarank.generators import random_flag, random_shelling


def test_parse_two_vertices_and_edge():
    raw = parse_bifiltration("0 ; 0.0 0.0\n1 ; 1.0 0.0\n0 1 ; 1.0 1.0")
    assert [r.vertices for r in raw] == [(0,), (1,), (0, 1)]
    assert [(r.x, r.y) for r in raw] == [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]


def test_parse_empty_document():
    assert parse_bifiltration("") == []
    cx, g = refine_to_simplexwise([])
    assert cx.n == 0 and g.n == 0


@pytest.mark.parametrize("text, fragment", [
    ("0 1 ; 1.0", "malformed grade"),
    ("0 1 1.0 2.0", "';'"),
    ("0 0 ; 1 1", "repeated vertex"),
    ("a ; 1 1", "bad vertex"),
    ("0 ; 1 1\n0 ; 2 2", "duplicate simplex"),
    ("0 ; nan 1", "finite"),
])
def test_parse_errors_name_the_line(text, fragment):
    with pytest.raises(ParseError) as exc:
        parse_bifiltration(text)
    assert fragment in str(exc.value)


def test_parse_ignores_comments_and_blank_lines():
    raw = parse_bifiltration("# header\n\n0 ; 1 2  # trailing\n")
    assert raw == [RawSimplex((0,), 1.0, 2.0)]


def test_format_roundtrip():
    raw = [RawSimplex((0,), 0.5, 0.0), RawSimplex((1,), 1.0, 0.25), RawSimplex((0, 1), 1.0, 0.25)]
    assert parse_bifiltration(format_bifiltration(raw)) == raw


def test_refine_ties_by_dimension_then_input_order():
    raw = [RawSimplex((0,), 0, 0), RawSimplex((1,), 0, 0), RawSimplex((0, 1), 1, 1)]
    cx, g = refine_to_simplexwise(raw)
    assert cx.xgrade == (1, 2, 3)
    assert cx.ygrade == (1, 2, 3)
    assert g.values("x") == (0.0, 0.0, 1.0)


def test_refine_ties_prefer_lower_dimension_even_if_listed_later():
    raw = [RawSimplex((0, 1), 0, 0), RawSimplex((0,), 0, 0), RawSimplex((1,), 0, 0)]
    cx, _ = refine_to_simplexwise(raw)
    k = cx.simplices.index((0, 1))
    assert cx.xgrade[k] == 3 and cx.ygrade[k] == 3


def test_refine_rejects_face_violation():
    raw = [RawSimplex((0,), 1, 0), RawSimplex((1,), 0, 0), RawSimplex((0, 1), 0, 0)]
    with pytest.raises(BifiltrationError, match="monoton"):
        refine_to_simplexwise(raw)


def test_refine_rejects_missing_face():
    with pytest.raises(BifiltrationError):
        refine_to_simplexwise([RawSimplex((0,), 0, 0), RawSimplex((0, 1), 1, 1)])


def test_triangle_every_grid_point_is_a_subcomplex(triangle):
    cx, g = triangle
    assert cx.n == 7
    assert sorted(cx.xgrade) == list(range(1, 8)) and sorted(cx.ygrade) == list(range(1, 8))
    for a in range(8):
        for b in range(8):
            sub = [cx.simplices[k] for k in range(cx.n) if cx.xgrade[k] <= a and cx.ygrade[k] <= b]
            assert is_subcomplex(sub), (a, b)


def test_triangle_permutations_follow_real_grades(triangle):
    cx, g = triangle
    for k in range(cx.n):
        for j in range(cx.n):
            if g.value("x", cx.xgrade[k]) < g.value("x", cx.xgrade[j]):
                assert cx.xgrade[k] < cx.xgrade[j]


def _walk_path(cx, i):
    """Staircase (1,1) -> (i,1) -> (i,n) -> (n,n), listing newly present simplices at each vertex."""
    n = cx.n
    pts = [(a, 1) for a in range(1, i + 1)] + [(i, b) for b in range(2, n + 1)] + [(a, n) for a in range(i + 1, n + 1)]
    seen: set[int] = set()
    order = []
    for p, (a, b) in enumerate(pts, start=1):
        for k in range(n):
            if k not in seen and cx.xgrade[k] <= a and cx.ygrade[k] <= b:
                seen.add(k)
                order.append((k, p))
    return order


def test_path_order_matches_walk(triangle):
    cx, _ = triangle
    for i in range(1, cx.n + 1):
        got = filtration_along_path(cx, i)
        assert got == _walk_path(cx, i)
        assert len(got) == 7 and all(1 <= p <= 2 * cx.n - 1 for _, p in got)


def test_path_extremes_sort_by_one_grade(triangle):
    cx, _ = triangle
    first = [k for k, _ in filtration_along_path(cx, 1)]
    last = [k for k, _ in filtration_along_path(cx, cx.n)]
    # gamma_1 climbs column 1 (holding only the x = 1 simplex) and then runs along the top
    assert first == sorted(range(cx.n), key=lambda k: cx.xgrade[k])
    # gamma_n runs along row 1 (only the y = 1 simplex) and then climbs
    assert last == sorted(range(cx.n), key=lambda k: cx.ygrade[k])


def test_path_rejects_bad_column(triangle):
    cx, _ = triangle
    with pytest.raises(ValueError):
        filtration_along_path(cx, 0)


@pytest.mark.parametrize("mode, t, want", [
    (">", 2.0, 3), ("<=", 0.5, BELOW), (">=", 3.5, 4), ("<", 2.0, 1), ("<=", 2.0, 2), (">=", 2.0, 2),
])
def test_grade_lookup(mode, t, want):
    assert grade_lookup((1.0, 2.0, 3.0), mode, t) == want


def test_grade_lookup_unknown_mode():
    with pytest.raises(ValueError):
        grade_lookup((1.0,), "==", 1.0)


def test_irreg():
    assert irreg([0, 1, 2, 3]) == 0
    assert irreg([0, 1, 3]) == 1
    assert irreg([5]) == 0
    g = GradeMap((0.0, 1.0, 3.0), (0.0, 2.0, 4.0))
    assert g.irreg("x") == 1 and g.irreg("y") == 0


def test_grademap_rejects_decreasing_values():
    with pytest.raises(BifiltrationError):
        GradeMap((1.0, 0.0), (0.0, 1.0))


def test_grademap_index_lookups():
    g = GradeMap((1.0, 1.0, 2.0), (0.0, 1.0, 2.0))
    assert g.index_at("x", 1.0) == 2  # last index whose value is <= 1
    assert g.index_before("x", 2.0) == 2
    assert g.index_at("x", 0.5) == 0
    assert g.shifted(1, 2).values("y") == (2.0, 3.0, 4.0)
    assert g.transposed().values("x") == (0.0, 1.0, 2.0)


def test_transpose_is_an_involution():
    rng = np.random.default_rng(3)
    for _ in range(10):
        cx, _ = random_shelling(rng, 20)
        assert transpose_axes(transpose_axes(cx)) == cx


def test_transpose_fixes_symmetric_grades():
    raw = [RawSimplex((0,), 0, 0), RawSimplex((1,), 1, 1), RawSimplex((0, 1), 2, 2)]
    cx, _ = refine_to_simplexwise(raw)
    assert transpose_axes(cx) == cx


def test_disjoint_union_with_empty_is_identity():
    rng = np.random.default_rng(4)
    a, ga = random_flag(rng, n_max=15)
    e, ge = refine_to_simplexwise([])
    u, gu, maps = disjoint_union(a, ga, e, ge)
    assert u == a and gu == ga
    assert maps["ax"][1:] == list(range(1, a.n + 1))


def test_all_faces_of_triangle():
    assert sorted(all_faces((0, 1, 2))) == sorted([(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_generators_give_valid_bifiltrations(seed):
    rng = np.random.default_rng(seed)
    for cx, g in (random_flag(rng, n_max=25), random_shelling(rng, 20)):
        assert sorted(cx.xgrade) == list(range(1, cx.n + 1))
        for a, b in itertools.product(range(0, cx.n + 1, 3), repeat=2):
            assert is_subcomplex([cx.simplices[k] for k in cx.subcomplex(a, b)])
