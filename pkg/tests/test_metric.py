import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kserver import metric as M


def brute_matching(space, X, Y):
    return min(sum(space.d(x, y) for x, y in zip(X, perm)) for perm in itertools.permutations(Y))


@pytest.fixture(scope="module")
def circle16():
    return M.build_circle(16, 8, scale=2)


def test_circle_half_points(circle16):
    sp = circle16
    assert sp.scale == 2
    assert sp.d(sp.point("6.5"), sp.point("6")) == 1
    assert sp.value(sp.d(sp.point("6.5"), sp.point("6"))) == Fraction(1, 2)
    assert sp.value(sp.d(sp.point("1"), sp.point("7"))) == 2


def test_circle_antipodes(circle16):
    sp = circle16
    two, six = sp.point("2"), sp.point("6")
    assert sp.antipode[two] == six
    assert sp.d(two, six) == sp.diameter == 8


def test_odd_circle_has_no_antipodes():
    assert M.build_circle(5).antipode is None
    assert M.build_circle(6).antipode is not None


def test_circle_inexact_spacing_hints_scale():
    with pytest.raises(M.MetricError, match="try scale 2"):
        M.build_circle(16, 8, scale=1)
    with pytest.raises(M.MetricError):
        M.build_circle(2)


def test_tree_distances():
    assert M.build_tree([("a", "b", 1), ("b", "c", 1)]).d(0, 2) == 2
    star = M.build_tree([("c", "l1", 2), ("c", "l2", 3)])
    assert star.d(star.point("l1"), star.point("l2")) == 5
    assert M.build_tree([("x", "y", 7)]).diameter == 7


def test_tree_rejects_cycles_and_gaps():
    with pytest.raises(M.MetricError):
        M.build_tree([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)])
    with pytest.raises(M.MetricError):
        M.build_tree([("a", "b", 1), ("c", "d", 1)])


def test_multiray_two_rays_is_a_line():
    mr = M.build_multiray([4, 4], 1)
    line = M.build_line(9)
    order = [mr.point(f"0:{i}") for i in range(4, 0, -1)] + [mr.point("c")] + [mr.point(f"1:{i}") for i in range(1, 5)]
    assert np.array_equal(mr.dist[np.ix_(order, order)], line.dist)


def test_multiray_small_cases():
    star = M.build_multiray([1, 1, 1], 1)
    assert star.n == 4 and star.diameter == 2
    mr = M.build_multiray([2, 3], 1)
    assert mr.d(mr.point("0:2"), mr.point("1:3")) == 5
    with pytest.raises(M.MetricError):
        M.build_multiray([1.5, 2], 1)
    with pytest.raises(M.MetricError):
        M.build_multiray([2], 1)


def test_antipodal_extension_two_points():
    ext = M.antipodal_extension(M.build_general([[0, 3], [3, 0]]))
    a, b, na, nb = 0, 1, 2, 3
    assert ext.diameter == 6
    assert ext.d(a, na) == 6 and ext.d(na, nb) == 3 and ext.d(na, b) == 3
    assert ext.kind == "extended" and ext.original == (0, 1)


def test_antipodal_extension_triangle():
    ext = M.antipodal_extension(M.build_general([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    for x in range(3):
        for y in range(3):
            if x != y:
                assert ext.d(x, int(ext.antipode[y])) == 1


def test_antipodal_extension_is_identity_on_even_circle(circle16):
    assert M.antipodal_extension(circle16) is circle16


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_extension_antipode_identity(seed, n):
    base = M.random_metric(np.random.default_rng(seed), n)
    ext = M.antipodal_extension(base)
    D = ext.diameter
    assert D == 2 * base.diameter
    ap = ext.antipode
    d = ext.dist
    assert np.all(d + d[:, ap].T == D)
    assert M.triangle_violation(d) is None


def test_matching_examples(circle16):
    line = M.build_line(11, 1)
    assert M.matching_distance(line, [0, 0], [0, 10]) == 10
    assert M.matching_distance(line, [3, 7], [3, 7]) == 0
    sp = M.build_circle(8, 8)
    assert M.matching_distance(sp, [1, 6, 7], [1, 5, 7]) == brute_matching(sp, [1, 6, 7], [1, 5, 7]) == 1


def test_matching_size_mismatch():
    with pytest.raises(ValueError):
        M.matching_distance(M.build_line(3), [0], [0, 1])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 7))
def test_matching_paths_agree(seed, k):
    rng = np.random.default_rng(seed)
    sp = M.random_metric(rng, 7)
    X, Y = rng.integers(7, size=k), rng.integers(7, size=k)
    a = M.matching_distance(sp, X, Y, method="assignment")
    if k <= 6:
        assert a == M.matching_distance(sp, X, Y, method="brute")
    assert a == M.matching_distance(sp, Y, X)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_matching_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    sp = M.random_metric(rng, 6)
    X, Y, Z = (rng.integers(6, size=3) for _ in range(3))
    md = lambda a, b: M.matching_distance(sp, a, b)  # noqa: E731
    assert md(X, Y) <= md(X, Z) + md(Z, Y)


def test_pairwise_sum():
    sp = M.build_circle(8, 8)
    assert M.pairwise_sum(sp, [3]) == 0
    # both copies of 2 pair with 5; the cone identity depends on counting each pair
    assert M.pairwise_sum(sp, [2, 2, 5]) == 2 * sp.d(2, 5)
    assert M.pairwise_sum(sp, [4, 5, 6]) == 4


def test_constructed_spaces_satisfy_triangle_inequality():
    for sp in (M.build_circle(16, 8, 2), M.build_multiray([3, 3, 3]), M.build_star([1, 2, 3, 2]), M.build_line(9)):
        assert M.triangle_violation(sp.dist) is None


def test_general_rejects_bad_matrix():
    with pytest.raises(M.MetricError):
        M.build_general([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(M.MetricError):
        M.build_general([[0, 1], [2, 0]])


def test_quasiconcave_examples():
    circle = M.build_circle(8, 8)
    quad = [0, 2, 4, 6]
    sub = circle.dist[np.ix_(quad, quad)]
    ok, witness = M.is_quasiconcave(sub)
    assert not ok and sorted(witness) == [0, 1, 2, 3]
    # the three pairings: 2+2, 4+4, 2+2, so the maximum is unique
    sums = sorted([sub[0, 1] + sub[2, 3], sub[0, 2] + sub[1, 3], sub[0, 3] + sub[1, 2]])
    assert sums[-1] > sums[-2]
    assert M.is_quasiconcave(M.build_general([[0, 3, 4], [3, 0, 5], [4, 5, 0]]))[0]
    assert M.is_quasiconcave(M.build_tree([("a", "b", 1), ("b", "c", 2), ("b", "d", 3), ("d", "e", 1)]))[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(4, 7))
def test_quasiconcave_implementations_agree(seed, n):
    sp = M.random_metric(np.random.default_rng(seed), n)
    assert M.is_quasiconcave(sp)[0] == M.is_quasiconcave_scan(sp)[0]


def test_reconstruct_small_trees():
    t = M.tree_from_quasiconcave(np.array([[0, 5], [5, 0]]))
    assert t.edges == [(0, 1, 5)]
    t = M.tree_from_quasiconcave(np.array([[0, 3, 4], [3, 0, 5], [4, 5, 0]]))
    assert sorted(w for _, _, w in t.edges) == [1, 2, 3]


def test_reconstruct_rejects_non_tree_metric():
    with pytest.raises(M.MetricError, match="not quasiconcave"):
        M.tree_from_quasiconcave(M.build_circle(4, 4))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 10))
def test_tree_round_trip(seed, leaves):
    _, d = M.random_tree_metric(np.random.default_rng(seed), leaves)
    tree = M.tree_from_quasiconcave(d)
    assert tree.is_tree()
    assert all(w >= 0 for _, _, w in tree.edges)
    assert np.array_equal(M.leaf_metric(tree), d)
