import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest

from wassertree import (
    DomainError,
    INFINITY,
    MetricTree,
    TreePoint,
    canonicalize,
    dist,
    future_ends,
    gromov_product,
    path_between_ends,
    validate_tree,
)

from gen import random_tree


def test_tripod_is_valid(tripod):
    report = validate_tree(tripod)
    assert report.valid
    assert report.violations == ()


def test_degree_two_vertex_is_flagged():
    t = MetricTree(
        vertices=["v0", "a", "v1"],
        edges=[("v0", "a", 1), ("a", "v1", 1)],
        ends=[("A", "v0"), ("B", "v0"), ("C", "v1"), ("D", "v1")],
        base="v0",
    )
    report = validate_tree(t)
    assert not report.valid
    assert any("non-canonical" in v for v in report.violations)


def test_cycle_is_flagged():
    t = MetricTree(
        vertices=["a", "b", "c"],
        edges=[("a", "b", 1), ("b", "c", 1), ("c", "a", 1)],
        ends=[("X", "a"), ("Y", "b")],
        base="a",
    )
    report = validate_tree(t)
    assert not report.valid
    assert any("acyclic" in v for v in report.violations)


def test_disconnected_is_flagged():
    t = MetricTree(
        vertices=["a", "b"],
        edges=[],
        ends=[("X", "a"), ("Y", "b")],
        base="a",
    )
    report = validate_tree(t)
    assert not report.valid
    assert "not connected" in report.violations


def test_too_few_ends_flagged():
    t = MetricTree(vertices=["a"], edges=[], ends=[("X", "a")], base="a")
    assert not validate_tree(t).valid


def test_nonpositive_length_flagged():
    t = MetricTree(
        vertices=["a", "b"],
        edges=[("a", "b", 0)],
        ends=[("X", "a"), ("Y", "a"), ("Z", "b"), ("W", "b")],
        base="a",
    )
    report = validate_tree(t)
    assert not report.valid
    assert any("non-positive length" in v for v in report.violations)


def test_canonicalize_merges_path():
    t = MetricTree(
        vertices=["v0", "a", "v1"],
        edges=[("v0", "a", 1), ("a", "v1", 1)],
        ends=[("A", "v0"), ("B", "v0"), ("C", "v1"), ("D", "v1")],
        base="v0",
    )
    out = canonicalize(t)
    assert out.vertices == ("v0", "v1")
    assert out.edge_length[("v0", "v1")] == 2
    assert validate_tree(out).valid


def test_canonicalize_identity_on_canonical(caterpillar):
    out = canonicalize(caterpillar)
    assert out.vertices == caterpillar.vertices
    assert out.edges == caterpillar.edges
    assert out.ends == caterpillar.ends


def test_canonicalize_reattaches_end_over_suppressed_vertex():
    # w carries only the end E and the edge to v: E reattaches to v.
    t = MetricTree(
        vertices=["v", "w"],
        edges=[("v", "w", 3)],
        ends=[("A", "v"), ("B", "v"), ("E", "w")],
        base="v",
    )
    out = canonicalize(t)
    assert out.vertices == ("v",)
    assert out.ends["E"] == "v"
    assert validate_tree(out).valid  # v keeps degree 3


def test_canonicalize_keeps_degree_two_base():
    t = MetricTree(
        vertices=["v0", "v1"],
        edges=[("v0", "v1", 1)],
        ends=[("A", "v0"), ("C", "v1"), ("D", "v1")],
        base="v0",
    )
    out = canonicalize(t)
    assert "v0" in out.vertices
    report = validate_tree(out)
    assert report.valid
    assert any("degree 2" in w for w in report.warnings)
    assert out.base_is_degree_two


def test_canonicalize_idempotent_random():
    rng = random.Random(7)
    for _ in range(25):
        t = random_tree(rng)
        once = canonicalize(t)
        twice = canonicalize(once)
        assert once.vertices == twice.vertices
        assert once.edges == twice.edges
        assert once.ends == twice.ends


def test_path_between_ends_tripod(tripod):
    path = path_between_ends(tripod, "A", "B")
    assert path.vertices == ("c",)
    assert path.edges == ()


def test_path_between_ends_caterpillar(caterpillar):
    # Independent check: breadth-first search over the attach vertices.
    path = path_between_ends(caterpillar, "A", "D")
    assert path.vertices == ("v0", "v1")
    assert path.edges == (("v0", "v1"),)
    path2 = path_between_ends(caterpillar, "C", "D")
    assert path2.vertices == ("v1",)


def test_path_same_end_rejected(caterpillar):
    with pytest.raises(DomainError):
        path_between_ends(caterpillar, "A", "A")


def test_gromov_product_caterpillar(caterpillar):
    assert gromov_product(caterpillar, "C", "D") == 2
    assert gromov_product(caterpillar, "A", "B") == 0
    assert gromov_product(caterpillar, "A", "D") == 0
    assert gromov_product(caterpillar, "C", "B") == 0


def test_gromov_product_diagonal_sentinel(caterpillar):
    value = gromov_product(caterpillar, "A", "A")
    assert value is INFINITY
    with pytest.raises(TypeError):
        value + 1  # the sentinel never enters arithmetic


def _brute_gromov(t, a, b):
    # Oracle: distance from the base to the nearest path vertex.
    path = path_between_ends(t, a, b)
    return min(t.vertex_distance(t.base, v) for v in path.vertices)


def test_gromov_product_matches_brute_force_random():
    rng = random.Random(11)
    for _ in range(30):
        t = random_tree(rng)
        ends = list(t.ends)
        for a, b in combinations(ends, 2):
            assert gromov_product(t, a, b) == _brute_gromov(t, a, b)


def test_gromov_tree_inequality_random():
    # d0(a,c) >= min(d0(a,b), d0(b,c)) for all distinct triples.
    rng = random.Random(13)
    checked = 0
    while checked < 12:
        t = random_tree(rng, max_internal=4, extra_ends=6)
        ends = list(t.ends)
        if len(ends) > 8 or len(ends) < 3:
            continue
        checked += 1
        for a, b, c in permutations(ends, 3):
            assert gromov_product(t, a, c) >= min(
                gromov_product(t, a, b), gromov_product(t, b, c)
            )


def test_future_ends_caterpillar(caterpillar):
    assert future_ends(caterpillar, "v0", "v1") == {"C", "D"}
    assert future_ends(caterpillar, "v1", "v0") == {"A", "B"}
    assert future_ends(caterpillar, "v0", "A") == {"A"}
    assert future_ends(caterpillar, "A", "v0") == {"B", "C", "D"}


def test_future_ends_partition_random():
    rng = random.Random(17)
    for _ in range(20):
        t = random_tree(rng)
        all_ends = frozenset(t.ends)
        for u, v, _length in t.edges:
            fwd = future_ends(t, u, v)
            bwd = future_ends(t, v, u)
            assert fwd | bwd == all_ends
            assert not (fwd & bwd)


def test_dist_examples(caterpillar):
    v0 = TreePoint.at_vertex("v0")
    v1 = TreePoint.at_vertex("v1")
    d_pt = TreePoint.on_ray("D", "v1", Fraction(1))
    assert dist(caterpillar, v0, v0) == 0
    assert dist(caterpillar, v0, v1) == 2
    assert dist(caterpillar, v0, d_pt) == 3


def test_dist_same_edge_shortcut(caterpillar):
    p = TreePoint.on_edge("v0", "v1", Fraction(1, 2), Fraction(2))
    q = TreePoint.on_edge("v0", "v1", Fraction(3, 2), Fraction(2))
    assert dist(caterpillar, p, q) == 1
    r = TreePoint.on_ray("A", "v0", Fraction(2))
    s = TreePoint.on_ray("A", "v0", Fraction(5))
    assert dist(caterpillar, r, s) == 3


def _random_points(rng, t, count):
    points = [TreePoint.at_vertex(v) for v in t.vertices]
    for u, v, length in t.edges:
        points.append(TreePoint.on_edge(u, v, length / 2, length))
    for e, attach in t.ends.items():
        points.append(TreePoint.on_ray(e, attach, Fraction(rng.randint(1, 5))))
    rng.shuffle(points)
    return points[:count]


def test_dist_is_a_metric_random():
    rng = random.Random(19)
    for _ in range(10):
        t = random_tree(rng)
        pts = _random_points(rng, t, 14)
        for p in pts:
            assert dist(t, p, p) == 0
        for p, q in combinations(pts, 2):
            d = dist(t, p, q)
            assert d > 0
            assert d == dist(t, q, p)
        for p, q, r in combinations(pts, 3):
            assert dist(t, p, r) <= dist(t, p, q) + dist(t, q, r)


def test_canonicalize_preserves_distances():
    t = MetricTree(
        vertices=["v0", "m1", "m2", "v1"],
        edges=[("v0", "m1", Fraction(1, 2)), ("m1", "m2", Fraction(3, 4)), ("m2", "v1", Fraction(3, 4))],
        ends=[("A", "v0"), ("B", "v0"), ("C", "v1"), ("D", "v1")],
        base="v0",
    )
    out = canonicalize(t)
    # Surviving vertices keep their distance: 1/2 + 3/4 + 3/4.
    assert out.vertex_distance("v0", "v1") == 2


def test_point_normalization():
    assert TreePoint.on_edge("u", "v", Fraction(0), Fraction(2)) == TreePoint.at_vertex("u")
    assert TreePoint.on_edge("u", "v", Fraction(2), Fraction(2)) == TreePoint.at_vertex("v")
    # Same point encoded from both directions collapses to one value.
    a = TreePoint.on_edge("u", "v", Fraction(1, 2), Fraction(2))
    b = TreePoint.on_edge("v", "u", Fraction(3, 2), Fraction(2))
    assert a == b
    assert TreePoint.on_ray("E", "u", Fraction(0)) == TreePoint.at_vertex("u")
