import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from pumi.errors import OutOfDomain, RadiusExceedsBlock, TooFewPoints
from pumi.geometry import BoundingBox, Point2, bounding_box, bounding_rect, convex_hull
from pumi.kdtree import KdTree, kd_range_query
from pumi.spatial import (BlockGrid, block_count, block_of, brute_force_query, build_pu_centers,
                          neighborhood_of, pu_grid_resolution, range_query)

UNIT = BoundingBox(Point2(0.0, 0.0), 1.0)


@pytest.mark.parametrize("n, d", [(16, 2), (24, 2), (100, 5), (1024, 16), (10000, 50)])
def test_pu_grid_resolution(n, d):
    assert pu_grid_resolution(n) == d


def test_pu_grid_resolution_too_few():
    with pytest.raises(TooFewPoints):
        pu_grid_resolution(15)


def test_pu_centers_unit_square():
    pts = np.random.default_rng(0).random((400, 2))
    pts = np.vstack([pts, [[0, 0], [1, 0], [0, 1], [1, 1]]])
    rect = bounding_rect(pts)
    box = bounding_box(rect)
    pu = build_pu_centers(convex_hull(pts), rect, box, len(pts))
    assert pu.d_pu == 10
    assert pu.d == 100
    assert pu.delta_pu == pytest.approx(math.sqrt(2) / 10)
    assert block_count(box, pu.delta_pu) == 8


def test_pu_centers_drop_outside_hull():
    # right triangle: roughly half the candidate grid falls outside
    rng = np.random.default_rng(1)
    pts = rng.random((2000, 2))
    pts = pts[pts.sum(axis=1) <= 1]
    pts = np.vstack([pts, [[0, 0], [1, 0], [0, 1]]])
    rect = bounding_rect(pts)
    pu = build_pu_centers(convex_hull(pts), rect, bounding_box(rect), len(pts))
    assert pu.d < pu.d_pu ** 2
    assert np.all(pu.centers.sum(axis=1) <= 1 + 1e-12)


@pytest.mark.parametrize("p, q, blk", [
    ((0.0, 0.0), 4, (0, 0)),
    ((0.3, 0.6), 4, (2, 1)),
    ((1.0, 1.0), 4, (3, 3)),
    ((0.25, 0.75), 4, (3, 1)),
])
def test_block_of(p, q, blk):
    assert block_of(p, UNIT, q) == blk


def test_block_of_outside():
    with pytest.raises(OutOfDomain):
        block_of((1.5, 0.2), UNIT, 4)


def test_neighborhood_sizes():
    assert len(neighborhood_of((0, 0), 4).member_blocks) == 4
    assert len(neighborhood_of((0, 2), 4).member_blocks) == 6
    assert len(neighborhood_of((2, 2), 4).member_blocks) == 9
    assert len(neighborhood_of((2, 2), 5, reach=2).member_blocks) == 25


def test_buckets_partition_the_sites(rng):
    pts = rng.random((500, 2))
    grid = BlockGrid(pts, UNIT, 7)
    flat = sorted(i for b in grid.buckets for i in b)
    assert flat == list(range(500))
    for r in range(7):
        for c in range(7):
            for i in grid.bucket(r, c):
                assert block_of(pts[i], UNIT, 7) == (r, c)


def test_reach_rules():
    grid = BlockGrid(np.random.default_rng(0).random((50, 2)), UNIT, 10)
    assert grid.reach_for(0.05) == 1
    assert grid.reach_for(0.1) == 2
    assert grid.reach_for(0.15) == 2
    with pytest.raises(RadiusExceedsBlock):
        grid.reach_for(0.35)
    small = BlockGrid(np.random.default_rng(0).random((50, 2)), UNIT, 3)
    assert small.reach_for(5.0) == 2


def test_range_query_examples():
    pts = np.array([[0.1, 0.1], [0.5, 0.5], [0.52, 0.5], [0.9, 0.9], [0.5, 0.62]])
    grid = BlockGrid(pts, UNIT, 8)
    assert range_query((0.5, 0.5), 0.1, grid) == [1, 2]
    assert range_query((0.5, 0.5), 0.12, grid) == [1, 2, 4]
    assert range_query((0.0, 0.0), 0.01, grid) == []
    # closed ball: a site exactly at the radius is returned (dyadic values, no rounding)
    assert range_query((0.5, 0.5), 0.125, BlockGrid([[0.5, 0.5], [0.625, 0.5]], UNIT, 8)) == [0, 1]


def test_exterior_center_projection():
    pts = np.array([[0.0, 0.5], [0.05, 0.5], [0.5, 0.5]])
    grid = BlockGrid(pts, UNIT, 10)
    c = (-0.05, 0.5)
    assert range_query(c, 0.09, grid) == brute_force_query(c, 0.09, pts) == [0]


def _check_three_way(pts, box, q, centers, radii):
    grid = BlockGrid(pts, box, q)
    tree = KdTree(pts)
    for c, r in zip(centers, radii):
        ref = brute_force_query(c, r, pts)
        assert range_query(c, r, grid) == ref
        assert kd_range_query(tree, c, r) == ref


@pytest.mark.parametrize("n", [100, 1000, 10000])
def test_structures_agree_random(n):
    rng = np.random.default_rng(n)
    pts = rng.random((n, 2)) * 3 - 1
    rect = bounding_rect(pts)
    box = bounding_box(rect)
    delta = box.side * math.sqrt(2) / pu_grid_resolution(n)
    q = block_count(box, delta)
    centers = box.origin + rng.random((200, 2)) * box.side
    radii = rng.uniform(0, delta, 200)
    _check_three_way(pts, box, q, centers, radii)


def test_structures_agree_on_duplicates_and_grid_points():
    g = np.linspace(0, 1, 11)
    pts = np.array([(x, y) for x in g for y in g] * 2)
    box = bounding_box(bounding_rect(pts))
    centers = pts[::7]
    _check_three_way(pts, box, 10, centers, [0.1] * len(centers))


@settings(deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=2, max_size=80),
       st.tuples(st.floats(-0.2, 1.2), st.floats(-0.2, 1.2)),
       st.floats(0, 0.25), st.integers(1, 12))
@example([(0.0, 0.0), (0.0, 0.0), (0.0, 1.0), (0.0, 2.3833046530218966e-179)], (0.0, 0.0), 0.0, 1)
def test_structures_agree_property(pts, center, radius, q):
    pts = np.array(pts)
    grid = BlockGrid(pts, UNIT, q)
    try:
        got = range_query(center, radius, grid)
    except RadiusExceedsBlock:
        assert radius / (1 / q) + 1e-9 >= 2
        return
    ref = brute_force_query(center, radius, pts)
    assert got == ref
    assert kd_range_query(KdTree(pts, leaf_size=3), center, radius) == ref


def test_kdtree_leaf_sizes_and_empty_result():
    pts = np.random.default_rng(2).random((300, 2))
    for leaf in (1, 4, 16, 1000):
        tree = KdTree(pts, leaf_size=leaf)
        assert kd_range_query(tree, (5.0, 5.0), 0.5) == []
        assert kd_range_query(tree, (0.5, 0.5), 2.0) == list(range(300))
