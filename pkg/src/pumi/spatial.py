"""Block-based partitioning of the bounding box and fixed-radius search.

The bounding box is cut into ``q x q`` square blocks. Points are bucketed by
block (row-major, row = y direction) and a range query only scans the buckets
of the query block's neighbourhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCover, OutOfDomain, RadiusExceedsBlock, TooFewPoints
from .geometry import BoundingBox, ConvexHull, Rect, as_points, points_in_hull

# slack added to radius / block-edge before picking the stencil width, keeps
# the search exact when the ratio is an integer up to rounding
_STENCIL_SLACK = 1e-9
MAX_STENCIL = 2


@dataclass(frozen=True)
class PuCenters:
    centers: np.ndarray
    d_pu: int
    delta_pu: float

    @property
    def d(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class Neighborhood:
    block: tuple
    member_blocks: tuple


def pu_grid_resolution(n: int) -> int:
    """Centers per side of the candidate grid, ``floor(sqrt(N) / 2)``."""
    if n < 16:
        raise TooFewPoints(f"need at least 16 sites, got {n}")
    return math.isqrt(n) // 2


def build_pu_centers(hull: ConvexHull, rect: Rect, box: BoundingBox, n: int,
                     delta_scale: float = 1.0) -> PuCenters:
    d_pu = pu_grid_resolution(n)
    xs = np.linspace(rect.min_x, rect.max_x, d_pu)
    ys = np.linspace(rect.min_y, rect.max_y, d_pu)
    gx, gy = np.meshgrid(xs, ys)
    cand = np.column_stack([gx.ravel(), gy.ravel()])
    keep = cand[points_in_hull(cand, hull)]
    if len(keep) == 0:
        raise EmptyCover("no candidate PU center lies inside the convex hull")
    delta = box.side * math.sqrt(2.0) / d_pu * delta_scale
    return PuCenters(keep, d_pu, delta)


def block_count(box: BoundingBox, delta_pu: float) -> int:
    if not delta_pu > 0:
        raise ValueError("delta_pu must be positive")
    return max(1, math.ceil(box.side / delta_pu))


def block_of(p, box: BoundingBox, q: int) -> tuple:
    rows, cols = blocks_of(np.asarray(p, dtype=float).reshape(1, 2), box, q)
    return int(rows[0]), int(cols[0])


def blocks_of(pts, box: BoundingBox, q: int):
    """Vectorized ``block_of``; returns (rows, cols) integer arrays."""
    pts = as_points(pts)
    if len(pts) and not np.all(box.contains(pts)):
        bad = np.flatnonzero(~box.contains(pts))
        raise OutOfDomain(f"{len(bad)} point(s) outside the bounding box, first index {bad[0]}")
    edge = box.side / q
    cols = np.floor((pts[:, 0] - box.origin[0]) / edge).astype(np.int64)
    rows = np.floor((pts[:, 1] - box.origin[1]) / edge).astype(np.int64)
    np.clip(cols, 0, q - 1, out=cols)
    np.clip(rows, 0, q - 1, out=rows)
    return rows, cols


def neighborhood_of(block, q: int, reach: int = 1) -> Neighborhood:
    r, c = block
    if not (0 <= r < q and 0 <= c < q):
        raise ValueError(f"block {block} outside a {q}x{q} grid")
    members = tuple(
        (i, j)
        for i in range(max(0, r - reach), min(q, r + reach + 1))
        for j in range(max(0, c - reach), min(q, c + reach + 1))
    )
    return Neighborhood((r, c), members)


class BlockGrid:
    """Points bucketed into the ``q x q`` blocks of a bounding box.

    Buckets are stored CSR-style: ``order`` lists point indices sorted by
    row-major block id and ``starts[k]:starts[k+1]`` is the slice of block
    ``k``. Consecutive columns of one block row are contiguous, so a stencil
    query costs one slice per row.
    """

    def __init__(self, sites, box: BoundingBox, q: int):
        self.sites = as_points(sites)
        self.box = box
        self.q = int(q)
        self.edge = box.side / self.q
        rows, cols = blocks_of(self.sites, box, self.q)
        ids = rows * self.q + cols
        self.order = np.argsort(ids, kind="stable")
        counts = np.bincount(ids, minlength=self.q * self.q)
        self.starts = np.concatenate([[0], np.cumsum(counts)])

    def bucket(self, row: int, col: int) -> np.ndarray:
        k = row * self.q + col
        return self.order[self.starts[k]:self.starts[k + 1]]

    @property
    def buckets(self) -> list:
        return [self.bucket(r, c).tolist() for r in range(self.q) for c in range(self.q)]

    def reach_for(self, radius: float) -> int:
        """Stencil half-width needed for an exact search at ``radius``.

        1 is the 3x3 neighbourhood, 2 the 5x5 fallback. Radii needing more
        are rejected unless the stencil already spans the whole grid.
        """
        s = int(math.floor(radius / self.edge + _STENCIL_SLACK)) + 1
        if s >= self.q - 1:
            return max(1, min(s, self.q - 1))
        if s > MAX_STENCIL:
            raise RadiusExceedsBlock(
                f"radius {radius!r} exceeds {MAX_STENCIL} block edges ({self.edge!r})")
        return s

    def candidates(self, center, reach: int) -> np.ndarray:
        # projecting onto the box never increases distances to boxed points,
        # so an exterior center is searched from its projection
        ox, oy = self.box.origin
        q = self.q
        c = min(max(math.floor((float(center[0]) - ox) / self.edge), 0), q - 1)
        r = min(max(math.floor((float(center[1]) - oy) / self.edge), 0), q - 1)
        c0, c1 = max(0, c - reach), min(self.q - 1, c + reach)
        parts = []
        for row in range(max(0, r - reach), min(self.q - 1, r + reach) + 1):
            base = row * self.q
            lo, hi = self.starts[base + c0], self.starts[base + c1 + 1]
            if hi > lo:
                parts.append(self.order[lo:hi])
        if not parts:
            return np.empty(0, dtype=np.int64)
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def query(self, center, radius: float) -> np.ndarray:
        center = np.asarray(center, dtype=float).reshape(2)
        cand = self.candidates(center, self.reach_for(radius))
        if len(cand) == 0:
            return cand
        diff = self.sites[cand] - center
        d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
        return cand[d2 <= radius * radius]


def build_block_grid(sites, box: BoundingBox, q: int) -> BlockGrid:
    return BlockGrid(sites, box, q)


def range_query(center, radius: float, grid: BlockGrid, sites=None) -> list:
    """Indices of sites within ``radius`` of ``center`` (sorted)."""
    if sites is not None and len(sites) != len(grid.sites):
        raise ValueError("sites do not match the ones the grid was built on")
    return sorted(grid.query(center, radius).tolist())


def brute_force_query(center, radius: float, sites) -> list:
    pts = as_points(sites)
    if len(pts) == 0:
        return []
    diff = pts - np.asarray(center, dtype=float).reshape(2)
    d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
    return np.flatnonzero(d2 <= radius * radius).tolist()
