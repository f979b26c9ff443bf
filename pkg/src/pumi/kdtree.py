"""Plain 2D kd-tree used as the baseline structure for range queries."""

from __future__ import annotations

import numpy as np

from .geometry import as_points

LEAF_SIZE = 16


class KdTree:
    """Median-split kd-tree over a fixed point set.

    Nodes live in flat lists; leaves reference a contiguous run of
    ``self.index``. The split axis is the wider extent of the node's points.
    """

    def __init__(self, sites, leaf_size: int = LEAF_SIZE):
        self.sites = as_points(sites)
        self.leaf_size = leaf_size
        self.index = np.arange(len(self.sites))
        self.axis: list[int] = []
        self.split: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.lo: list[int] = []
        self.hi: list[int] = []
        if len(self.sites):
            self._build(0, len(self.sites))

    def _new_node(self, axis, split, lo, hi):
        self.axis.append(axis)
        self.split.append(split)
        self.left.append(-1)
        self.right.append(-1)
        self.lo.append(lo)
        self.hi.append(hi)
        return len(self.axis) - 1

    def _build(self, lo: int, hi: int) -> int:
        if hi - lo <= self.leaf_size:
            return self._new_node(-1, 0.0, lo, hi)
        idx = self.index[lo:hi]
        pts = self.sites[idx]
        axis = int(np.argmax(np.ptp(pts, axis=0)))
        mid = (hi - lo) // 2
        part = np.argpartition(pts[:, axis], mid)
        self.index[lo:hi] = idx[part]
        split = float(self.sites[self.index[lo + mid], axis])
        node = self._new_node(axis, split, lo, hi)
        # left holds [lo, lo+mid) with coords <= split, right the rest (>= split)
        left = self._build(lo, lo + mid)
        right = self._build(lo + mid, hi)
        self.left[node] = left
        self.right[node] = right
        return node

    def query(self, center, radius: float) -> np.ndarray:
        if not len(self.sites):
            return np.empty(0, dtype=np.int64)
        cx, cy = float(center[0]), float(center[1])
        c = (cx, cy)
        r2 = radius * radius
        found = []
        stack = [0]
        axis, split, left, right = self.axis, self.split, self.left, self.right
        while stack:
            n = stack.pop()
            a = axis[n]
            if a < 0:
                idx = self.index[self.lo[n]:self.hi[n]]
                p = self.sites[idx]
                d2 = (p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2
                hit = idx[d2 <= r2]
                if len(hit):
                    found.append(hit)
                continue
            # prune with the same rounded squares the leaf test uses, so a
            # subtree is skipped only if none of its sites could pass it
            diff = c[a] - split[n]
            near = diff * diff <= r2
            if diff <= 0.0 or near:
                stack.append(left[n])
            if diff >= 0.0 or near:
                stack.append(right[n])
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(found)


def kd_build(sites, leaf_size: int = LEAF_SIZE) -> KdTree:
    return KdTree(sites, leaf_size)


def kd_range_query(tree: KdTree, center, radius: float) -> list:
    return sorted(tree.query(center, radius).tolist())
