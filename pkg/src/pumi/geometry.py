"""Problem geometry detected from raw sites.

Sites are handled as ``(N, 2)`` float arrays throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateGeometry, EmptyPointSet

# relative to the bounding-box side
GEOM_TOL = 1e-12


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Rect:
    min_x: float
    max_x: float
    min_y: float
    max_y: float

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y


@dataclass(frozen=True)
class BoundingBox:
    """Square of edge ``side`` anchored at ``origin`` (lower-left corner)."""

    origin: Point2
    side: float

    @property
    def tol(self) -> float:
        return GEOM_TOL * self.side

    def contains(self, pts) -> np.ndarray:
        pts = as_points(pts)
        lo = np.array(self.origin) - self.tol
        hi = np.array(self.origin) + self.side + self.tol
        return np.all((pts >= lo) & (pts <= hi), axis=1)


@dataclass(frozen=True)
class ConvexHull:
    """Counterclockwise hull polygon; ``tol`` is the boundary inclusion slack."""

    vertices: np.ndarray
    tol: float = 0.0

    def __len__(self):
        return len(self.vertices)

    def centroid(self) -> Point2:
        # area centroid of the polygon
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        area = cr.sum() / 2.0
        cx = ((v[:, 0] + w[:, 0]) * cr).sum() / (6.0 * area)
        cy = ((v[:, 1] + w[:, 1]) * cr).sum() / (6.0 * area)
        return Point2(float(cx), float(cy))


def as_points(sites) -> np.ndarray:
    pts = np.asarray(sites, dtype=float)
    if pts.ndim == 1 and pts.size == 2:
        pts = pts.reshape(1, 2)
    if pts.size == 0:
        return pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) array of sites, got shape {pts.shape}")
    return pts


def _check_sites(sites) -> np.ndarray:
    pts = as_points(sites)
    if len(pts) == 0:
        raise EmptyPointSet("no sites given")
    if not np.all(np.isfinite(pts)):
        raise ValueError("sites must be finite")
    return pts


def bounding_rect(sites) -> Rect:
    pts = _check_sites(sites)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return Rect(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def bounding_box(rect: Rect) -> BoundingBox:
    """Square with edge ``max(max_x, max_y) - min(min_x, min_y)``.

    The edge formula mixes the x and y extrema, so the only anchor that is
    guaranteed to cover ``rect`` is ``(m, m)`` with ``m = min(min_x, min_y)``.
    """
    m = min(rect.min_x, rect.min_y)
    side = max(rect.max_x, rect.max_y) - m
    if not side > 0:
        raise DegenerateGeometry(f"bounding box edge must be positive, got {side!r}")
    return BoundingBox(Point2(m, m), side)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(sites, tol: float | None = None) -> ConvexHull:
    """Andrew's monotone chain; collinear boundary points are dropped.

    ``tol`` defaults to ``GEOM_TOL`` times the larger extent of the sites.
    """
    pts = _check_sites(sites)
    uniq = np.unique(pts, axis=0)  # lexicographic by (x, y)
    if len(uniq) < 3:
        raise DegenerateGeometry("need at least 3 distinct sites for a 2D hull")
    P = [tuple(p) for p in uniq]

    lower: list = []
    for p in P:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(P):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    verts = lower[:-1] + upper[:-1]
    if len(verts) < 3:
        raise DegenerateGeometry("sites are collinear")

    v = np.array(verts, dtype=float)
    if tol is None:
        tol = GEOM_TOL * max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]))
    return ConvexHull(v, tol)


def hull_signed_distances(pts, hull: ConvexHull) -> np.ndarray:
    """Signed distance of each point to every hull edge line, shape (N, m).

    Positive values are on the inner (left) side of the edge.
    """
    pts = as_points(pts)
    v = hull.vertices
    w = np.roll(v, -1, axis=0)
    e = w - v
    length = np.hypot(e[:, 0], e[:, 1])
    rel_x = pts[:, None, 0] - v[None, :, 0]
    rel_y = pts[:, None, 1] - v[None, :, 1]
    return (e[None, :, 0] * rel_y - e[None, :, 1] * rel_x) / length[None, :]


def points_in_hull(pts, hull: ConvexHull, tol: float | None = None) -> np.ndarray:
    """Vectorized closed-hull membership with boundary slack ``tol``."""
    pts = as_points(pts)
    if len(pts) == 0:
        return np.zeros(0, dtype=bool)
    if tol is None:
        tol = hull.tol
    return np.all(hull_signed_distances(pts, hull) >= -tol, axis=1)


def point_in_hull(p, hull: ConvexHull, tol: float | None = None) -> bool:
    return bool(points_in_hull(np.asarray(p, dtype=float).reshape(1, 2), hull, tol)[0])
