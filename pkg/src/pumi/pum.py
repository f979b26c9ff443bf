"""Partition-of-unity interpolation with Wendland C2 local approximants.

A model is built in four steps: detect the geometry (hull, rectangle,
bounding box), lay a grid of patch centers over the rectangle and keep the
ones in the hull, gather every patch's sites with the block-based search and
solve one small RBF system per patch. Evaluation blends the local
interpolants with Shepard-normalized Wendland weights.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from .errors import OutOfDomain, TooFewPoints, UncoveredPoint, UncoveredSites
from .kdtree import KdTree
from .rbf import Kernel, LocalInterpolant, eval_local_many, fit_local, wendland_c2
from .spatial import BlockGrid, block_count, build_pu_centers

log = logging.getLogger(__name__)

DUP_TOL = 1e-10  # relative to the bounding-box side
COVER_INFLATION = 1.5
# default shape parameter is EPS_RATIO / delta_pu, i.e. kernel support 20 patch radii
EPS_RATIO = 0.05
STRUCTURES = ("block", "kdtree", "brute")


@dataclass
class ScatteredData:
    sites: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.sites = geo.as_points(self.sites)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(self.sites) != len(self.values):
            raise ValueError(f"{len(self.sites)} sites but {len(self.values)} values")
        if not (np.all(np.isfinite(self.sites)) and np.all(np.isfinite(self.values))):
            raise ValueError("sites and values must be finite")

    def __len__(self):
        return len(self.values)


@dataclass
class PumConfig:
    epsilon: Optional[float] = None  # defaults to EPS_RATIO / delta_pu
    delta_pu: Optional[float] = None  # overrides the grid-derived radius
    delta_scale: float = 1.0
    structure: str = "block"
    workers: Optional[int] = None
    repair_cover: bool = True


def default_workers() -> int:
    env = os.environ.get("PUMI_THREADS")
    if env:
        return max(1, int(env))
    return 1


class _BruteIndex:
    def __init__(self, sites):
        self.sites = sites

    def query(self, center, radius):
        diff = self.sites - np.asarray(center, dtype=float)
        d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
        return np.flatnonzero(d2 <= radius * radius)


def _make_index(structure, sites, box, q):
    if structure == "block":
        return BlockGrid(sites, box, q)
    if structure == "kdtree":
        return KdTree(sites)
    if structure == "brute":
        return _BruteIndex(sites)
    raise ValueError(f"unknown structure {structure!r}; expected one of {STRUCTURES}")


@dataclass
class BatchResult:
    """Values for a batch of points; failed entries are NaN and listed."""

    values: np.ndarray
    ok: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return sorted(self.errors)


@dataclass
class PumModel:
    data: ScatteredData
    hull: geo.ConvexHull
    rect: geo.Rect
    box: geo.BoundingBox
    centers: np.ndarray
    d_pu: int
    delta_pu: float
    kernel: Kernel
    locals: list
    q: int
    structure: str = "block"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        # evaluation looks up patches through a block grid over the centers
        self.center_grid = BlockGrid(self.centers, self.box, self.q)
        self.weight_eps = 1.0 / self.delta_pu

    @property
    def d(self) -> int:
        return len(self.centers)

    @property
    def sites(self) -> np.ndarray:
        return self.data.sites

    def _covering(self, p):
        idx = self.center_grid.query(p, self.delta_pu)
        if len(idx) == 0:
            return idx, np.empty(0)
        diff = self.centers[idx] - p
        phi = wendland_c2(np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2), self.weight_eps)
        keep = phi > 0
        return idx[keep], phi[keep]

    def _check_in_hull(self, p):
        if not geo.point_in_hull(p, self.hull):
            raise OutOfDomain(f"point {tuple(p)} lies outside the convex hull of the sites")

    def weights(self, p) -> list:
        """``[(patch, weight), ...]`` for the patches whose support holds ``p``."""
        p = np.asarray(p, dtype=float).reshape(2)
        self._check_in_hull(p)
        idx, phi = self._covering(p)
        if len(idx) == 0:
            raise UncoveredPoint(f"no patch covers {tuple(p)}")
        w = phi / phi.sum()
        return list(zip(idx.tolist(), w.tolist()))

    def _eval_unchecked(self, p) -> float:
        idx, phi = self._covering(p)
        if len(idx) == 0:
            raise UncoveredPoint(f"no patch covers {tuple(p)}")
        w = phi / phi.sum()
        pt = p.reshape(1, 2)
        total = 0.0
        for j, wj in zip(idx, w):
            total += float(eval_local_many(self.locals[j], self.data.sites, pt)[0]) * wj
        return total

    def eval(self, p) -> float:
        p = np.asarray(p, dtype=float).reshape(2)
        self._check_in_hull(p)
        return self._eval_unchecked(p)

    def eval_batch(self, points) -> BatchResult:
        pts = geo.as_points(points)
        values = np.full(len(pts), np.nan)
        ok = np.zeros(len(pts), dtype=bool)
        errors = {}
        inside = geo.points_in_hull(pts, self.hull)
        for i in range(len(pts)):
            if not inside[i]:
                errors[i] = "outside hull"
                continue
            try:
                values[i] = self._eval_unchecked(pts[i])
                ok[i] = True
            except UncoveredPoint:
                errors[i] = "uncovered"
        return BatchResult(values, ok, errors)

    def to_dict(self) -> dict:
        return {
            "format": "pumi-model",
            "version": 1,
            "sites": self.data.sites.tolist(),
            "values": self.data.values.tolist(),
            "hull": self.hull.vertices.tolist(),
            "hull_tol": self.hull.tol,
            "rect": [self.rect.min_x, self.rect.max_x, self.rect.min_y, self.rect.max_y],
            "box": {"origin": list(self.box.origin), "side": self.box.side},
            "centers": self.centers.tolist(),
            "d_pu": self.d_pu,
            "delta_pu": self.delta_pu,
            "epsilon": self.kernel.epsilon,
            "q": self.q,
            "structure": self.structure,
            "patches": [
                {"indices": loc.site_indices.tolist(), "coefficients": loc.lam.tolist()}
                for loc in self.locals
            ],
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PumModel":
        if doc.get("format") != "pumi-model":
            raise ValueError("not a pumi model document")
        kernel = Kernel(float(doc["epsilon"]))
        box = geo.BoundingBox(geo.Point2(*doc["box"]["origin"]), float(doc["box"]["side"]))
        locals_ = [LocalInterpolant(p["indices"], p["coefficients"], kernel) for p in doc["patches"]]
        return cls(
            data=ScatteredData(np.array(doc["sites"], dtype=float).reshape(-1, 2), doc["values"]),
            hull=geo.ConvexHull(np.array(doc["hull"], dtype=float), float(doc["hull_tol"])),
            rect=geo.Rect(*doc["rect"]),
            box=box,
            centers=np.array(doc["centers"], dtype=float).reshape(-1, 2),
            d_pu=int(doc["d_pu"]),
            delta_pu=float(doc["delta_pu"]),
            kernel=kernel,
            locals=locals_,
            q=int(doc["q"]),
            structure=doc.get("structure", "block"),
            info=doc.get("info", {}),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "PumModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _gather_patches(index, centers, sites, delta):
    """Patch member lists plus the sites strictly inside some patch."""
    patches = []
    covered = np.zeros(len(sites), dtype=bool)
    for c in centers:
        idx = np.sort(index.query(c, delta))
        patches.append(idx)
        if len(idx):
            diff = sites[idx] - c
            covered[idx[diff[:, 0] ** 2 + diff[:, 1] ** 2 < delta * delta]] = True
    return patches, covered


def build_pum(data: ScatteredData, config: Optional[PumConfig] = None) -> PumModel:
    config = config or PumConfig()
    if not isinstance(data, ScatteredData):
        data = ScatteredData(*data)
    n = len(data)
    if n < 16:
        raise TooFewPoints(f"need at least 16 sites, got {n}")
    sites = data.sites

    rect = geo.bounding_rect(sites)
    box = geo.bounding_box(rect)
    hull = geo.convex_hull(sites, tol=box.tol)
    pu = build_pu_centers(hull, rect, box, n, config.delta_scale)
    delta = config.delta_pu if config.delta_pu is not None else pu.delta_pu

    retried = False
    while True:
        q = block_count(box, delta)
        index = _make_index(config.structure, sites, box, q)
        patches, covered = _gather_patches(index, pu.centers, sites, delta)
        if covered.all():
            break
        if retried or not config.repair_cover:
            raise UncoveredSites(np.flatnonzero(~covered))
        log.info("%d sites uncovered at delta_pu=%g; inflating by %g",
                 int((~covered).sum()), delta, COVER_INFLATION)
        delta *= COVER_INFLATION
        retried = True

    keep = [j for j, idx in enumerate(patches) if len(idx)]
    centers = pu.centers[keep]
    patches = [patches[j] for j in keep]
    kernel = Kernel(config.epsilon if config.epsilon is not None else EPS_RATIO / delta)
    dup_tol = DUP_TOL * box.side

    def solve(j):
        return fit_local(sites, data.values, patches[j], kernel, dup_tol, patch_id=j)

    workers = config.workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            locals_ = list(pool.map(solve, range(len(patches))))
    else:
        locals_ = [solve(j) for j in range(len(patches))]

    sizes = [len(p) for p in patches]
    info = {
        "n": n,
        "candidate_centers": pu.d_pu ** 2,
        "dropped_empty_patches": len(pu.centers) - len(centers),
        "cover_repaired": retried,
        "min_patch_size": min(sizes),
        "max_patch_size": max(sizes),
    }
    return PumModel(data, hull, rect, box, centers, pu.d_pu, delta, kernel, locals_, q,
                    config.structure, info)


def global_rbf_interpolant(sites, values, epsilon: float):
    """Dense single-system interpolant on all sites, used as a reference."""
    from .rbf import distance_matrix

    pts = geo.as_points(sites)
    A = wendland_c2(distance_matrix(pts, pts), epsilon)
    lam = np.linalg.solve(A, np.asarray(values, dtype=float))

    def evaluate(x):
        return wendland_c2(distance_matrix(geo.as_points(x), pts), epsilon) @ lam

    return evaluate
