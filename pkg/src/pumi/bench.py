"""Timing harness for the range-search structures on the PUM workload.

For each site count N the workload is the one a PUM build issues: one query
of radius ``delta_pu`` at every patch center.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .kdtree import KdTree
from .spatial import BlockGrid, block_count, brute_force_query, build_pu_centers

STRUCTURES = ("block", "kdtree", "brute")
CSV_HEADER = ("structure", "N", "build_seconds", "total_query_seconds", "queries_per_second")


@dataclass
class Workload:
    sites: np.ndarray
    box: geo.BoundingBox
    centers: np.ndarray
    radius: float
    q: int


def make_workload(n: int, seed: int = 0) -> Workload:
    rng = np.random.default_rng(seed)
    sites = rng.random((n, 2))
    rect = geo.bounding_rect(sites)
    box = geo.bounding_box(rect)
    hull = geo.convex_hull(sites, tol=box.tol)
    pu = build_pu_centers(hull, rect, box, n)
    return Workload(sites, box, pu.centers, pu.delta_pu, block_count(box, pu.delta_pu))


class _Brute:
    def __init__(self, sites):
        self.sites = sites

    def query(self, center, radius):
        return brute_force_query(center, radius, self.sites)


def build_structure(name: str, w: Workload):
    if name == "block":
        return BlockGrid(w.sites, w.box, w.q)
    if name == "kdtree":
        return KdTree(w.sites)
    if name == "brute":
        return _Brute(w.sites)
    raise ValueError(f"unknown structure {name!r}")


def check_equivalence(w: Workload, structures=STRUCTURES, n_check: int = 50, seed: int = 0):
    """Raise AssertionError unless every structure returns the brute-force sets."""
    rng = np.random.default_rng(seed)
    built = {s: build_structure(s, w) for s in structures}
    picks = rng.choice(len(w.centers), size=min(n_check, len(w.centers)), replace=False)
    for i in picks:
        c = w.centers[i]
        ref = sorted(brute_force_query(c, w.radius, w.sites))
        for name, st in built.items():
            got = sorted(np.asarray(st.query(c, w.radius)).tolist())
            if got != ref:
                raise AssertionError(f"{name} disagrees with brute force at center {tuple(c)}")


def time_structure(name: str, w: Workload, max_queries: int | None = None):
    """(build_seconds, total_query_seconds, n_queries) for one structure."""
    t0 = time.perf_counter()
    st = build_structure(name, w)
    t1 = time.perf_counter()
    centers = w.centers if max_queries is None else w.centers[:max_queries]
    r = w.radius
    t2 = time.perf_counter()
    for c in centers:
        st.query(c, r)
    t3 = time.perf_counter()
    return t1 - t0, t3 - t2, len(centers)


def per_query_seconds(name: str, n: int, seed: int = 0, repeats: int = 3) -> float:
    """Best-of-``repeats`` mean query time on the PUM workload for N sites."""
    w = make_workload(n, seed)
    best = float("inf")
    for _ in range(repeats):
        _, tq, nq = time_structure(name, w)
        best = min(best, tq / nq)
    return best


def run_benchmark(n_list, seed: int = 0, structures=STRUCTURES, brute_max_n: int = 20000):
    """Timing rows (dicts keyed by CSV_HEADER) for every N and structure.

    Brute force is skipped above ``brute_max_n`` sites, where one run of the
    full workload takes minutes.
    """
    rows = []
    for n in n_list:
        w = make_workload(int(n), seed)
        active = [s for s in structures if s != "brute" or n <= brute_max_n]
        check_equivalence(w, tuple(dict.fromkeys(active + ["brute"])), seed=seed)
        for name in active:
            tb, tq, nq = time_structure(name, w)
            rows.append({
                "structure": name,
                "N": int(n),
                "build_seconds": tb,
                "total_query_seconds": tq,
                "queries_per_second": nq / tq if tq > 0 else float("inf"),
            })
    return rows
