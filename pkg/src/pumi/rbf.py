"""Wendland C2 kernel and local RBF interpolation on one patch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DuplicateSites, IllConditionedPatch, InvalidRadius
from .geometry import as_points

SOLVE_TOL = 1e-10
RIDGE = 1e-12


@dataclass(frozen=True)
class Kernel:
    """``phi(r) = (1 - eps r)_+^4 (4 eps r + 1)``; support radius ``1/eps``."""

    epsilon: float
    family: str = "WendlandC2"

    def __post_init__(self):
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise ValueError(f"shape parameter must be positive, got {self.epsilon!r}")

    def __call__(self, r):
        return wendland_c2(r, self.epsilon)


def wendland_c2(r, epsilon: float):
    """Vectorized kernel values; no sign check (callers pass distances)."""
    s = np.asarray(r, dtype=float) * epsilon
    t = np.maximum(1.0 - s, 0.0)
    t2 = t * t
    # rounding pushes the product an ulp above 1 for tiny s; the exact value never is
    return np.minimum(t2 * t2 * (4.0 * s + 1.0), 1.0)


def kernel_eval(k: Kernel, r: float) -> float:
    if r < 0:
        raise InvalidRadius(f"distance must be nonnegative, got {r!r}")
    return float(wendland_c2(r, k.epsilon))


def distance_matrix(a, b) -> np.ndarray:
    a = as_points(a)
    b = as_points(b)
    dx = a[:, None, 0] - b[None, :, 0]
    dy = a[:, None, 1] - b[None, :, 1]
    return np.sqrt(dx * dx + dy * dy)


def assemble_system(patch_sites, values, k: Kernel, dup_tol: float = 0.0):
    """Kernel matrix ``A`` and right-hand side for one patch.

    Sites closer than ``dup_tol`` count as duplicates and are rejected.
    """
    pts = as_points(patch_sites)
    f = np.asarray(values, dtype=float).reshape(-1)
    if len(pts) == 0:
        raise ValueError("empty patch")
    if len(f) != len(pts):
        raise ValueError("values and sites differ in length")
    dist = distance_matrix(pts, pts)
    if len(pts) > 1:
        off = dist[np.triu_indices(len(pts), 1)]
        if off.min() <= dup_tol:
            raise DuplicateSites(f"patch contains sites closer than {dup_tol!r}")
    A = wendland_c2(dist, k.epsilon)
    # mirror so the symmetry holds bit for bit
    A = np.triu(A) + np.triu(A, 1).T
    return A, f


def solve_local(A, f, patch_id=None) -> np.ndarray:
    """Cholesky solve, retried once with a small diagonal ridge."""
    A = np.asarray(A, dtype=float)
    f = np.asarray(f, dtype=float)
    n = len(f)
    for ridge in (0.0, RIDGE * np.trace(A) / max(n, 1)):
        M = A + ridge * np.eye(n) if ridge else A
        try:
            c = linalg.cho_factor(M, lower=True, check_finite=True)
        except linalg.LinAlgError:
            continue
        lam = linalg.cho_solve(c, f)
        if np.all(np.isfinite(lam)) and residual(A, lam, f) <= SOLVE_TOL:
            return lam
    raise IllConditionedPatch(patch_id)


def residual(A, lam, f) -> float:
    """Scaled residual ``|A lam - f|_inf / (1 + |f|_inf)``."""
    f = np.asarray(f, dtype=float)
    return float(np.max(np.abs(A @ lam - f)) / (1.0 + np.max(np.abs(f), initial=0.0)))


@dataclass
class LocalInterpolant:
    site_indices: np.ndarray
    lam: np.ndarray
    kernel: Kernel

    def __post_init__(self):
        self.site_indices = np.asarray(self.site_indices, dtype=np.int64)
        self.lam = np.asarray(self.lam, dtype=float)
        if len(self.lam) != len(self.site_indices) or len(self.lam) == 0:
            raise ValueError("need one coefficient per patch site")


def fit_local(sites, values, indices, k: Kernel, dup_tol: float = 0.0, patch_id=None) -> LocalInterpolant:
    pts = as_points(sites)[indices]
    A, f = assemble_system(pts, np.asarray(values)[indices], k, dup_tol)
    lam = solve_local(A, f, patch_id)
    return LocalInterpolant(indices, lam, k)


def eval_local(interp: LocalInterpolant, sites, p) -> float:
    return float(eval_local_many(interp, sites, np.asarray(p, dtype=float).reshape(1, 2))[0])


def eval_local_many(interp: LocalInterpolant, sites, pts) -> np.ndarray:
    centers = as_points(sites)[interp.site_indices]
    K = wendland_c2(distance_matrix(pts, centers), interp.kernel.epsilon)
    return K @ interp.lam
