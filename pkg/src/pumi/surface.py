"""Separatrix surface reconstruction from bisected sensitivity samples.

The samples are a cloud of boundary values ``mu*(e, alpha)``. The two
independent parameters live on very different scales, so they are mapped
affinely onto the unit square before the partition-of-unity fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pum import PumConfig, PumModel, ScatteredData, build_pum

HOLDOUT_FRACTION = 0.2


@dataclass(frozen=True)
class AxisScaler:
    lo: np.ndarray
    span: np.ndarray

    @classmethod
    def fit(cls, pts):
        pts = np.asarray(pts, dtype=float)
        lo = pts.min(axis=0)
        span = pts.max(axis=0) - lo
        span[span == 0] = 1.0
        return cls(lo, span)

    def forward(self, pts):
        return (np.asarray(pts, dtype=float) - self.lo) / self.span

    def inverse(self, uv):
        return np.asarray(uv, dtype=float) * self.span + self.lo


@dataclass
class SurfaceFit:
    model: PumModel
    scaler: AxisScaler
    holdout_rms: float = float("nan")
    holdout_count: int = 0
    holdout_skipped: list = field(default_factory=list)

    def __call__(self, pts):
        """Interpolated boundary values; NaN outside the sample hull."""
        return self.model.eval_batch(self.scaler.forward(pts)).values


def sample_arrays(samples, axis: str = "mu"):
    """Independent coordinates (N, 2) and dependent values from samples."""
    others = [a for a in ("mu", "e", "alpha") if a != axis]
    xy = np.array([[getattr(s, others[0]), getattr(s, others[1])] for s in samples], dtype=float)
    z = np.array([getattr(s, axis) for s in samples], dtype=float)
    return xy.reshape(-1, 2), z


def fit_surface(xy, z, config: PumConfig | None = None) -> SurfaceFit:
    scaler = AxisScaler.fit(xy)
    model = build_pum(ScatteredData(scaler.forward(xy), z), config)
    return SurfaceFit(model, scaler)


def holdout_rms(xy, z, seed: int = 0, fraction: float = HOLDOUT_FRACTION,
                config: PumConfig | None = None):
    """Leave-``fraction``-out RMS error.

    The fit uses the remaining points and is evaluated at the held-out ones.
    Held-out points outside the training hull cannot be evaluated and are
    returned separately. Returns ``(rms, evaluated_count, skipped_indices)``.
    """
    xy = np.asarray(xy, dtype=float)
    z = np.asarray(z, dtype=float)
    rng = np.random.default_rng(seed)
    n = len(z)
    n_out = max(1, int(round(fraction * n)))
    perm = rng.permutation(n)
    test, train = np.sort(perm[:n_out]), np.sort(perm[n_out:])
    fit = fit_surface(xy[train], z[train], config)
    pred = fit(xy[test])
    ok = np.isfinite(pred)
    skipped = test[~ok].tolist()
    if not ok.any():
        return float("nan"), 0, skipped
    err = pred[ok] - z[test][ok]
    return float(np.sqrt(np.mean(err ** 2))), int(ok.sum()), skipped


def surface_grid(fit: SurfaceFit, resolution: int):
    """Regular ``resolution x resolution`` grid over the sample rectangle.

    Only points inside the sample hull are kept. Returns (xy, values).
    """
    u = np.linspace(0.0, 1.0, resolution)
    uu, vv = np.meshgrid(u, u)
    uv = np.column_stack([uu.ravel(), vv.ravel()])
    res = fit.model.eval_batch(uv)
    xy = fit.scaler.inverse(uv[res.ok])
    return xy, res.values[res.ok]
