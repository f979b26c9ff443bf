"""Herbivore / grass / trees dynamics and separatrix sampling.

State ``(H, G, T)``; parameters as in the Beddington-DeAngelis
predator-with-two-prey model. Time is measured in days.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numba
import numpy as np

from .errors import BisectError, InvalidBracket, MissingParameters, NumericalBlowup

log = logging.getLogger(__name__)

PARAM_NAMES = ("mu", "r1", "r2", "K1", "K2", "c", "g", "e", "f", "a", "b", "alpha", "beta")
SCAN_AXES = ("mu", "e", "alpha")

# Feeding rates a, b are not reported with the park data. These placeholders
# put the reported parameter point just inside the coexistence region.
DEFAULT_A = 0.995
DEFAULT_B = 1.0

DAYS_PER_YEAR = 365.0
DEFAULT_DT = 0.5
DEFAULT_HORIZON = 100 * DAYS_PER_YEAR

EXTINCTION_FRACTION = 1e-3  # of H(0)
SETTLE_TOL = 1e-3
NEAR_E1_TOL = 1e-2  # relative distance of G from K1
TAIL_FRACTION = 0.1
BISECT_TOL = 1e-4
BISECT_MAX_ITER = 60


@dataclass(frozen=True)
class EcologyParams:
    mu: float
    r1: float
    r2: float
    K1: float
    K2: float
    c: float
    g: float
    e: float
    f: float
    a: float
    b: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"parameter {name} must be finite and nonnegative, got {v!r}")
        for name in ("K1", "K2", "c", "g"):
            if getattr(self, name) <= 0:
                raise ValueError(f"parameter {name} must be positive")
        if self.e > 1 or self.f > 1:
            raise ValueError("conversion factors e and f must not exceed 1")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    def with_(self, **kw) -> "EcologyParams":
        return replace(self, **kw)

    @classmethod
    def from_mapping(cls, m: dict) -> "EcologyParams":
        missing = [n for n in PARAM_NAMES if n not in m or m[n] is None]
        if missing:
            raise MissingParameters(missing)
        return cls(**{n: float(m[n]) for n in PARAM_NAMES})

    def to_dict(self) -> dict:
        return asdict(self)


class EcoState(NamedTuple):
    H: float
    G: float
    T: float


# Dolomiti Bellunesi values; alpha = 1/0.05.
DOLOMITI_VALUES = dict(
    mu=0.03, r1=0.01, r2=0.0006, alpha=20.0, beta=8.0, e=0.605, f=0.001,
    K1=3469640.64, K2=15695993.39, c=101862.16, g=1001229580.18,
)
DOLOMITI_STATE = EcoState(268.750, 2313093.76, 1046399.56)


def dolomiti_params(a: float = DEFAULT_A, b: float = DEFAULT_B, **overrides) -> EcologyParams:
    vals = dict(DOLOMITI_VALUES, a=a, b=b)
    vals.update(overrides)
    return EcologyParams(**vals)


def herbivore_free_equilibrium(p: EcologyParams) -> EcoState:
    return EcoState(0.0, p.K1, p.K2)


def rhs(s, p: EcologyParams):
    H, G, T = s
    grass = H * G / (p.c + H + p.alpha * G)
    trees = H * T / (p.g + H + p.beta * T + p.alpha * G)
    dH = -p.mu * H + p.a * p.e * grass + p.b * p.f * trees
    dG = p.r1 * G * (1.0 - G / p.K1) - p.a * grass
    dT = p.r2 * T * (1.0 - T / p.K2) - p.b * trees
    return (dH, dG, dT)


def invasion_threshold(p: EcologyParams) -> float:
    """Mortality at which E1 loses stability to a rare herbivore.

    Per-capita herbivore growth at ``(0, K1, K2)``; used only as an
    independent check on the simulated classification.
    """
    return (p.a * p.e * p.K1 / (p.c + p.alpha * p.K1)
            + p.b * p.f * p.K2 / (p.g + p.beta * p.K2 + p.alpha * p.K1))


@numba.njit(cache=True, nogil=True)
def _rhs_nb(H, G, T, p):
    mu, r1, r2, K1, K2, c, g, e, f, a, b, alpha, beta = (
        p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11], p[12])
    grass = H * G / (c + H + alpha * G)
    trees = H * T / (g + H + beta * T + alpha * G)
    dH = -mu * H + a * e * grass + b * f * trees
    dG = r1 * G * (1.0 - G / K1) - a * grass
    dT = r2 * T * (1.0 - T / K2) - b * trees
    return dH, dG, dT


@numba.njit(cache=True, nogil=True)
def _rk4_nb(p, s0, times, out):
    """Fixed-step RK4 with clamping at zero.

    Returns (number of clamped components, index of the first non-finite
    state or -1).
    """
    H, G, T = s0[0], s0[1], s0[2]
    out[0, 0] = H
    out[0, 1] = G
    out[0, 2] = T
    clamps = 0
    for i in range(len(times) - 1):
        h = times[i + 1] - times[i]
        k1H, k1G, k1T = _rhs_nb(H, G, T, p)
        k2H, k2G, k2T = _rhs_nb(H + 0.5 * h * k1H, G + 0.5 * h * k1G, T + 0.5 * h * k1T, p)
        k3H, k3G, k3T = _rhs_nb(H + 0.5 * h * k2H, G + 0.5 * h * k2G, T + 0.5 * h * k2T, p)
        k4H, k4G, k4T = _rhs_nb(H + h * k3H, G + h * k3G, T + h * k3T, p)
        H = H + h / 6.0 * (k1H + 2.0 * k2H + 2.0 * k3H + k4H)
        G = G + h / 6.0 * (k1G + 2.0 * k2G + 2.0 * k3G + k4G)
        T = T + h / 6.0 * (k1T + 2.0 * k2T + 2.0 * k3T + k4T)
        if not (math.isfinite(H) and math.isfinite(G) and math.isfinite(T)):
            return clamps, i + 1
        if H < 0.0:
            H = 0.0
            clamps += 1
        if G < 0.0:
            G = 0.0
            clamps += 1
        if T < 0.0:
            T = 0.0
            clamps += 1
        out[i + 1, 0] = H
        out[i + 1, 1] = G
        out[i + 1, 2] = T
    return clamps, -1


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # (n, 3) columns H, G, T
    clamps: int = 0

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for t, s in zip(self.t, self.states):
            yield float(t), EcoState(*map(float, s))

    @property
    def final(self) -> EcoState:
        return EcoState(*map(float, self.states[-1]))


def time_grid(t_end: float, dt: float) -> np.ndarray:
    if not (dt > 0 and t_end > 0):
        raise ValueError("dt and t_end must be positive")
    n = max(1, math.ceil(t_end / dt - 1e-9))
    t = np.arange(n + 1, dtype=float) * dt
    t[-1] = t_end
    return t


def integrate(s0, p: EcologyParams, t_end: float, dt: float = DEFAULT_DT) -> Trajectory:
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (3,) or np.any(s0 < 0) or not np.all(np.isfinite(s0)):
        raise ValueError("initial state must be three finite nonnegative numbers")
    times = time_grid(t_end, dt)
    out = np.empty((len(times), 3))
    clamps, bad = _rk4_nb(p.as_array(), s0, times, out)
    if bad >= 0:
        raise NumericalBlowup(float(times[bad]))
    if clamps:
        log.debug("clamped %d negative state components to zero", clamps)
    return Trajectory(times, out, int(clamps))


class Label(str, enum.Enum):
    COEXISTENCE = "Coexistence"
    HERBIVORE_FREE = "HerbivoreFree"
    UNDETERMINED = "Undetermined"
    BOUNDARY = "Boundary"


def classify_trajectory(traj: Trajectory, p: EcologyParams, h0: float) -> Label:
    """Attractor label from the last tenth of a trajectory.

    Herbivores strictly growing over the tail means E1 repels them. The
    herbivore-free label needs the tail to sit next to E1 (grass at
    capacity) with H decaying, or already extinct and not recovering. A
    positive, settled H is coexistence. Anything else, e.g. the middle of a
    boom-and-bust crash, is undetermined.
    """
    n = len(traj)
    tail = traj.states[int((1.0 - TAIL_FRACTION) * (n - 1)):]
    H = tail[:, 0]
    G = tail[:, 1]
    theta = EXTINCTION_FRACTION * h0
    if h0 <= 0:
        return Label.HERBIVORE_FREE
    dH = np.diff(H)
    if len(dH) and np.all(dH > 0):
        return Label.COEXISTENCE
    near_e1 = bool(np.all(np.abs(G / p.K1 - 1.0) <= NEAR_E1_TOL))
    if near_e1 and (np.all(dH < 0) or (H[-1] < theta and np.all(dH <= 0))):
        return Label.HERBIVORE_FREE
    if H.min() >= theta and abs(H[-1] - H[0]) <= SETTLE_TOL * H[0]:
        return Label.COEXISTENCE
    return Label.UNDETERMINED


def classify(p: EcologyParams, s0=DOLOMITI_STATE, horizon: float = DEFAULT_HORIZON,
             dt: float = DEFAULT_DT) -> Label:
    traj = integrate(s0, p, horizon, dt)
    return classify_trajectory(traj, p, float(s0[0]))


@dataclass
class BisectionResult:
    params: EcologyParams
    axis: str
    value: float
    lo: float  # coexistence side
    hi: float  # herbivore-free side
    iterations: int
    width0: float

    @property
    def width(self) -> float:
        return abs(self.hi - self.lo)

    @property
    def rel_width(self) -> float:
        return self.width / self.width0


def _scan_axis(p_in: EcologyParams, p_out: EcologyParams) -> str:
    a, b = p_in.to_dict(), p_out.to_dict()
    diff = [n for n in PARAM_NAMES if a[n] != b[n]]
    if not diff:
        raise InvalidBracket("bracket endpoints are identical")
    if len(diff) > 1 or diff[0] not in SCAN_AXES:
        raise InvalidBracket(f"endpoints must differ in exactly one of {SCAN_AXES}, differ in {diff}")
    return diff[0]


def _classify_decided(p, s0, horizon, dt) -> Label:
    label = classify(p, s0, horizon, dt)
    if label is Label.UNDETERMINED:
        label = classify(p, s0, 2 * horizon, dt)
    return label


def bisect_boundary(p_in: EcologyParams, p_out: EcologyParams, s0=DOLOMITI_STATE,
                    horizon: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT,
                    tol: float = BISECT_TOL, max_iter: int = BISECT_MAX_ITER,
                    check_ends: bool = True) -> BisectionResult:
    """Halve the bracket between a coexistence and a herbivore-free point.

    Stops once the bracket is narrower than ``tol`` times its initial width
    and returns the midpoint.
    """
    axis = _scan_axis(p_in, p_out)
    if check_ends:
        if _classify_decided(p_in, s0, horizon, dt) is not Label.COEXISTENCE:
            raise InvalidBracket(f"inner endpoint {axis}={getattr(p_in, axis)!r} is not coexistence")
        if _classify_decided(p_out, s0, horizon, dt) is not Label.HERBIVORE_FREE:
            raise InvalidBracket(f"outer endpoint {axis}={getattr(p_out, axis)!r} is not herbivore-free")
    lo, hi = getattr(p_in, axis), getattr(p_out, axis)
    width0 = abs(hi - lo)
    it = 0
    while abs(hi - lo) > tol * width0:
        if it >= max_iter:
            raise BisectError(f"no convergence after {max_iter} iterations")
        mid = 0.5 * (lo + hi)
        label = _classify_decided(p_in.with_(**{axis: mid}), s0, horizon, dt)
        if label is Label.COEXISTENCE:
            lo = mid
        elif label is Label.HERBIVORE_FREE:
            hi = mid
        else:
            raise BisectError(f"{axis}={mid!r} stays undetermined at horizon {2 * horizon!r}")
        it += 1
    value = 0.5 * (lo + hi)
    return BisectionResult(p_in.with_(**{axis: value}), axis, value, lo, hi, it, width0)


@dataclass
class SensitivitySample:
    mu: float
    e: float
    alpha: float
    label: Label
    iterations: int = 0
    bracket_width: float = 0.0
    rel_width: float = 0.0


def parameter_grid(e_spec, alpha_spec) -> list:
    """Cartesian (e, alpha) grid from ``(lo, hi, n)`` triples."""
    es = np.linspace(*e_spec[:2], int(e_spec[2]))
    als = np.linspace(*alpha_spec[:2], int(alpha_spec[2]))
    return [(float(e), float(a)) for e in es for a in als]


def _other_axes(axis):
    return tuple(a for a in SCAN_AXES if a != axis)


def build_sensitivity_samples(grid: Sequence, scan_range, base: EcologyParams, s0=DOLOMITI_STATE,
                              horizon: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT,
                              axis: str = "mu", tol: float = BISECT_TOL,
                              workers: Optional[int] = None):
    """Bisect along ``axis`` at every grid point.

    ``grid`` holds pairs for the two remaining scan axes, in the order of
    ``SCAN_AXES`` (``(e, alpha)`` when scanning ``mu``). ``scan_range`` is
    ``(coexistence_end, herbivore_free_end)``. Returns ``(samples, failures)``
    where failures are ``(pair, reason)``.
    """
    if axis not in SCAN_AXES:
        raise ValueError(f"axis must be one of {SCAN_AXES}")
    if not len(grid):
        raise ValueError("empty parameter grid")
    others = _other_axes(axis)
    lo, hi = scan_range

    def run(pair):
        fixed = dict(zip(others, map(float, pair)))
        p_in = base.with_(**fixed, **{axis: lo})
        p_out = base.with_(**fixed, **{axis: hi})
        try:
            res = bisect_boundary(p_in, p_out, s0, horizon, dt, tol)
        except (InvalidBracket, BisectError, NumericalBlowup) as exc:
            return None, (tuple(pair), f"{type(exc).__name__}: {exc}")
        vals = {axis: res.value, **fixed}
        return SensitivitySample(vals["mu"], vals["e"], vals["alpha"], Label.BOUNDARY,
                                 res.iterations, res.width, res.rel_width), None

    if workers is None:
        from .pum import default_workers
        workers = default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, grid))
    else:
        results = [run(pair) for pair in grid]
    samples = [s for s, _ in results if s is not None]
    failures = [f for _, f in results if f is not None]
    return samples, failures


def check_flip(sample: SensitivitySample, base: EcologyParams, scan_range, s0=DOLOMITI_STATE,
               horizon: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT,
               axis: str = "mu", tol: float = BISECT_TOL) -> bool:
    """True when the labels on either side of the boundary point differ as expected."""
    step = tol * abs(scan_range[1] - scan_range[0])
    sign = 1.0 if scan_range[1] > scan_range[0] else -1.0
    value = getattr(sample, axis)
    fixed = {a: getattr(sample, a) for a in _other_axes(axis)}
    inner = base.with_(**fixed, **{axis: value - sign * step})
    outer = base.with_(**fixed, **{axis: value + sign * step})
    return (classify(inner, s0, horizon, dt) is Label.COEXISTENCE
            and classify(outer, s0, horizon, dt) is Label.HERBIVORE_FREE)

