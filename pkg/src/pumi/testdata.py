"""Standard test inputs for scattered-data interpolation."""

import numpy as np
from scipy.stats import qmc


def franke(x, y):
    """Franke's bivariate test function on the unit square."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (0.75 * np.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
            + 0.75 * np.exp(-((9 * x + 1) ** 2) / 49 - (9 * y + 1) / 10)
            + 0.5 * np.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
            - 0.2 * np.exp(-((9 * x - 4) ** 2) - (9 * y - 7) ** 2))


def halton(n: int) -> np.ndarray:
    """First ``n`` points of the unscrambled 2D Halton sequence (bases 2, 3)."""
    return qmc.Halton(d=2, scramble=False).random(n)


def franke_cloud(n: int):
    pts = halton(n)
    return pts, franke(pts[:, 0], pts[:, 1])
