"""
Quadrature building blocks: geometric grids, Simpson sums, Gauss-Legendre
boxes and adaptive radial integrals.
"""
import logging
import math
import warnings
from functools import lru_cache
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import integrate

from rough_sio.errors import DomainError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def geometric_grid(lo: float, hi: float, per_block: int, extra: Iterable[float] = ()) -> List[np.ndarray]:
    """Log-uniform nodes from lo to hi with ``per_block`` intervals per factor 2.

    Interior ``extra`` points split the range; each piece gets its own
    log-uniform nodes with an even number of intervals (Simpson-ready).
    Returns the list of per-piece arrays of log r, for :func:`piecewise_simpson`.
    """
    if not (0 < lo < hi):
        raise DomainError(f"geometric grid needs 0 < lo < hi, got {lo}, {hi}")
    cuts = sorted({lo, hi, *[p for p in extra if lo < p < hi]})
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        intervals = max(2, int(math.ceil(math.log2(b / a) * per_block)))
        intervals += intervals % 2
        pieces.append(np.linspace(math.log(a), math.log(b), intervals + 1))
    return pieces


def piecewise_simpson(pieces: Sequence[np.ndarray], values: Sequence[np.ndarray], axis: int = -1) -> np.ndarray:
    """Sum of Simpson integrals over consecutive pieces."""
    total = 0.0
    for u, y in zip(pieces, values):
        total = total + integrate.simpson(y, x=u, axis=axis)
    return total


def radial_quad(func: Callable[[np.ndarray], np.ndarray], a: float, b: float, measure: str = "dr",
                points: Sequence[float] = (), limit: int = 200) -> float:
    """Adaptive integral of a real function over (a, b).

    ``measure`` is "dr" or "dr/r". For a > 0 the integral runs in the log
    variable, which keeps multi-scale integrands well conditioned.
    """
    if b <= a:
        return 0.0
    inner = [p for p in points if a < p < b]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if a > 0:
            if measure == "dr":
                g = lambda u: float(func(np.exp(u))) * math.exp(u)
            else:
                g = lambda u: float(func(np.exp(u)))
            value, _ = integrate.quad(
                g, math.log(a), math.log(b), points=[math.log(p) for p in inner] or None, limit=limit
            )
        else:
            if measure == "dr":
                g = lambda r: float(func(np.asarray(r)))
            else:
                g = lambda r: float(func(np.asarray(r))) / r
            value, _ = integrate.quad(g, a, b, points=inner or None, limit=limit)
    return float(value)


def dyadic_pieces(func: Callable[[np.ndarray], np.ndarray], j_lo: int, j_hi: int, measure: str = "dr",
                  points: Sequence[float] = ()) -> np.ndarray:
    """Integrals over [2^j, 2^{j+1}] for j = j_lo .. j_hi."""
    return np.asarray(
        [radial_quad(func, 2.0**j, 2.0 ** (j + 1), measure=measure, points=points) for j in range(j_lo, j_hi + 1)]
    )


def gl_box(lower: Sequence[float], upper: Sequence[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes (m, d) and weights (m,) on an axis-aligned box."""
    nodes, weights = gauss_legendre(order)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)
    axes = [mid[i] + half[i] * nodes for i in range(lower.size)]
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    w = weights
    for _ in range(lower.size - 1):
        w = np.multiply.outer(w, weights)
    return points, w.ravel() * float(np.prod(half))


def gl_interval(a: float, b: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = gauss_legendre(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * nodes, half * weights


def richardson(coarse: complex, fine: complex, order: float) -> complex:
    """Extrapolate two estimates with step ratio 2."""
    factor = 2.0**order
    return fine + (fine - coarse) / (factor - 1.0)


def ceil_log2_ratio(a: float, b: float) -> int:
    """ceil(log2(b/a)) robust to exact powers of two."""
    value = math.log2(b / a)
    nearest = round(value)
    if abs(value - nearest) < 1e-12:
        return int(nearest)
    return int(math.ceil(value))
