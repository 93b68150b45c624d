"""
Weight conditions: averages over boxes, the A_p and bumped A_p constants,
the rectangle conditions over a stratified cover and their summability.

Every supremum is taken over a sampled family of boxes, so the reported
constants are lower bounds of the true suprema.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from rough_sio.config.settings import tolerance
from rough_sio.errors import DomainError, NonConvergenceError
from rough_sio.models.cover import Rectangle, RectangleFamily, Region, StratifiedCover
from rough_sio.models.weight import Weight, conjugate_exponent
from rough_sio.utils.quadrature import gl_box
from rough_sio.utils.trends import SummabilityReport, summability

logger = logging.getLogger(__name__)

Box = Union[Rectangle, Region]

COARSE_ORDER = 6
FINE_ORDER = 10
# a cell is integrated directly once its distance to the singularity exceeds this multiple of its diameter
SEPARATION = 1.5
MAX_CELLS = 200_000
MODES = ("ca", "cb", "aunif", "b2")


def _geometry(region: Box) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(region, Rectangle):
        return np.zeros(region.dimension), region.frame, region.half_extents
    return np.asarray(region.center, dtype=float), region.frame, region.half_extents


def _describe(region: Box) -> str:
    center, _, half = _geometry(region)
    return f"box(center={np.round(center, 6).tolist()}, half_extents={np.round(half, 6).tolist()})"


def _adaptive(func, lo: np.ndarray, hi: np.ndarray, order: int, length_scale: Optional[float] = None) -> float:
    """Gauss-Legendre sum over boxes split until each is well separated from the origin.

    Without a singularity (``length_scale`` given) boxes are split until no side
    exceeds the length scale.
    """
    total = 0.0
    stack = [(lo, hi)]
    cells = 0
    while stack:
        a, b = stack.pop()
        cells += 1
        if cells > MAX_CELLS:
            raise NonConvergenceError(f"average needs more than {MAX_CELLS} cells")
        sides = b - a
        if length_scale is None:
            dist = float(np.linalg.norm(np.clip(0.0, a, b)))
            done = dist >= SEPARATION * float(np.linalg.norm(sides))
        else:
            done = float(sides.max()) <= length_scale
        if done:
            points, weights = gl_box(a, b, order)
            total += float(np.dot(weights, func(points)))
            continue
        axis = int(np.argmax(sides))
        mid = 0.5 * (a[axis] + b[axis])
        upper_a, lower_b = a.copy(), b.copy()
        lower_b[axis] = mid
        upper_a[axis] = mid
        stack.append((a, lower_b))
        stack.append((upper_a, b))
    return total


def _corner_boxes(lo: np.ndarray, hi: np.ndarray) -> List[np.ndarray]:
    """Signed far corners of the boxes of [lo, hi] anchored at 0 (which lies in the box)."""
    corners = []
    for choice in np.ndindex(*([2] * lo.size)):
        corner = np.where(np.asarray(choice) == 0, lo, hi)
        if np.all(corner != 0):
            corners.append(corner)
    return corners


def _shell_pieces(corner: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Disjoint boxes covering B minus B/2 for B = [0, corner] (signed)."""
    n = corner.size
    pieces = []
    for i in range(n):
        a = np.zeros(n)
        b = corner.copy()
        a[i] = 0.5 * corner[i]
        b[:i] = 0.5 * corner[:i]
        pieces.append((np.minimum(a, b), np.maximum(a, b)))
    return pieces


def _homogeneous_integral(func, degree: float, lo: np.ndarray, hi: np.ndarray, order: int) -> float:
    """int_{[lo, hi]} func where func is homogeneous of ``degree`` about v = 0."""
    n = lo.size
    if np.all(lo <= 0) and np.all(hi >= 0):
        if n + degree <= 0:
            return math.inf
        closure = 1.0 / (1.0 - 2.0 ** (-(n + degree)))
        total = 0.0
        for corner in _corner_boxes(lo, hi):
            shell = sum(_adaptive(func, a, b, order) for a, b in _shell_pieces(corner))
            total += shell * closure
        return total
    return _adaptive(func, lo, hi, order)


def _log_exp_average(w: Weight, power: float, center: np.ndarray, frame: np.ndarray, half: np.ndarray) -> float:
    """log of the average of exp(b x_1) over the box: exp(b c_1) prod sinh(z_i)/z_i."""
    b = w.params["beta"] * power
    total = b * center[0]
    for z in b * frame[:, 0] * half:
        z = abs(float(z))
        if z < 1e-8:
            continue
        total += math.log(math.sinh(z) / z) if z < 20 else z - math.log(2.0 * z)
    return total


def log_avg(w: Weight, region: Box, power: float = 1.0) -> float:
    """log of |R|^{-1} int_R w^power; +inf when the average diverges."""
    center, frame, half = _geometry(region)
    if np.any(half <= 0):
        raise DomainError("region must be non-degenerate")
    n = half.size
    if w.family == "constant":
        return power * math.log(w.params["value"])
    if w.family == "exp_x1":
        return _log_exp_average(w, power, center, frame, half)
    volume = float(2.0**n * np.prod(half))
    powered = w.power(power)
    # coordinates v with the origin at v = 0: x = v @ frame
    origin = -center @ frame.T
    lo, hi = -half - origin, half - origin
    func = lambda v: powered(v @ frame)

    def integral(order: int) -> float:
        if w.family == "power":
            degree = w.degree * power
            if degree == 0:
                return volume
            return _homogeneous_integral(func, degree, lo, hi, order)
        scale = w.length_scale if w.length_scale else float(np.max(hi - lo)) / 4.0
        return _adaptive(func, lo, hi, order, length_scale=scale)

    fine = integral(FINE_ORDER)
    if not math.isfinite(fine):
        return math.inf
    coarse = integral(COARSE_ORDER)
    change = abs(fine - coarse) / max(abs(fine), 1e-300)
    if change > tolerance("average_refinement"):
        raise NonConvergenceError(f"average of {w.label}^{power:g} over {_describe(region)} changed by {change:.2%}")
    if fine <= 0:
        raise DomainError(f"weight {w.label} is not positive on {_describe(region)}")
    return math.log(fine / volume)


def avg(w: Weight, region: Box, power: float = 1.0) -> float:
    """|R|^{-1} int_R w^power over a box; +inf when divergent."""
    value = log_avg(w, region, power)
    return math.inf if value > 709.0 else math.exp(value)


def _product(w: Weight, region: Box, first: Tuple[float, float], second: Tuple[float, float]) -> float:
    """(avg w^a)^{1/b} (avg w^c)^{1/d} for first = (a, b), second = (c, d), in log space."""
    total = log_avg(w, region, first[0]) / first[1] + log_avg(w, region, second[0]) / second[1]
    return math.inf if total > 709.0 else math.exp(total)


def _exponents(p: float, r: float, mode: str) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    q = conjugate_exponent(p)
    if mode == "ca":
        return (1.0, p), (-r * q / p, r * q)
    if mode == "cb":
        return (r, r * p), (-q / p, q)
    if mode in ("aunif", "ap"):
        return (1.0, p), (-q / p, q)
    if mode == "b2":
        return (1.0, 2.0), (-1.0, 2.0)
    raise DomainError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ConditionEstimate:
    """Supremum of a two-average product over a sampled family of boxes."""

    constant: float
    products: List[float]
    divergent: bool
    family_size: int

    @property
    def finite(self) -> bool:
        return not self.divergent and math.isfinite(self.constant)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.constant,
            "divergent": self.divergent,
            "family_size": self.family_size,
            "min_product": min(self.products, default=math.nan),
            "semantics": "lower bound over the sampled family",
        }


def default_cubes(dimension: int = 2, j_min: int = -4, j_max: int = 4) -> List[Region]:
    """Cubes on a 5^n offset grid up to four half-sides away, side 2^{j+1}."""
    base = Rectangle.axis_aligned(np.ones(dimension))
    return list(RectangleFamily.default(base, grid=5, reach=4.0, j_min=j_min, j_max=j_max).regions())


def _sup_product(w: Weight, regions: Iterable[Box], first, second) -> ConditionEstimate:
    products = []
    for region in regions:
        products.append(_product(w, region, first, second))
    finite = [v for v in products if math.isfinite(v)]
    divergent = len(finite) < len(products)
    if divergent:
        logger.info("Weight %s has divergent averages on %d boxes", w.label, len(products) - len(finite))
    return ConditionEstimate(constant=math.inf if divergent else max(finite, default=0.0), products=products,
                             divergent=divergent, family_size=len(products))


def ap_constant(w: Weight, p: float, cubes: Optional[Iterable[Box]] = None) -> ConditionEstimate:
    """sup over cubes of (avg w)^{1/p} (avg w^{-p'/p})^{1/p'}."""
    if not (1 < p < math.inf):
        raise DomainError(f"A_p needs 1 < p < infinity, got {p}")
    cubes = default_cubes() if cubes is None else cubes
    first, second = _exponents(p, 1.0, "ap")
    return _sup_product(w, cubes, first, second)


def apr_constant(w: Weight, p: float, r: float, cubes: Optional[Iterable[Box]] = None) -> ConditionEstimate:
    """sup over cubes of (avg w)^{1/p} (avg w^{-rp'/p})^{1/rp'}; r = 1 gives the A_p constant."""
    if r < 1:
        raise DomainError(f"bump exponent r must be at least 1, got {r}")
    if not (1 < p < math.inf):
        raise DomainError(f"A_p needs 1 < p < infinity, got {p}")
    cubes = default_cubes() if cubes is None else cubes
    first, second = _exponents(p, r, "ca")
    return _sup_product(w, cubes, first, second)


@dataclass
class RectConditionResult:
    mode: str
    p: float
    r: float
    constants: Dict[Tuple[int, int], float] = field(default_factory=dict)
    products: Dict[Tuple[int, int], float] = field(default_factory=dict)
    uniform_constant: Optional[float] = None
    summability: Optional[SummabilityReport] = None

    @property
    def failed_entries(self) -> List[Tuple[int, int]]:
        return [key for key, value in sorted(self.constants.items()) if not math.isfinite(value)]

    @property
    def certified(self) -> bool:
        return not self.failed_entries and self.summability is not None and self.summability.certified

    def rows(self) -> List[Dict[str, Any]]:
        return [{"m": m, "k": k, "K": self.constants[(m, k)], "product": self.products[(m, k)]}
                for m, k in sorted(self.constants)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "p": self.p,
            "r": self.r,
            "K": self.rows(),
            "uniform_constant": self.uniform_constant,
            "failed": [list(key) for key in self.failed_entries],
            "summability": self.summability.to_dict() if self.summability else None,
            "verdict": "certified-at-probe-scale" if self.certified else "not-certified",
            "semantics": "suprema over sampled translates and dilates are lower bounds",
        }


def rect_condition(w: Weight, p: float, r: float, cover: StratifiedCover, mode: str = "ca",
                   grid: int = 5, reach: float = 4.0, j_min: int = -8, j_max: int = 8) -> RectConditionResult:
    """
    K_{m,k} = |R_{m,k}| * sup over sampled B(R_{m,k}) of the mode's two-average product.

    Modes: "ca" (1 < p <= 2), "cb" (2 <= p < infinity), "aunif" (one K for all
    rectangles, K_{m,k} = K |R_{m,k}|), "b2" (p = 2, r = 1 forced).

    Args:
        w: Weight
        p: Lebesgue exponent
        r: Bump exponent
        cover: Stratified cover whose rectangles generate the families
        mode: Condition to check

    Returns:
        RectConditionResult with the K table and the summability report
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}, expected one of {MODES}")
    if mode == "b2":
        p, r = 2.0, 1.0
    if mode == "ca" and not (1 < p <= 2):
        raise DomainError(f"mode ca needs 1 < p <= 2, got {p}")
    if mode == "cb" and not (2 <= p < math.inf):
        raise DomainError(f"mode cb needs 2 <= p < infinity, got {p}")
    if mode in ("ca", "cb") and r <= 1:
        raise DomainError(f"modes ca and cb need r > 1, got {r}")
    first, second = _exponents(p, r, mode)
    result = RectConditionResult(mode=mode, p=float(p), r=float(r))
    # isotropic dilates about the origin leave averages of homogeneous weights unchanged
    scales = (0, 0) if w.is_homogeneous else (j_min, j_max)
    for rect in cover.all_rectangles():
        family = RectangleFamily.default(rect, grid=grid, reach=reach, j_min=scales[0], j_max=scales[1])
        estimate = _sup_product(w, family.regions(), first, second)
        result.products[(rect.m, rect.k)] = estimate.constant
        result.constants[(rect.m, rect.k)] = estimate.constant * rect.volume
    if mode == "aunif" and result.products:
        uniform = max(result.products.values())
        result.uniform_constant = uniform
        for rect in cover.all_rectangles():
            result.constants[(rect.m, rect.k)] = uniform * rect.volume
    terms: Dict[int, float] = {}
    for (m, _), value in result.constants.items():
        terms[m] = terms.get(m, 0.0) + (m + 1) * value
    result.summability = summability(terms, block_ratio=tolerance("cauchy_block"), decay_fit=tolerance("decay_fit"),
                                     exhaustive=cover.exhaustive)
    logger.info("Rectangle condition %s for %s on %s: %s", mode, w.label, cover.label,
                "certified" if result.certified else "not certified")
    return result


def sigma_threshold(p: float, r: float) -> float:
    """r' p', the lower limit for sigma in the weighted bound for M_H."""
    if r <= 1:
        return math.inf
    return conjugate_exponent(r) * conjugate_exponent(p)


def two_weight_threshold(p: float, r: float, dimension: int, mu: float) -> float:
    """max(r' p', n / (n - mu)) for the fractional two-weight bounds."""
    if not (0 <= mu < dimension):
        raise DomainError(f"fractional order must lie in [0, n), got {mu}")
    return max(sigma_threshold(p, r), dimension / (dimension - mu))
