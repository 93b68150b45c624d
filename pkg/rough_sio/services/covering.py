"""
Stratified starlike covers: construction from the strata of S_Omega,
sampling verification, the rectangle condition on a kernel factor and the
explicit arm cover of the unbounded dyadic-arm kernel.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from rough_sio.config.settings import numeric, tolerance
from rough_sio.errors import DomainError, ResolutionError
from rough_sio.models.cover import Rectangle, StratifiedCover, frame_from_axis
from rough_sio.models.factor import KernelFactor
from rough_sio.models.kernel import TWO_PI
from rough_sio.models.starset import StarSet
from rough_sio.services.star_geometry import region_quadrature, sample_uniform
from rough_sio.utils.polar import AngularQuadrature, RadialMoments, star_integral
from rough_sio.utils.trends import fitted_slope

logger = logging.getLogger(__name__)

# relative enlargement of each Theta_m arc on either side before merging
ARC_MARGIN = 0.05
HALF_PI = 0.5 * math.pi


# construction

def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Half-open index ranges of consecutive True entries."""
    padded = np.concatenate([[False], mask, [False]]).astype(int)
    change = np.flatnonzero(np.diff(padded))
    return list(zip(change[::2], change[1::2]))


def _merge_projective(intervals: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Union of enlarged intervals on the circle of directions modulo pi.

    Returns [(start, stop)] with stop - start < pi, or [(0, pi)] when the
    union is the whole circle.
    """
    enlarged = sorted((s - ARC_MARGIN * (e - s), e + ARC_MARGIN * (e - s)) for s, e in intervals)
    merged: List[List[float]] = []
    for s, e in enlarged:
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    while len(merged) > 1 and merged[-1][1] >= merged[0][0] + math.pi:
        first = merged.pop(0)
        merged[-1][1] = max(merged[-1][1], first[1] + math.pi)
    if any(e - s >= math.pi for s, e in merged):
        return [(0.0, math.pi)]
    return [(s, e) for s, e in merged]


def _split(pieces: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    out = []
    for s, e in pieces:
        count = max(1, int(math.ceil((e - s) / HALF_PI - 1e-12)))
        width = (e - s) / count
        out.extend((s + i * width, s + (i + 1) * width) for i in range(count))
    return out


def _cells_overlapping(cell_start: np.ndarray, cell_stop: np.ndarray, start: float, stop: float) -> np.ndarray:
    hit = np.zeros(cell_start.shape, dtype=bool)
    for shift in (-math.pi, 0.0, math.pi, TWO_PI):
        hit |= (cell_start + shift < stop) & (cell_stop + shift > start)
    return hit


def _planar_stratum(star: StarSet, m: int) -> Tuple[List[Rectangle], float]:
    kernel = star.kernel
    mask = (star.stratum_cells == m) & (star.rho_cells > 0)
    if not mask.any():
        return [], 0.0
    edges = kernel.edges
    runs = _runs(mask)
    if len(runs) > numeric("cap_limit"):
        raise ResolutionError(f"stratum {m} splits into {len(runs)} arcs, above the cap limit")
    intervals = []
    for i, j in runs:
        start, stop = float(edges[i]), float(edges[j])
        if stop - start >= math.pi:
            intervals = [(0.0, math.pi)]
            break
        s = start % math.pi
        intervals.append((s, s + stop - start))
    theta_measure = float(kernel.measures[mask].sum())
    cells = np.flatnonzero(mask)
    cell_start = edges[cells] % math.pi
    cell_stop = cell_start + np.diff(edges)[cells]
    rho = star.rho_cells[cells]
    cap = 2.0**m
    merged = _merge_projective(intervals)
    rects: List[Rectangle] = []
    if merged == [(0.0, math.pi)]:
        height = min(cap, float(rho.max()))
        rects.append(Rectangle.axis_aligned([height, height], m=m, k=0))
        return rects, TWO_PI / theta_measure
    pieces = _split(merged)
    for start, stop in pieces:
        inside = _cells_overlapping(cell_start, cell_stop, start, stop)
        if not inside.any():
            continue
        height = min(cap, float(rho[inside].max()))
        if height <= 0:
            continue
        half_angle = 0.5 * (stop - start)
        rects.append(Rectangle.planar(0.5 * (start + stop), height, height * math.sin(half_angle), m=m,
                                      k=len(rects)))
    cap_measure = 2.0 * sum(stop - start for start, stop in pieces)
    return rects, cap_measure / theta_measure


def _spatial_stratum(star: StarSet, m: int) -> Tuple[List[Rectangle], float]:
    kernel = star.kernel
    mask = (star.stratum_cells == m) & (star.rho_cells > 0)
    if not mask.any():
        return [], 0.0
    cap = 2.0**m
    if mask.all():
        height = min(cap, float(star.rho_cells.max()))
        return [Rectangle.axis_aligned([height] * 3, m=m, k=0)], 1.0
    cells = np.flatnonzero(mask)
    if cells.size > numeric("cap_limit"):
        raise ResolutionError(f"stratum {m} needs {cells.size} caps, above the cap limit")
    n_polar, n_azimuth = kernel.grid_shape
    i, j = np.divmod(cells, n_azimuth)
    phi = np.stack([i, i + 0.5, i + 1], axis=-1) * math.pi / n_polar
    lam = np.stack([j, j + 0.5, j + 1], axis=-1) * TWO_PI / n_azimuth
    pp, ll = phi[:, :, None], lam[:, None, :]
    boundary = np.stack([np.sin(pp) * np.cos(ll), np.sin(pp) * np.sin(ll), np.broadcast_to(np.cos(pp), ll.shape[:1] + (3, 3))],
                        axis=-1).reshape(cells.size, 9, 3)
    centers = kernel.centers[cells]
    half_angles = np.arccos(np.clip(np.einsum("kd,kpd->kp", centers, boundary), -1.0, 1.0)).max(axis=1) * 1.05
    rects = []
    for k, (center, beta, rho) in enumerate(zip(centers, half_angles, star.rho_cells[cells])):
        height = min(cap, float(rho))
        if beta >= HALF_PI:
            rects.append(Rectangle.axis_aligned([height] * 3, m=m, k=k))
        else:
            minor = height * math.sin(beta)
            rects.append(Rectangle(frame=frame_from_axis(center), half_extents=np.array([height, minor, minor]),
                                   m=m, k=k))
    cap_measure = float(np.sum(TWO_PI * (1.0 - np.cos(np.minimum(half_angles, math.pi)))))
    return rects, cap_measure / float(kernel.measures[mask].sum())


def build_cover(star: StarSet, m_max: Optional[int] = None) -> StratifiedCover:
    """
    Cover every stratum S_m by origin-centred rectangles R_{m,k}.

    For n = 2 the arcs of Theta_m are merged modulo pi (one centred rectangle
    covers a cone and its antipode), split into caps of width at most pi/2,
    and each cap of half-angle beta and height h = min(2^m, max rho) gives
    the rectangle with half-extents (h, h sin beta) along the cap centre.
    For n = 3 every cell of Theta_m gets its own cap.

    Args:
        star: Star set with computed strata
        m_max: Largest stratum to cover (default: all nonempty strata)

    Returns:
        StratifiedCover with per-stratum constants sum_k |R_{m,k}| / |S_m|
    """
    if star.dimension not in (2, 3):
        raise DomainError("covers are built for n = 2 and n = 3")
    builder = _planar_stratum if star.dimension == 2 else _spatial_stratum
    rectangles: Dict[int, List[Rectangle]] = {}
    constants: Dict[int, float] = {}
    cap_ratio = 0.0
    comparability = 0.0
    total = 0
    for m, mass in sorted(star.strata_measures.items()):
        if m_max is not None and m > m_max:
            logger.info("Skipping stratum %d above m_max=%d", m, m_max)
            continue
        rects, ratio = builder(star, m)
        if not rects or mass <= 0:
            continue
        total += len(rects)
        if total > numeric("cap_limit"):
            raise ResolutionError(f"cover needs more than {numeric('cap_limit')} rectangles")
        rectangles[m] = rects
        constants[m] = sum(r.volume for r in rects) / mass
        cap_ratio = max(cap_ratio, ratio)
        if m >= 1:
            comparability = max(comparability, max(r.longest_half_extent for r in rects) / 2.0**m)
    logger.info("Built cover of %s: %d rectangles over %d strata", star.kernel.label, total, len(rectangles))
    return StratifiedCover(
        rectangles=rectangles,
        dimension=star.dimension,
        stratum_constants=constants,
        comparability=comparability,
        cap_ratio=cap_ratio,
        exhaustive=True,
        label=f"cover({star.kernel.label})",
    )


def arm_rectangle_cover(j_max: int = 20, star: Optional[StarSet] = None) -> StratifiedCover:
    """R_j = [-2^j, 2^j] x [-2^{-2j}, 2^{-2j}], j = 1 .. j_max, indexed by stratum m = j."""
    if j_max < 1:
        raise DomainError("need at least one rectangle")
    rectangles = {j: [Rectangle.axis_aligned([2.0**j, 2.0 ** (-2 * j)], m=j, k=0)] for j in range(1, j_max + 1)}
    constants: Dict[int, float] = {}
    if star is not None:
        for j, rects in rectangles.items():
            mass = star.strata_measures.get(j, 0.0)
            if mass > 0:
                constants[j] = rects[0].volume / mass
    return StratifiedCover(rectangles=rectangles, dimension=2, stratum_constants=constants, comparability=1.0,
                           cap_ratio=0.0, exhaustive=False, label=f"arm-cover-{j_max}")


# verification

@dataclass(frozen=True)
class CoverVerification:
    gamma_min: float
    gamma_max: float
    c_n: float
    miss_rate: float
    per_stratum: Dict[int, Dict[str, float]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.miss_rate <= tolerance("coverage_miss")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma_min": self.gamma_min,
            "gamma_max": self.gamma_max,
            "c_n": self.c_n,
            "coverage_miss_rate": self.miss_rate,
            "strata": {str(m): v for m, v in sorted(self.per_stratum.items())},
        }


def covered(rects: Sequence[Rectangle], points: np.ndarray, guard: float) -> np.ndarray:
    hit = np.zeros(len(points), dtype=bool)
    for rect in rects:
        hit |= rect.contains(points, guard=guard)
    return hit


def verify_cover(cover: StratifiedCover, star: StarSet, samples: int = 10000,
                 rng: Optional[np.random.Generator] = None, guard: Optional[float] = None) -> CoverVerification:
    """Sample every stratum S_m and measure how much of it misses the rectangles R_{m,k}."""
    rng = rng or np.random.default_rng(0)
    guard = tolerance("membership_guard") if guard is None else guard
    per_stratum: Dict[int, Dict[str, float]] = {}
    misses = 0
    drawn = 0
    gammas = []
    constants = []
    for m, mass in sorted(star.strata_measures.items()):
        rects = cover.rectangles.get(m, [])
        if mass <= 0:
            continue
        points = sample_uniform(star, samples, rng, m=m)
        if len(points) == 0:
            continue
        miss = int((~covered(rects, points, guard)).sum()) if rects else len(points)
        volume = sum(r.volume for r in rects)
        per_stratum[m] = {"samples": len(points), "misses": miss, "constant": volume / mass}
        misses += miss
        drawn += len(points)
        constants.append(volume / mass)
        if m >= 1:
            gammas.extend(r.longest_half_extent / 2.0**m for r in rects)
    rate = misses / drawn if drawn else 0.0
    if rate > 0:
        logger.info("Cover %s misses %.4f of the samples", cover.label, rate)
    return CoverVerification(
        gamma_min=min(gammas, default=1.0),
        gamma_max=max(gammas, default=1.0),
        c_n=max(constants, default=0.0),
        miss_rate=rate,
        per_stratum=per_stratum,
    )


# rectangle condition on a kernel factor

@dataclass(frozen=True)
class HRectEstimate:
    """sup over probed (j, t) of |tR_j|^{-1} int_{tR_j} H^sigma, with the growth trend in m."""

    sigma: float
    values: List[Dict[str, float]]
    constant: float
    growth: float
    failed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma": self.sigma,
            "C": self.constant,
            "growth_exponent": self.growth,
            "failed": self.failed,
            "rectangles": self.values,
            "semantics": "lower bound over the probed dilates",
        }


def rectangle_power_average(H: KernelFactor, rect: Rectangle, sigma: float, t: float = 1.0) -> float:
    """|tR|^{-1} int_{tR} H(y)^sigma dy for a translation-invariant factor (n = 2)."""
    if rect.dimension != 2:
        raise DomainError("rectangle averages of kernel factors are implemented for n = 2")
    if H.kind == "constant":
        return H.value**sigma
    scaled = rect.scaled(t)
    if H.kind == "angular":
        kernel = H.angular
        quad = AngularQuadrature.build(kernel.edges, kernel.values, max_width=0.01, order=4,
                                       breaks=scaled.corner_angles())
        extent = scaled.radial_extent(quad.directions)
        return star_integral(quad, extent, angular=quad.abs_omega**sigma) / scaled.volume
    if H.kind == "radial":
        quad, extent = region_quadrature(scaled)
        top = float(extent.max())
        h = H.radial
        moments = RadialMoments(lambda r: np.abs(np.asarray(h(r))) ** sigma, 2, top * 2.0**-40, top,
                                per_block=48, breaks=h.breakpoints)
        return star_integral(quad, extent, radial=moments) / scaled.volume
    raise DomainError("the rectangle condition needs a translation-invariant factor")


def hrect_check(H: KernelFactor, rects: Union[StratifiedCover, Iterable[Rectangle]], sigma: float = 1.0,
                t_exponents: Iterable[int] = range(-4, 5), growth_tol: Optional[float] = None) -> HRectEstimate:
    """Probe the rectangle condition int_{tR_j} H^sigma <= C |tR_j| over dyadic t."""
    if isinstance(rects, StratifiedCover):
        rects = rects.all_rectangles()
    rects = list(rects)
    if not rects:
        raise DomainError("no rectangles to check")
    growth_tol = tolerance("growth_exponent") if growth_tol is None else growth_tol
    t_values = [2.0**e for e in t_exponents]
    homogeneous = H.kind in ("constant", "angular")
    records = []
    by_stratum: Dict[int, float] = {}
    for rect in rects:
        probes = [1.0] if homogeneous else t_values
        best = max(rectangle_power_average(H, rect, sigma, t) for t in probes)
        records.append({"m": rect.m, "k": rect.k, "average": best})
        by_stratum[rect.m] = max(by_stratum.get(rect.m, 0.0), best)
    constant = max(r["average"] for r in records)
    strata = sorted(m for m, v in by_stratum.items() if m >= 1 and v > 0)
    growth = 0.0
    if len(strata) >= 2:
        growth = fitted_slope(strata, np.log2([by_stratum[m] for m in strata]))
    failed = bool(not math.isfinite(constant) or growth > growth_tol)
    return HRectEstimate(sigma=float(sigma), values=records, constant=constant, growth=float(growth), failed=failed)
