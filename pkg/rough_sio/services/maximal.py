"""
Maximal operators on grid functions: Hardy-Littlewood, M_H, the starlike
M_{S,H}, their fractional versions, the domination inequality behind the
weighted bound for M_H, and empirical weighted norm probes.

Suprema over r > 0 and t > 0 run over the probe sets of a MaximalConfig,
so every output is a lower bound of the continuous maximal function.
Functions are extended by zero outside their box and integrals over
balls, dilates tS and rectangles classify lattice offsets by their centre.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import signal

from rough_sio.config.settings import tolerance
from rough_sio.errors import DomainError
from rough_sio.models.cover import Rectangle, StratifiedCover
from rough_sio.models.factor import KernelFactor
from rough_sio.models.grid import GridFunction, MaximalConfig
from rough_sio.models.starset import StarSet
from rough_sio.models.weight import Weight
from rough_sio.utils.quadrature import gl_interval, radial_quad
from rough_sio.utils.trends import two_sided_growth

logger = logging.getLogger(__name__)

Mask = Callable[[np.ndarray, float], np.ndarray]
GridOperator = Callable[[GridFunction], GridFunction]

UNIT = KernelFactor.constant(1.0)


def ball_volume(dimension: int) -> float:
    return math.pi ** (dimension / 2) / math.gamma(dimension / 2 + 1)


def _offsets(f: GridFunction, reach: float) -> np.ndarray:
    """Lattice offsets k * spacing with |k_i| <= min(ceil(reach / h_i), N_i - 1)."""
    h = f.spacing
    half = [min(int(math.ceil(reach / h[i])), f.resolution[i] - 1) for i in range(f.dimension)]
    axes = [np.arange(-half[i], half[i] + 1) * h[i] for i in range(f.dimension)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def ball_mask(offsets: np.ndarray, radius: float) -> np.ndarray:
    return np.linalg.norm(offsets, axis=-1) <= radius


def star_mask(star: StarSet) -> Mask:
    def mask(offsets: np.ndarray, t: float) -> np.ndarray:
        flat = offsets.reshape(-1, offsets.shape[-1])
        return star.contains(flat, t=t).reshape(offsets.shape[:-1])

    return mask


def rectangle_mask(rect: Rectangle, guard: float = 0.0) -> Mask:
    def mask(offsets: np.ndarray, t: float) -> np.ndarray:
        return rect.contains(offsets / t, guard=guard)

    return mask


def _masked_sum(f: GridFunction, magnitude: np.ndarray, H: KernelFactor, offsets: np.ndarray,
                inside: np.ndarray) -> np.ndarray:
    """sum_o H(x, o) |f(x - o)| h^n over the offsets flagged ``inside``."""
    volume = f.cell_volume
    if H.translation_invariant:
        weights = np.where(inside, H.of_offset(offsets), 0.0) * volume
        return np.maximum(signal.fftconvolve(magnitude, weights, mode="same"), 0.0)
    points = f.points()
    out = np.zeros(magnitude.shape)
    steps = np.rint(offsets / f.spacing).astype(int)
    for offset, step in zip(offsets[inside], steps[inside]):
        shifted = _shift(magnitude, step)
        if not shifted.any():
            continue
        factor = H(points, np.broadcast_to(offset, points.shape))
        out += factor * shifted * volume
    return out


def _shift(values: np.ndarray, step: np.ndarray) -> np.ndarray:
    """g[i] = values[i - step] with zero fill."""
    out = np.zeros_like(values)
    src = []
    dst = []
    for size, s in zip(values.shape, step):
        if abs(s) >= size:
            return out
        src.append(slice(max(0, -s), size - max(0, s)))
        dst.append(slice(max(0, s), size - max(0, -s)))
    out[tuple(dst)] = values[tuple(src)]
    return out


def _sup_over_scales(f: GridFunction, H: KernelFactor, scales: Sequence[float], mask: Mask, extent: float,
                     mu: float, label: str) -> GridFunction:
    n = f.dimension
    if not (0 <= mu < n):
        raise DomainError(f"fractional order must lie in [0, n), got {mu}")
    magnitude = np.abs(np.asarray(f.values))
    best = np.zeros(magnitude.shape)
    for scale in scales:
        offsets = _offsets(f, scale * extent)
        inside = mask(offsets, scale)
        total = _masked_sum(f, magnitude, H, offsets, inside)
        best = np.maximum(best, total * scale ** (-(n - mu)))
    return f.with_values(best, label=label)


def m_fractional(f: GridFunction, H: KernelFactor, mu: float, cfg: MaximalConfig,
                 starlike: Optional[StarSet] = None) -> GridFunction:
    """sup_r r^{mu-n} int_{|y|<=r} H|f(x-y)| dy, or sup_t t^{mu-n} int_{tS} ... when ``starlike`` is given."""
    if starlike is None:
        return _sup_over_scales(f, H, cfg.radii, ball_mask, 1.0, mu, f"M_{mu:g},{H.label}({f.label})")
    if starlike.dimension != f.dimension:
        raise DomainError("star set and grid function live in different dimensions")
    return _sup_over_scales(f, H, cfg.dilations, star_mask(starlike), starlike.rho_max, mu,
                            f"M_{mu:g},S,{H.label}({f.label})")


def m_h(f: GridFunction, H: KernelFactor, cfg: MaximalConfig) -> GridFunction:
    """sup_r r^{-n} int_{|y|<=r} H(x, y) |f(x - y)| dy over the probe radii."""
    return m_fractional(f, H, 0.0, cfg)


def hl_max(f: GridFunction, cfg: MaximalConfig) -> GridFunction:
    """Hardy-Littlewood maximal function with the r^{-n} normalisation."""
    return m_h(f, UNIT, cfg)


def m_sh(f: GridFunction, star: StarSet, H: KernelFactor, cfg: MaximalConfig) -> GridFunction:
    """sup_t t^{-n} int_{tS} H(x, y) |f(x - y)| dy over the probe dilations."""
    return m_fractional(f, H, 0.0, cfg, starlike=star)


def m_rect_h(f: GridFunction, rect: Rectangle, H: KernelFactor, cfg: MaximalConfig, guard: float = 0.0) -> GridFunction:
    """sup_t t^{-n} int_{tR} H(x, y) |f(x - y)| dy for one origin-centred rectangle."""
    reach = float(np.linalg.norm(rect.half_extents))
    return _sup_over_scales(f, H, cfg.dilations, rectangle_mask(rect, guard), reach, 0.0,
                            f"M_R,{H.label}({f.label})")


def cover_domination(f: GridFunction, star: StarSet, cover: StratifiedCover, H: KernelFactor,
                     cfg: MaximalConfig) -> Dict[str, Any]:
    """Pointwise M_{S,H} f <= sum_j M_{R_j,H} f over the rectangles of a cover."""
    lhs = np.asarray(m_sh(f, star, H, cfg).values)
    rhs = np.zeros(lhs.shape)
    guard = tolerance("membership_guard")
    for rect in cover.all_rectangles():
        rhs += np.asarray(m_rect_h(f, rect, H, cfg, guard=guard).values)
    slack = 1e-9 * max(float(rhs.max()), 1e-300)
    violations = int(np.sum(lhs > rhs + slack))
    return {"lhs_max": float(lhs.max()), "rhs_max": float(rhs.max()), "violations": violations,
            "holds": violations == 0}


# class constants of H

@dataclass(frozen=True)
class HCubeEstimate:
    sigma: float
    radii: List[float]
    values: List[float]
    constant: float
    growth: Dict[str, float]
    rejected: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma": self.sigma,
            "C_H": self.constant,
            "radii": self.radii,
            "values": self.values,
            "growth": self.growth,
            "rejected": self.rejected,
        }


def _polar_power_average(H: KernelFactor, sigma: float, x: np.ndarray, radius: float, directions: int = 256,
                         order: int = 8) -> float:
    """r^{-2} int_{|y|<r} H(x, y)^sigma dy for n = 2 by polar Gauss-Legendre on dyadic shells."""
    angles = (np.arange(directions) + 0.5) * 2.0 * math.pi / directions
    theta = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    total = 0.0
    for k in range(40):
        lo, hi = radius * 2.0 ** (-k - 1), radius * 2.0 ** (-k)
        nodes, weights = gl_interval(lo, hi, order)
        y = nodes[:, None, None] * theta[None, :, :]
        values = H(np.broadcast_to(x, y.shape), y) ** sigma
        piece = float(np.sum(values.mean(axis=1) * weights * nodes)) * 2.0 * math.pi
        total += piece
        if piece < 1e-14 * max(total, 1e-300):
            break
    return total / radius**2


def hcube_check(H: KernelFactor, sigma: float, radii: Optional[Iterable[float]] = None,
                centers: Optional[Iterable[Sequence[float]]] = None, dimension: int = 2,
                growth_tol: Optional[float] = None) -> HCubeEstimate:
    """
    C_H = sup over probes of r^{-n} int_{|y|<r} H(x, y)^sigma dy.

    Constant, radial and angular factors use closed forms in polar
    coordinates; factors depending on x are integrated at every probe centre.
    A growth trend toward either end of the radius range rejects the factor.
    """
    if sigma <= 1:
        raise DomainError(f"the cube condition needs sigma > 1, got {sigma}")
    radii = [2.0**j for j in range(-12, 13)] if radii is None else sorted(float(r) for r in radii)
    growth_tol = tolerance("growth_exponent") if growth_tol is None else growth_tol
    n = dimension
    sphere = n * ball_volume(n)
    values = []
    for r in radii:
        if H.kind == "constant":
            values.append(H.value**sigma * ball_volume(n))
        elif H.kind == "angular":
            kernel = H.angular
            values.append(float(np.sum(kernel.abs_values**sigma * kernel.measures)) / kernel.dimension)
        elif H.kind == "radial":
            h = H.radial
            func = lambda s: np.abs(np.asarray(h(s))) ** sigma * s ** (n - 1)
            pieces = sum(radial_quad(func, r * 2.0 ** (-k - 1), r * 2.0 ** (-k), "dr", h.breakpoints)
                         for k in range(60))
            values.append(sphere * pieces / r**n)
        else:
            if n != 2:
                raise DomainError("x-dependent factors are probed for n = 2")
            probe_centers = [np.zeros(2)] if centers is None else [np.asarray(c, dtype=float) for c in centers]
            values.append(max(_polar_power_average(H, sigma, c, r) for c in probe_centers))
    growth = two_sided_growth(np.log(radii), values) if len(radii) >= 3 else {"low": 0.0, "high": 0.0}
    rejected = bool(max(growth.values()) > growth_tol or not all(math.isfinite(v) for v in values))
    constant = math.inf if rejected else max(values)
    if rejected:
        logger.info("Factor %s rejected by the cube condition (growth %s)", H.label, growth)
    return HCubeEstimate(sigma=float(sigma), radii=list(radii), values=values, constant=constant, growth=growth,
                         rejected=rejected)


# domination inequality

@dataclass(frozen=True)
class DominationResult:
    lhs: GridFunction
    rhs: GridFunction
    c_h: float
    sigma: float
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> Dict[str, Any]:
        return {"C_H": self.c_h, "sigma": self.sigma, "violations": self.violations, "holds": self.holds,
                "lhs_max": float(np.max(self.lhs.values)), "rhs_max": float(np.max(self.rhs.values))}


def discrete_hcube_constant(f: GridFunction, H: KernelFactor, sigma: float, cfg: MaximalConfig) -> float:
    """sup_r r^{-n} sum_{|o|<=r} H(x, o)^sigma h^n on the lattice of ``f`` (sup over nodes for x-dependent H)."""
    n = f.dimension
    best = 0.0
    for radius in cfg.radii:
        offsets = _offsets(f, radius)
        inside = ball_mask(offsets, radius)
        if H.translation_invariant:
            total = float(np.sum(H.of_offset(offsets[inside]) ** sigma)) * f.cell_volume
        else:
            points = f.points()
            total = float(np.max(sum(H(points, np.broadcast_to(o, points.shape)) ** sigma
                                     for o in offsets[inside]))) * f.cell_volume
        best = max(best, total * radius ** (-n))
    return best


def domination_bound(f: GridFunction, H: KernelFactor, sigma: float, cfg: MaximalConfig) -> DominationResult:
    """M_H f <= C_H^{1/sigma} (M |f|^{sigma'})^{1/sigma'} with the lattice constant C_H."""
    if sigma <= 1:
        raise DomainError(f"domination needs sigma > 1, got {sigma}")
    dual = sigma / (sigma - 1.0)
    lhs = m_h(f, H, cfg)
    c_h = discrete_hcube_constant(f, H, sigma, cfg)
    powered = f.with_values(np.abs(np.asarray(f.values)) ** dual)
    rhs_values = c_h ** (1.0 / sigma) * np.asarray(hl_max(powered, cfg).values) ** (1.0 / dual)
    rhs = f.with_values(rhs_values, label="domination bound")
    slack = 1e-9 * max(float(rhs_values.max()), 1e-300)
    violations = int(np.sum(np.asarray(lhs.values) > rhs_values + slack))
    if violations:
        logger.warning("Domination fails at %d nodes for %s", violations, H.label)
    return DominationResult(lhs=lhs, rhs=rhs, c_h=c_h, sigma=float(sigma), violations=violations)


# empirical norms

def grid_weights(f: GridFunction, w: Optional[Weight]) -> Optional[np.ndarray]:
    if w is None:
        return None
    values = np.asarray(w(f.points()), dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise DomainError(f"weight {w.label} is not finite and positive at every grid node")
    return values


@dataclass
class NormProbe:
    ratios: List[float] = field(default_factory=list)
    skipped: int = 0
    bound: Optional[float] = None

    @property
    def sup_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"sup_ratio": self.sup_ratio, "ratios": self.ratios, "skipped": self.skipped,
                "theoretical_bound_shape": self.bound, "semantics": "empirical lower bound of the operator norm"}


def empirical_norm(op: GridOperator, p: float, w: Optional[Weight], test_set: Sequence[GridFunction],
                   bound: Optional[float] = None) -> NormProbe:
    """max over the test set of ||op f||_{p,w} / ||f||_{p,w} on the grid."""
    if not test_set:
        raise DomainError("empirical norm needs at least one test function")
    probe = NormProbe(bound=bound)
    for f in test_set:
        weights = grid_weights(f, w)
        denominator = f.weighted_norm(p, weights)
        if denominator == 0:
            logger.warning("Skipping zero-norm test function %s", f.label)
            probe.skipped += 1
            continue
        image = op(f)
        probe.ratios.append(image.weighted_norm(p, grid_weights(image, w)) / denominator)
    return probe


def _family_norm(family: Sequence[GridFunction], p: float, q: float, weights: Optional[np.ndarray]) -> float:
    stacked = np.stack([np.abs(np.asarray(g.values)) for g in family])
    combined = family[0].with_values(np.sum(stacked**q, axis=0) ** (1.0 / q))
    return combined.weighted_norm(p, weights)


def vector_valued_ratio(op: GridOperator, family: Sequence[GridFunction], p: float, q: float,
                        w: Optional[Weight] = None) -> float:
    """||(sum |op f_j|^q)^{1/q}||_{p,w} / ||(sum |f_j|^q)^{1/q}||_{p,w}."""
    if not family:
        raise DomainError("vector-valued ratio needs a nonempty family")
    weights = grid_weights(family[0], w)
    denominator = _family_norm(family, p, q, weights)
    if denominator == 0:
        raise DomainError("family has zero norm")
    return _family_norm([op(f) for f in family], p, q, weights) / denominator
