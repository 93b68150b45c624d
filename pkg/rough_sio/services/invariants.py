"""
Scalar invariants of Omega and h: L log L norm, cancellation, the H(sigma)
class constant in its three equivalent forms, and the Dini integral.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from rough_sio.config.settings import numeric, tolerance
from rough_sio.errors import ConfigurationError, DomainError, NonConvergenceError
from rough_sio.models.kernel import AngularKernel, RadialFactor
from rough_sio.utils.quadrature import ceil_log2_ratio, dyadic_pieces, radial_quad
from rough_sio.utils.trends import two_sided_growth

logger = logging.getLogger(__name__)

RadialLike = Union[RadialFactor, Callable[[np.ndarray], np.ndarray]]

# probes per octave for the class constant
SUBDIVISIONS = 4
DINI_LEVELS = 60
DINI_TAIL_LEVELS = 10


def _refined(kernel: AngularKernel, quantity: Callable[[AngularKernel], complex], name: str,
             tol: Optional[float] = None) -> complex:
    """Evaluate ``quantity`` on the kernel cells and, for callables, on a doubled resolution."""
    coarse = quantity(kernel)
    if kernel.source is None or kernel.resolution is None:
        return coarse
    fine = quantity(kernel.resampled(2 * kernel.resolution))
    tol = tolerance("llogl_refinement") if tol is None else tol
    scale = max(abs(fine), 1e-300)
    change = abs(fine - coarse) / scale
    logger.debug("%s of %s: %.10g -> %.10g (relative change %.2e)", name, kernel.label, coarse, fine, change)
    if abs(fine) > 1e-12 and change > tol:
        raise NonConvergenceError(
            f"{name} of {kernel.label} changed by {change:.2%} between resolutions "
            f"{kernel.resolution} and {2 * kernel.resolution}"
        )
    return fine


def llogl_norm(kernel: AngularKernel, tol: Optional[float] = None) -> float:
    """||Omega||_{L log L} = int |Omega| (1 + log^+ |Omega|) over the sphere."""
    return float(_refined(kernel, lambda k: k.llogl_sum(), "L log L norm", tol).real)


def cancellation(kernel: AngularKernel, tol: Optional[float] = None) -> complex:
    """int Omega over the sphere; compare against a tolerance to decide cancellation."""
    return complex(_refined(kernel, lambda k: k.integral(), "cancellation integral", tol))


def cancels(kernel: AngularKernel, tol: Optional[float] = None) -> bool:
    """|int Omega| <= tol * max(1, ||Omega||_1), on the refined integral."""
    tol = tolerance("cancellation") if tol is None else tol
    return abs(cancellation(kernel)) <= tol * max(1.0, kernel.norm_l1())


@dataclass(frozen=True)
class HClassEstimate:
    """Probe-scale estimate of the H(sigma) constant; never a proof of membership."""

    sigma: float
    radii: List[float]
    a_values: List[float]
    b_values: List[float]
    c_values: List[float]
    a_constant: float
    b_constant: float
    c_constant: float
    growth: Dict[str, float]
    rejected: bool
    label: str = "h"

    @property
    def constant(self) -> float:
        return self.a_constant

    @property
    def consistent(self) -> bool:
        """c <= a <= 2c and b <= a <= 2b, up to quadrature slack."""
        if self.rejected:
            return True
        slack = 1.0 + 1e-6
        a, b, c = self.a_constant, self.b_constant, self.c_constant
        return c <= a * slack and a <= 2 * c * slack and b <= a * slack and a <= 2 * b * slack

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "sigma": self.sigma,
            "C_h": self.a_constant,
            "C_b": self.b_constant,
            "C_c": self.c_constant,
            "growth": dict(self.growth),
            "rejected": self.rejected,
            "consistent": self.consistent,
            "probe_range": [self.radii[0], self.radii[-1]],
            "semantics": "estimate over a finite probe range",
        }


def _magnitude_power(h: RadialLike, sigma: float) -> Callable[[np.ndarray], np.ndarray]:
    def func(r):
        try:
            values = np.asarray(h(np.asarray(r, dtype=float)))
        except Exception as e:  # noqa: BLE001 - user callables may raise anything
            raise DomainError(f"h is not evaluable at r = {r}: {e}") from e
        return np.abs(values) ** sigma

    return func


def hclass_constant(h: RadialLike, sigma: float = 1.0, j_min: Optional[int] = None, j_max: Optional[int] = None,
                    growth_tol: Optional[float] = None) -> HClassEstimate:
    """
    Estimate C_h on the probe radii R = 2^{j + q/4}, j_min <= j < j_max.

    Args:
        h: Radial factor or callable r -> h(r)
        sigma: Class exponent (>= 1)
        j_min, j_max: Dyadic probe range
        growth_tol: Envelope growth exponent above which h is rejected

    Returns:
        HClassEstimate with the (a), (b) and (c) forms of the constant
    """
    if sigma < 1:
        raise DomainError(f"class exponent must be >= 1, got {sigma}")
    j_min = numeric("hclass_j_min") if j_min is None else j_min
    j_max = numeric("hclass_j_max") if j_max is None else j_max
    if j_min >= j_max:
        raise DomainError("probe range needs j_min < j_max")
    growth_tol = tolerance("growth_exponent") if growth_tol is None else growth_tol
    func = _magnitude_power(h, sigma)
    points = list(getattr(h, "breakpoints", []))
    edges = 2.0 ** (j_min + np.arange((j_max - j_min + 1) * SUBDIVISIONS + 1) / SUBDIVISIONS)
    pieces_dr = np.asarray([radial_quad(func, a, b, "dr", points) for a, b in zip(edges[:-1], edges[1:])])
    pieces_log = np.asarray([radial_quad(func, a, b, "dr/r", points) for a, b in zip(edges[:-1], edges[1:])])
    count = (j_max - j_min) * SUBDIVISIONS
    radii = edges[:count]
    a_values = np.asarray([pieces_dr[i:i + SUBDIVISIONS].sum() for i in range(count)]) / radii
    c_values = np.asarray([pieces_log[i:i + SUBDIVISIONS].sum() for i in range(count)])
    growth = two_sided_growth(np.log(radii), a_values)
    rejected = bool(not np.all(np.isfinite(a_values)) or growth["low"] > growth_tol or growth["high"] > growth_tol)
    if rejected:
        b_values = np.full(count, math.inf)
    else:
        base = radial_quad(func, 0.0, float(edges[0]), "dr", points)
        cumulative = base + np.concatenate([[0.0], np.cumsum(pieces_dr)])[:count]
        b_values = cumulative / radii
    label = getattr(h, "label", "h")
    estimate = HClassEstimate(
        sigma=float(sigma),
        radii=[float(r) for r in radii],
        a_values=[float(v) for v in a_values],
        b_values=[float(v) for v in b_values],
        c_values=[float(v) for v in c_values],
        a_constant=float(np.max(a_values)) if not rejected else math.inf,
        b_constant=float(np.max(b_values)),
        c_constant=float(np.max(c_values)) if not rejected else math.inf,
        growth={k: float(v) for k, v in growth.items()},
        rejected=rejected,
        label=label,
    )
    if rejected:
        logger.info("h = %s rejected from H(%g): growth exponents %s", label, sigma, growth)
    return estimate


def hclass_inclusion(h: RadialLike, sigma_high: float, sigma_low: float, **probe: Any) -> Dict[str, Any]:
    """Holder inclusion H(sigma_high) in H(sigma_low): C_low <= C_high^{sigma_low / sigma_high}."""
    if sigma_high <= sigma_low:
        raise DomainError("inclusion compares sigma_high > sigma_low")
    high = hclass_constant(h, sigma_high, **probe)
    low = hclass_constant(h, sigma_low, **probe)
    bound = high.a_constant ** (sigma_low / sigma_high) if not high.rejected else math.inf
    return {
        "accepted_high": not high.rejected,
        "accepted_low": not low.rejected,
        "C_high": high.a_constant,
        "C_low": low.a_constant,
        "bound": bound,
        "holds": high.rejected or (not low.rejected and low.a_constant <= bound * (1 + 1e-9)),
    }


def log_integral_bound(h: RadialLike, sigma: float, a: float, b: float, c_h: float) -> Dict[str, Any]:
    """int_a^b |h|^sigma dr/r against C_h * ceil(log2(b/a))."""
    if not (0 < a < b):
        raise DomainError("need 0 < a < b")
    value = radial_quad(_magnitude_power(h, sigma), a, b, "dr/r", list(getattr(h, "breakpoints", [])))
    blocks = ceil_log2_ratio(a, b)
    bound = c_h * blocks
    return {"integral": value, "blocks": blocks, "bound": bound, "holds": value <= bound * (1 + 1e-9)}


def dini_check(h: RadialFactor) -> float:
    """int_0^1 |h(t) - h(0)| dt/t from dyadic pieces; +inf when the pieces do not decay."""
    if h.h0 is None:
        raise ConfigurationError("Dini integral needs a declared h(0)", field="radial.h0")
    h0 = complex(h.h0)
    func = lambda r: np.abs(np.asarray(h(r)) - h0)
    # finest scale last
    pieces = dyadic_pieces(func, -DINI_LEVELS - 1, -1, "dr/r", h.breakpoints)[::-1]
    total = float(pieces.sum())
    if total == 0:
        return 0.0
    tail = float(pieces[-DINI_TAIL_LEVELS:].sum())
    if tail > 0.01 * total:
        logger.info("Dini pieces of %s do not decay near 0 (tail share %.3f)", h.label, tail / total)
        return math.inf
    return total


def radial_log_integral(h: RadialLike, radius: float) -> float:
    """int_0^R |h(r)| dr/r; finite only when h vanishes near 0 or decays there."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    func = _magnitude_power(h, 1.0)
    eps = float(getattr(h, "epsilon", 0.0))
    points = list(getattr(h, "breakpoints", []))
    if eps > 0:
        return radial_quad(func, eps, radius, "dr/r", points) if radius > eps else 0.0
    pieces = np.asarray([radial_quad(func, radius * 2.0 ** (-k - 1), radius * 2.0 ** (-k), "dr/r", points)
                         for k in range(DINI_LEVELS + 1)])
    total = float(pieces.sum())
    if total > 0 and pieces[-DINI_TAIL_LEVELS:].sum() > 0.01 * total:
        return math.inf
    return total


def vanishing_log_bound(h: RadialFactor, c_h: float) -> Dict[str, float]:
    """Constants C1, C2 with int_0^R |h| dr/r <= C1 + C2 log^+ R for h vanishing on (0, eps]."""
    if h.epsilon <= 0:
        raise DomainError("the logarithmic bound needs h to vanish near the origin")
    return {"C1": c_h * (ceil_log2_ratio(h.epsilon, 1.0) + 1) if h.epsilon < 1 else c_h, "C2": c_h / math.log(2.0)}
