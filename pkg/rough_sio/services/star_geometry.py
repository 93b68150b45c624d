"""
Integrals over star-shaped regions and sampling of S_Omega.

Regions are anything with a radial extent: a StarSet (extent rho), an
origin-centred Rectangle, or a ball given by its radius.
"""
import logging
import math
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from rough_sio.errors import DomainError, UnsupportedHypothesisError
from rough_sio.models.cover import Rectangle
from rough_sio.models.kernel import RadialFactor
from rough_sio.models.starset import StarSet
from rough_sio.services.invariants import llogl_norm, vanishing_log_bound
from rough_sio.utils.polar import AngularQuadrature, RadialMoments, star_integral

logger = logging.getLogger(__name__)

Region = Union[StarSet, Rectangle, float]


def sample_uniform(star: StarSet, count: int, rng: np.random.Generator, m: Optional[int] = None) -> np.ndarray:
    """Uniform points of S (or of the stratum S_m) by exact polar inversion."""
    if count < 0:
        raise DomainError("sample count must be nonnegative")
    return star.sample(count, rng, m=m)


def outline(star: StarSet):
    """Boundary polygon of S for plotting (n = 2)."""
    return star.outline()


def region_quadrature(region: Region, max_width: float = 0.01) -> Tuple[AngularQuadrature, np.ndarray]:
    """Direction nodes aligned with the kinks of ``region`` and its extent at each node (n = 2)."""
    if isinstance(region, StarSet):
        if region.dimension != 2:
            raise DomainError("region quadrature is implemented for n = 2")
        quad = AngularQuadrature.from_kernel(region.kernel, max_width=max_width)
        return quad, region.rho_cells[quad.cell_ids]
    if isinstance(region, Rectangle):
        if region.dimension != 2:
            raise DomainError("region quadrature is implemented for n = 2")
        quad = AngularQuadrature.uniform(count=int(math.ceil(2 * math.pi / max_width)), order=4,
                                         breaks=region.corner_angles())
        return quad, region.radial_extent(quad.directions)
    radius = float(region)
    if radius <= 0:
        raise DomainError("ball radius must be positive")
    quad = AngularQuadrature.uniform(count=64, order=4)
    return quad, np.full(quad.angles.size, radius)


def region_measure(region: Region) -> float:
    quad, extent = region_quadrature(region)
    return star_integral(quad, extent)


def star_power_integral(region: Region, h: RadialFactor, sigma: float, t: float) -> Dict[str, float]:
    """int_E |h(t|y|)|^sigma dy and |E| for a region E star-shaped about the origin."""
    if t <= 0:
        raise DomainError("scale t must be positive")
    quad, extent = region_quadrature(region)
    top = float(extent.max())
    if top == 0:
        return {"integral": 0.0, "measure": 0.0}
    breaks = [b / t for b in h.breakpoints]
    moments = RadialMoments(lambda r: np.abs(np.asarray(h(t * r))) ** sigma, 2, top * 2.0**-40, top,
                            per_block=48, breaks=breaks)
    return {"integral": star_integral(quad, extent, radial=moments), "measure": star_integral(quad, extent)}


def star_log_integral(star: StarSet, h: RadialFactor, per_block: int = 64) -> float:
    """int_0^1 int_S |h(t|y|)| dy dt/t = int_S Phi(|y|) dy with Phi(R) = int_0^R |h| dr/r.

    Needs h to vanish near the origin.
    """
    if h.epsilon <= 0:
        raise UnsupportedHypothesisError("star log integral needs h vanishing near the origin")
    n = star.dimension
    eps = h.epsilon
    rho_max = star.rho_max
    if rho_max <= eps:
        return 0.0
    count = max(2, int(math.ceil(math.log2(rho_max / eps) * per_block)))
    u = np.linspace(math.log(eps), math.log(rho_max), count + 1)
    r = np.exp(u)
    magnitude = np.abs(np.asarray(h(r)))
    # right limit at the truncation radius
    magnitude[0] = abs(complex(np.asarray(h(np.nextafter(eps, np.inf)))))
    phi = integrate.cumulative_trapezoid(magnitude, u, initial=0.0)
    moment = integrate.cumulative_trapezoid(phi * r**n, u, initial=0.0)
    rho = star.rho_cells
    inside = rho > eps
    values = np.zeros_like(rho)
    values[inside] = np.interp(np.log(rho[inside]), u, moment)
    return float(np.sum(values * star.kernel.measures))


def star_log_bound(star: StarSet, h: RadialFactor, c_h: float) -> Dict[str, Any]:
    """Compare star_log_integral with (C1/n + C2/n^2) ||Omega||_{L log L}."""
    n = star.dimension
    constants = vanishing_log_bound(h, c_h)
    value = star_log_integral(star, h)
    norm = llogl_norm(star.kernel)
    bound = (constants["C1"] / n + constants["C2"] / n**2) * norm
    return {"integral": value, "bound": bound, "llogl_norm": norm, **constants,
            "holds": value <= bound * (1 + 1e-9)}


def starlike_constant(dimension: int) -> float:
    """c_n = n / (1 - 2^{-n}) in int_E |h(t|y|)|^sigma dy <= c_n C_h |E|."""
    return dimension / (1.0 - 2.0**-dimension)
