"""
Polar integration over regions star-shaped about the origin.

Every region handled here (balls, origin-centred rectangles, dilates of
S_Omega) is described by its radial extent l(theta): the region is
{r*theta : 0 <= r <= l(theta)}. Integrals of separable integrands
Phi(theta) * g(|y|) then reduce to a direction sum of radial moments.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate

from rough_sio.errors import DomainError
from rough_sio.models.kernel import TWO_PI, AngularKernel
from rough_sio.utils.quadrature import gauss_legendre

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AngularQuadrature:
    """Direction nodes on S^1 with weights and the kernel data at each node."""

    angles: np.ndarray
    weights: np.ndarray
    omega: np.ndarray
    cell_ids: np.ndarray

    @property
    def directions(self) -> np.ndarray:
        return np.stack([np.cos(self.angles), np.sin(self.angles)], axis=-1)

    @property
    def dimension(self) -> int:
        return 2

    @property
    def abs_omega(self) -> np.ndarray:
        return np.abs(self.omega)

    @property
    def rho(self) -> np.ndarray:
        return self.abs_omega ** 0.5

    @property
    def sign(self) -> np.ndarray:
        magnitude = self.abs_omega
        out = np.zeros_like(self.omega)
        nonzero = magnitude > 0
        out[nonzero] = self.omega[nonzero] / magnitude[nonzero]
        return out

    @classmethod
    def build(
        cls,
        edges: np.ndarray,
        values: Optional[np.ndarray] = None,
        max_width: Optional[float] = None,
        order: int = 2,
        breaks: Iterable[float] = (),
    ) -> "AngularQuadrature":
        """Gauss-Legendre nodes on each cell of ``edges``, split at ``breaks``.

        Pieces wider than ``max_width`` are subdivided evenly.
        """
        edges = np.asarray(edges, dtype=float)
        extra = np.mod(np.asarray(list(breaks), dtype=float), TWO_PI)
        bounds = np.unique(np.concatenate([edges, extra]))
        bounds = bounds[(bounds >= 0) & (bounds <= TWO_PI)]
        a, b = bounds[:-1], bounds[1:]
        keep = b > a
        a, b = a[keep], b[keep]
        cell = np.clip(np.searchsorted(edges, 0.5 * (a + b), side="right") - 1, 0, edges.size - 2)
        if max_width:
            counts = np.maximum(1, np.ceil((b - a) / max_width)).astype(int)
        else:
            counts = np.ones(a.size, dtype=int)
        widths = np.repeat((b - a) / counts, counts)
        firsts = np.repeat(np.cumsum(counts) - counts, counts)
        starts = np.repeat(a, counts) + (np.arange(counts.sum()) - firsts) * widths
        nodes, w = gauss_legendre(order)
        angles = (starts[:, None] + widths[:, None] * 0.5 * (nodes + 1.0)).ravel()
        weights = (widths[:, None] * 0.5 * w).ravel()
        cell_ids = np.repeat(np.repeat(cell, counts), order)
        if values is None:
            omega = np.ones(angles.size, dtype=complex)
        else:
            omega = np.asarray(values, dtype=complex)[cell_ids]
        return cls(angles=angles, weights=weights, omega=omega, cell_ids=cell_ids)

    @classmethod
    def from_kernel(cls, kernel: AngularKernel, max_width: Optional[float] = None, order: int = 2,
                    breaks: Iterable[float] = ()) -> "AngularQuadrature":
        if kernel.dimension != 2:
            raise DomainError("direction quadrature is implemented for n = 2")
        return cls.build(kernel.edges, kernel.values, max_width=max_width, order=order, breaks=breaks)

    @classmethod
    def uniform(cls, count: int = 512, order: int = 4, breaks: Iterable[float] = ()) -> "AngularQuadrature":
        return cls.build(np.linspace(0.0, TWO_PI, count + 1), None, order=order, breaks=breaks)


class RadialMoments:
    """Cumulative radial moments G(s) = int_0^s g(r) r^{n-1} dr on a geometric grid.

    Below the grid the integrand is treated as constant, so the neglected
    mass is at most g(r_lo) r_lo^n / n.
    """

    def __init__(self, g: Callable[[np.ndarray], np.ndarray], dimension: int, r_lo: float, r_hi: float,
                 per_block: int = 48, breaks: Iterable[float] = ()):
        self.dimension = dimension
        self.r_lo = r_lo
        self.r_hi = r_hi
        count = int(math.ceil(math.log2(r_hi / r_lo) * per_block))
        u = np.linspace(math.log(r_lo), math.log(r_hi), count + 1)
        cuts = np.log([p for p in breaks if r_lo < p < r_hi])
        if cuts.size:
            u = np.unique(np.concatenate([u, cuts, np.nextafter(cuts, np.inf)]))
        r = np.exp(u)
        values = np.asarray(g(r), dtype=float)
        integrand = values * r**dimension
        head = float(values[0]) * r_lo**dimension / dimension
        self.u = u
        self.cumulative = head + integrate.cumulative_trapezoid(integrand, u, initial=0.0)

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if np.any(s > self.r_hi * (1 + 1e-12)):
            raise DomainError(f"radial moment requested beyond {self.r_hi}")
        out = np.zeros_like(s)
        positive = s > 0
        logs = np.log(np.maximum(s[positive], self.r_lo))
        inside = np.interp(logs, self.u, self.cumulative)
        small = s[positive] < self.r_lo
        if np.any(small):
            scale = (s[positive][small] / self.r_lo) ** self.dimension
            inside[small] = self.cumulative[0] * scale
        out[positive] = inside
        return out


def star_integral(
    quadrature: AngularQuadrature,
    extent: np.ndarray,
    angular: Optional[np.ndarray] = None,
    radial: Optional[RadialMoments] = None,
    dimension: int = 2,
) -> float:
    """Integral of angular(theta) * g(|y|) over {r theta : r <= extent(theta)}.

    Without ``radial`` the radial factor is 1 and the moment is extent^n / n.
    """
    extent = np.asarray(extent, dtype=float)
    factor = np.ones_like(extent) if angular is None else np.asarray(angular, dtype=float)
    if radial is None:
        moments = extent**dimension / dimension
    else:
        moments = radial(extent)
    return float(np.sum(quadrature.weights * factor * moments))
