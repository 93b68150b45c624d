"""
Star-shaped set S = {x : |x| <= rho(x)} attached to an angular kernel.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from rough_sio.errors import DomainError
from rough_sio.models.kernel import TWO_PI, AngularKernel

logger = logging.getLogger(__name__)

DILATION_BLOCKS = 8
DILATION_NODES_PER_BLOCK = 64


def stratum_index(rho_values: np.ndarray) -> np.ndarray:
    """m = 0 for rho <= 1, else the m with 2^{m-1} < rho <= 2^m."""
    rho_values = np.asarray(rho_values, dtype=float)
    m = np.zeros(rho_values.shape, dtype=int)
    big = rho_values > 1.0
    guess = np.ceil(np.log2(rho_values[big])).astype(int)
    guess = np.where(2.0 ** (guess - 1) >= rho_values[big], guess - 1, guess)
    guess = np.where(2.0**guess < rho_values[big], guess + 1, guess)
    m[big] = guess
    return m


@dataclass(frozen=True)
class Stratum:
    m: int
    measure: float
    cells: Tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"m": self.m, "measure": self.measure, "cell_count": len(self.cells)}


@dataclass(frozen=True)
class SetIntegrals:
    """Integral identities and bounds on S."""

    measure: float
    sgn_integral: complex
    omega_integral_over_n: complex
    logp_integral: float
    log_integral: float
    weighted_strata_sum: float
    llogl: float
    strata_total: float
    logp_bound: float
    log_bound: float
    strata_constant: float
    strata_constant_bound: float

    @property
    def logp_ok(self) -> bool:
        return self.logp_integral <= self.logp_bound * (1 + 1e-12)

    @property
    def log_ok(self) -> bool:
        return self.log_integral <= self.log_bound * (1 + 1e-12)

    @property
    def strata_ok(self) -> bool:
        return self.strata_constant <= self.strata_constant_bound * (1 + 1e-12)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "measure": self.measure,
            "sgn_integral": [self.sgn_integral.real, self.sgn_integral.imag],
            "logp_integral": self.logp_integral,
            "logp_bound": self.logp_bound,
            "log_integral": self.log_integral,
            "log_bound": self.log_bound,
            "weighted_strata_sum": self.weighted_strata_sum,
            "llogl_norm": self.llogl,
            "strata_constant": self.strata_constant,
            "strata_constant_bound": self.strata_constant_bound,
        }


@dataclass(frozen=True, eq=False)
class StarSet:
    """S_Omega with per-cell profile, strata and cached measures."""

    kernel: AngularKernel
    rho_cells: np.ndarray
    stratum_cells: np.ndarray
    measure: float
    strata_measures: Dict[int, float] = field(default_factory=dict)
    residual_mass: float = 0.0
    strata_cap: int = 64

    @classmethod
    def from_kernel(cls, kernel: AngularKernel, strata_cap: int = 64) -> "StarSet":
        n = kernel.dimension
        rho_cells = kernel.rho_values
        m = stratum_index(rho_cells)
        mass = kernel.abs_values * kernel.measures / n
        residual = float(mass[m > strata_cap].sum())
        if residual > 0:
            logger.warning("Strata above m=%d carry residual mass %.3e", strata_cap, residual)
        strata_measures: Dict[int, float] = {}
        for level in np.unique(m[m <= strata_cap]):
            strata_measures[int(level)] = float(mass[m == level].sum())
        return cls(
            kernel=kernel,
            rho_cells=rho_cells,
            stratum_cells=m,
            measure=float(mass.sum()),
            strata_measures=strata_measures,
            residual_mass=residual,
            strata_cap=strata_cap,
        )

    @property
    def dimension(self) -> int:
        return self.kernel.dimension

    @property
    def rho_max(self) -> float:
        return float(self.rho_cells.max())

    def rho_at(self, y: np.ndarray) -> np.ndarray:
        """Cell profile rho(y/|y|) for nonzero points."""
        return self.rho_cells[self.kernel.cell_index(_directions(y))]

    def contains(self, y: np.ndarray, t: float = 1.0, epsilon: float = 0.0) -> np.ndarray:
        """Vectorised membership in tS minus B(0, eps); the origin belongs to every tS."""
        if t <= 0:
            raise DomainError(f"dilation must be positive, got {t}")
        if epsilon < 0:
            raise DomainError(f"truncation radius must be nonnegative, got {epsilon}")
        y = np.asarray(y, dtype=float)
        dist = np.linalg.norm(y, axis=-1)
        out = np.ones(dist.shape, dtype=bool)
        nonzero = dist > 0
        profile = self.rho_at(y[nonzero])
        out[nonzero] = (dist[nonzero] > epsilon) & (dist[nonzero] <= t * profile)
        return out

    def scaled(self, factor: float) -> "StarSet":
        """Star set of lambda^n Omega, i.e. the dilate lambda S."""
        return StarSet.from_kernel(self.kernel.scaled(factor**self.dimension), strata_cap=self.strata_cap)

    def strata_list(self) -> List[Stratum]:
        out = []
        for level, mass in sorted(self.strata_measures.items()):
            cells = tuple(int(i) for i in np.flatnonzero(self.stratum_cells == level))
            out.append(Stratum(m=level, measure=mass, cells=cells))
        return out

    # sampling

    def sample(self, count: int, rng: np.random.Generator, m: Optional[int] = None) -> np.ndarray:
        """Uniform samples of S (or of the stratum S_m) by polar inversion."""
        n = self.dimension
        mass = self.kernel.abs_values * self.kernel.measures
        if m is not None:
            mass = np.where(self.stratum_cells == m, mass, 0.0)
        total = mass.sum()
        if total <= 0:
            return np.zeros((0, n))
        cells = rng.choice(mass.size, size=count, p=mass / total)
        directions = self._uniform_in_cells(cells, rng)
        radii = self.rho_cells[cells] * rng.random(count) ** (1.0 / n)
        return directions * radii[:, None]

    def _uniform_in_cells(self, cells: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        k = self.kernel
        if k.dimension == 2:
            angle = k.edges[cells] + rng.random(cells.size) * (k.edges[cells + 1] - k.edges[cells])
            return np.stack([np.cos(angle), np.sin(angle)], axis=-1)
        n_polar, n_azimuth = k.grid_shape
        i, j = np.divmod(cells, n_azimuth)
        c0 = np.cos(i * math.pi / n_polar)
        c1 = np.cos((i + 1) * math.pi / n_polar)
        cos_phi = c0 + rng.random(cells.size) * (c1 - c0)
        lam = (j + rng.random(cells.size)) * TWO_PI / n_azimuth
        sin_phi = np.sqrt(np.maximum(0.0, 1.0 - cos_phi**2))
        return np.stack([sin_phi * np.cos(lam), sin_phi * np.sin(lam), cos_phi], axis=-1)

    def monte_carlo_measure(self, count: int, rng: np.random.Generator) -> Tuple[float, float]:
        """Area estimate from uniform samples of the bounding ball, with its standard error."""
        n = self.dimension
        radius = self.rho_max
        if radius == 0:
            return 0.0, 0.0
        directions = rng.normal(size=(count, n))
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
        points = directions * (radius * rng.random(count) ** (1.0 / n))[:, None]
        hits = self.contains(points).astype(float)
        ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n
        fraction = hits.mean()
        return ball * fraction, ball * math.sqrt(max(fraction * (1 - fraction), 0.0) / count)

    def outline(self) -> List[Tuple[float, float]]:
        """Polygon through the cell profile (n = 2), for plotting."""
        if self.dimension != 2:
            raise DomainError("outline is only available for n = 2")
        points = []
        edges = self.kernel.edges
        for i, radius in enumerate(self.rho_cells):
            for angle in (edges[i], edges[i + 1]):
                points.append((float(radius * math.cos(angle)), float(radius * math.sin(angle))))
        return points


def _directions(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def membership(star: StarSet, y: Sequence[float], t: float, epsilon: float = 0.0) -> bool:
    """True iff |y| > eps and |y| <= t rho(y); the origin is in every tS."""
    return bool(star.contains(np.asarray(y, dtype=float), t=t, epsilon=epsilon))


def dilation_identity(star: StarSet, y: Sequence[float], epsilon: float = 0.0) -> Tuple[float, float]:
    """(numeric, closed form) of int_0^inf t^{-n} chi_{tS minus B(0,eps)}(y) dt/t.

    The numeric side locates the membership threshold by bisection on
    :func:`membership`, integrates t^{-n} on a geometric grid above it and adds
    the exact tail of t^{-n-1} beyond the grid.
    """
    y = np.asarray(y, dtype=float)
    n = star.dimension
    dist = float(np.linalg.norm(y))
    if dist == 0:
        raise DomainError("dilation identity is stated for y != 0")
    profile = float(star.rho_at(y))
    if profile == 0 or dist <= epsilon:
        return 0.0, 0.0
    closed = profile**n / (n * dist**n)
    lo = 0.5 * dist / profile
    hi = 2.0 * dist / profile
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if membership(star, y, mid, epsilon):
            hi = mid
        else:
            lo = mid
    threshold = hi
    top = threshold * 2.0**DILATION_BLOCKS
    u = np.linspace(math.log(threshold), math.log(top), DILATION_BLOCKS * DILATION_NODES_PER_BLOCK + 1)
    t = np.exp(u)
    inside = np.asarray([membership(star, y, float(s), epsilon) for s in t], dtype=float)
    body = integrate.simpson(t ** (-n) * inside, x=u)
    tail = top ** (-n) / n
    return float(body + tail), float(closed)


def set_integrals(star: StarSet) -> SetIntegrals:
    """Polar closed forms of the integral identities and bounds on S."""
    k = star.kernel
    n = star.dimension
    mu = k.measures
    magnitude = k.abs_values
    profile = star.rho_cells
    measure = float(np.sum(magnitude * mu) / n)
    sgn_integral = complex(np.sum(k.sign_values * profile**n * mu) / n)
    omega_over_n = k.integral() / n
    rn = profile**n
    with np.errstate(divide="ignore", invalid="ignore"):
        log_rho = np.where(profile > 0, np.log(np.where(profile > 0, profile, 1.0)), 0.0)
    # int_0^rho log^+(r) r^{n-1} dr and int_0^rho |log r| r^{n-1} dr
    logp = np.where(profile > 1, rn * log_rho / n - rn / n**2 + 1.0 / n**2, 0.0)
    below = rn / n**2 - rn * log_rho / n
    log_abs = np.where(profile > 1, 1.0 / n**2 + logp, below)
    llogl = k.llogl_sum()
    strata_total = float(sum(star.strata_measures.values()))
    weighted = float(sum((m + 1) * mass for m, mass in star.strata_measures.items()))
    return SetIntegrals(
        measure=measure,
        sgn_integral=sgn_integral,
        omega_integral_over_n=omega_over_n,
        logp_integral=float(np.sum(logp * mu)),
        log_integral=float(np.sum(log_abs * mu)),
        weighted_strata_sum=weighted,
        llogl=llogl,
        strata_total=strata_total,
        logp_bound=llogl / n**2,
        log_bound=(llogl + k.sphere_measure()) / n**2,
        strata_constant=weighted / llogl if llogl > 0 else 0.0,
        strata_constant_bound=2.0 / n,
    )


def strata(star: StarSet) -> List[Stratum]:
    """Disjoint strata (m, |S_m|, cells of Theta_m), increasing in m."""
    return star.strata_list()
