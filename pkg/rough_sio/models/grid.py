"""
Sampled functions on uniform box grids and maximal-operator probe settings
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from rough_sio.errors import ConfigurationError, DomainError


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values at cell centres corner + (i + 1/2) * spacing of a box grid."""

    corner: np.ndarray
    sides: np.ndarray
    values: np.ndarray
    label: str = "f"

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != np.asarray(self.corner).size:
            raise ConfigurationError("grid values must have one axis per dimension", field="values")
        if min(values.shape) < 2:
            raise ConfigurationError("grid resolution must be at least 2 per axis", field="resolution")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("grid values must be finite", field="values")
        if np.any(np.asarray(self.sides) <= 0):
            raise ConfigurationError("box sides must be positive", field="sides")

    @classmethod
    def sample(cls, func: Callable[[np.ndarray], np.ndarray], corner: Sequence[float], sides: Sequence[float],
               resolution: Sequence[int], label: str = "f") -> "GridFunction":
        corner = np.asarray(corner, dtype=float)
        sides = np.asarray(sides, dtype=float)
        resolution = tuple(int(v) for v in resolution)
        axes = [corner[i] + (np.arange(resolution[i]) + 0.5) * sides[i] / resolution[i] for i in range(corner.size)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(corner=corner, sides=sides, values=np.asarray(func(mesh)), label=label)

    @classmethod
    def centered_box(cls, func: Callable[[np.ndarray], np.ndarray], half_width: float, resolution: int,
                     dimension: int = 2, label: str = "f") -> "GridFunction":
        return cls.sample(func, [-half_width] * dimension, [2 * half_width] * dimension,
                          [resolution] * dimension, label=label)

    @property
    def dimension(self) -> int:
        return int(np.asarray(self.corner).size)

    @property
    def resolution(self) -> Tuple[int, ...]:
        return tuple(np.asarray(self.values).shape)

    @property
    def spacing(self) -> np.ndarray:
        return np.asarray(self.sides, dtype=float) / np.asarray(self.resolution)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.corner) + 0.5 * np.asarray(self.sides)

    @property
    def support_radius(self) -> float:
        return float(0.5 * np.linalg.norm(self.sides))

    @property
    def support_center(self) -> np.ndarray:
        return self.center

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)

    def axes(self) -> List[np.ndarray]:
        h = self.spacing
        return [self.corner[i] + (np.arange(self.resolution[i]) + 0.5) * h[i] for i in range(self.dimension)]

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def with_values(self, values: np.ndarray, label: Optional[str] = None) -> "GridFunction":
        return replace(self, values=np.asarray(values), label=label or self.label)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.resolution == other.resolution
            and np.allclose(self.corner, other.corner)
            and np.allclose(self.sides, other.sides)
        )

    def nearest_index(self, x: Sequence[float]) -> Tuple[int, ...]:
        rel = (np.asarray(x, dtype=float) - self.corner) / self.spacing - 0.5
        idx = np.clip(np.rint(rel).astype(int), 0, np.asarray(self.resolution) - 1)
        return tuple(int(i) for i in idx)

    @cached_property
    def interpolator(self) -> RegularGridInterpolator:
        """Linear interpolation with zero extension outside the node hull."""
        return RegularGridInterpolator(self.axes(), np.asarray(self.values), bounds_error=False, fill_value=0.0)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.dimension)
        return self.interpolator(flat).reshape(x.shape[:-1])

    def weighted_norm(self, p: float, weights: Optional[np.ndarray] = None) -> float:
        """(sum |f|^p w h^n)^{1/p}."""
        magnitude = np.abs(np.asarray(self.values)) ** p
        if weights is not None:
            magnitude = magnitude * weights
        return float((magnitude.sum() * self.cell_volume) ** (1.0 / p))

    def to_dict(self) -> Dict[str, Any]:
        values = np.asarray(self.values)
        data: Dict[str, Any] = {
            "kind": "grid",
            "corner": [float(v) for v in self.corner],
            "sides": [float(v) for v in self.sides],
            "resolution": list(self.resolution),
        }
        if np.iscomplexobj(values) and np.any(values.imag != 0):
            data["values"] = {"re": values.real.tolist(), "im": values.imag.tolist()}
        else:
            data["values"] = values.real.tolist()
        return data


@dataclass(frozen=True)
class MaximalConfig:
    """Dyadic radius and dilation probe sets and the fractional order."""

    radii: Tuple[float, ...]
    dilations: Tuple[float, ...]
    mu: float = 0.0

    def __post_init__(self):
        if not self.radii or any(r <= 0 for r in self.radii):
            raise DomainError("radii must be positive")
        if not self.dilations or any(t <= 0 for t in self.dilations):
            raise DomainError("dilations must be positive")
        if self.mu < 0:
            raise DomainError("fractional order must be nonnegative")

    @classmethod
    def dyadic(cls, j_min: int, j_max: int, mu: float = 0.0, t_min: Optional[int] = None,
               t_max: Optional[int] = None) -> "MaximalConfig":
        radii = tuple(2.0**j for j in range(j_min, j_max + 1))
        t_lo = j_min if t_min is None else t_min
        t_hi = j_max if t_max is None else t_max
        return cls(radii=radii, dilations=tuple(2.0**j for j in range(t_lo, t_hi + 1)), mu=mu)

    @classmethod
    def for_grid(cls, f: GridFunction, mu: float = 0.0) -> "MaximalConfig":
        """Dyadic radii from about two cells up to the box diameter."""
        h = float(np.max(f.spacing))
        j_min = int(np.ceil(np.log2(2.0 * h)))
        j_max = int(np.ceil(np.log2(2.0 * f.support_radius)))
        return cls.dyadic(j_min, max(j_min, j_max), mu=mu)

    def to_dict(self) -> Dict[str, Any]:
        return {"radii": list(self.radii), "dilations": list(self.dilations), "mu": self.mu}
