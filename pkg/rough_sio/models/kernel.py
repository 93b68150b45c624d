"""
Homogeneous kernel Omega, radial factor h and the combined kernel spec.

An AngularKernel always carries a piecewise-constant cell representation of
Omega on the unit sphere. Kernels built from a callable keep the callable
for pointwise evaluation and use midpoint samples as cell values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from rough_sio.errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi

SphereFunction = Callable[[np.ndarray], np.ndarray]
RadialFunction = Callable[[np.ndarray], np.ndarray]
BoundedFactor = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _unit_vectors(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DomainError("kernel evaluation at the origin is undefined")
    return x / norms


@dataclass(frozen=True, eq=False)
class AngularKernel:
    """Omega on S^{n-1} as values on a cell partition.

    For n = 2 cells are arcs delimited by ``edges`` (radians, increasing,
    from 0 to 2*pi). For n = 3 cells form a latitude-longitude grid.
    """

    dimension: int
    values: np.ndarray
    measures: np.ndarray
    centers: np.ndarray
    edges: Optional[np.ndarray] = None
    grid_shape: Optional[Tuple[int, int]] = None
    source: Optional[SphereFunction] = None
    label: str = "omega"
    catalogue_id: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    resolution: Optional[int] = None
    cancellation_tol: float = 1e-8

    # construction

    @classmethod
    def from_arcs(
        cls,
        arcs: Sequence[Tuple[float, float, complex]],
        label: str = "arcs",
        catalogue_id: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
    ) -> "AngularKernel":
        """Build an n = 2 kernel from (angle_from, angle_to, value) arcs.

        Arcs must lie in [0, 2*pi] and may not overlap; uncovered angles get
        the value 0.
        """
        pieces = sorted((float(a), float(b), complex(v)) for a, b, v in arcs)
        edges: List[float] = [0.0]
        values: List[complex] = []
        cursor = 0.0
        for index, (start, stop, value) in enumerate(pieces):
            if not (0.0 <= start < stop <= TWO_PI + 1e-12):
                raise ConfigurationError(
                    f"arc [{start}, {stop}] must satisfy 0 <= from < to <= 2*pi",
                    field=f"cells[{index}]",
                )
            if start < cursor - 1e-15:
                raise ConfigurationError("arcs overlap", field=f"cells[{index}]")
            if start > cursor:
                edges.append(start)
                values.append(0.0)
            edges.append(min(stop, TWO_PI))
            values.append(value)
            cursor = min(stop, TWO_PI)
        if cursor < TWO_PI:
            edges.append(TWO_PI)
            values.append(0.0)
        edges_arr = np.asarray(edges, dtype=float)
        mids = 0.5 * (edges_arr[:-1] + edges_arr[1:])
        centers = np.stack([np.cos(mids), np.sin(mids)], axis=-1)
        return cls(
            dimension=2,
            values=np.asarray(values, dtype=complex),
            measures=np.diff(edges_arr),
            centers=centers,
            edges=edges_arr,
            label=label,
            catalogue_id=catalogue_id,
            params=dict(params or {}),
        )

    @classmethod
    def from_callable(
        cls,
        func: SphereFunction,
        dimension: int = 2,
        resolution: Optional[int] = None,
        label: str = "omega",
        catalogue_id: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
        azimuth_resolution: Optional[int] = None,
    ) -> "AngularKernel":
        """Resample a callable on unit vectors to midpoint cell values."""
        if dimension == 2:
            count = int(resolution or 4096)
            edges = np.linspace(0.0, TWO_PI, count + 1)
            mids = 0.5 * (edges[:-1] + edges[1:])
            centers = np.stack([np.cos(mids), np.sin(mids)], axis=-1)
            measures = np.diff(edges)
            grid_shape = None
        elif dimension == 3:
            n_polar = int(resolution or 128)
            n_azimuth = int(azimuth_resolution or 2 * n_polar)
            polar = np.linspace(0.0, math.pi, n_polar + 1)
            azimuth = np.linspace(0.0, TWO_PI, n_azimuth + 1)
            pm = 0.5 * (polar[:-1] + polar[1:])
            am = 0.5 * (azimuth[:-1] + azimuth[1:])
            phi, lam = np.meshgrid(pm, am, indexing="ij")
            centers = np.stack(
                [np.sin(phi) * np.cos(lam), np.sin(phi) * np.sin(lam), np.cos(phi)],
                axis=-1,
            ).reshape(-1, 3)
            band = np.cos(polar[:-1]) - np.cos(polar[1:])
            measures = np.repeat(band, n_azimuth) * (TWO_PI / n_azimuth)
            edges = None
            grid_shape = (n_polar, n_azimuth)
            count = n_polar
        else:
            raise DomainError(f"dimension {dimension} is not supported (use 2 or 3)")
        values = np.asarray(func(centers), dtype=complex)
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("kernel callable returned non-finite cell values", field="callable_id")
        return cls(
            dimension=dimension,
            values=values,
            measures=measures,
            centers=centers,
            edges=edges,
            grid_shape=grid_shape,
            source=func,
            label=label,
            catalogue_id=catalogue_id,
            params=dict(params or {}),
            resolution=count,
        )

    def resampled(self, resolution: int) -> "AngularKernel":
        """Same callable on a different cell resolution (cell kernels are returned as-is)."""
        if self.source is None:
            return self
        return AngularKernel.from_callable(
            self.source,
            dimension=self.dimension,
            resolution=resolution,
            label=self.label,
            catalogue_id=self.catalogue_id,
            params=self.params,
        )

    def scaled(self, factor: complex) -> "AngularKernel":
        source = None
        if self.source is not None:
            inner = self.source
            source = lambda u: factor * np.asarray(inner(u), dtype=complex)
        return replace(self, values=self.values * factor, source=source, label=f"{factor}*{self.label}",
                       catalogue_id=None)

    def multiplied(self, func: SphereFunction, label: str = None) -> "AngularKernel":
        """Pointwise product with another function of the direction."""
        extra = np.asarray(func(self.centers), dtype=complex)
        source = None
        if self.source is not None:
            inner = self.source
            source = lambda u: np.asarray(inner(u), dtype=complex) * np.asarray(func(u), dtype=complex)
        return replace(self, values=self.values * extra, source=source, label=label or f"{self.label}*g",
                       catalogue_id=None)

    # lookup

    @property
    def cell_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def cell_index(self, u: np.ndarray) -> np.ndarray:
        """Cell containing each unit vector of ``u`` (shape (..., n))."""
        u = np.asarray(u, dtype=float)
        if self.dimension == 2:
            angle = np.mod(np.arctan2(u[..., 1], u[..., 0]), TWO_PI)
            index = np.searchsorted(self.edges, angle, side="right") - 1
            return np.clip(index, 0, self.cell_count - 1)
        n_polar, n_azimuth = self.grid_shape
        phi = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
        lam = np.mod(np.arctan2(u[..., 1], u[..., 0]), TWO_PI)
        i = np.clip((phi / math.pi * n_polar).astype(int), 0, n_polar - 1)
        j = np.clip((lam / TWO_PI * n_azimuth).astype(int), 0, n_azimuth - 1)
        return i * n_azimuth + j

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Omega(x/|x|) for points of shape (..., n); routes through the unit vector."""
        u = _unit_vectors(x)
        if self.source is not None:
            return np.asarray(self.source(u), dtype=complex)
        return self.values[self.cell_index(u)]

    def cell_value(self, x: np.ndarray) -> np.ndarray:
        """Canonical piecewise-constant value at x/|x|."""
        return self.values[self.cell_index(_unit_vectors(x))]

    # derived cell quantities

    @property
    def abs_values(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def rho_values(self) -> np.ndarray:
        return self.abs_values ** (1.0 / self.dimension)

    @property
    def sign_values(self) -> np.ndarray:
        magnitude = self.abs_values
        out = np.zeros_like(self.values)
        nonzero = magnitude > 0
        out[nonzero] = self.values[nonzero] / magnitude[nonzero]
        return out

    def integral(self) -> complex:
        return complex(np.sum(self.values * self.measures))

    def norm_l1(self) -> float:
        return float(np.sum(self.abs_values * self.measures))

    def l_sigma_norm(self, sigma: float) -> float:
        return float(np.sum(self.abs_values**sigma * self.measures) ** (1.0 / sigma))

    def sphere_measure(self) -> float:
        return float(np.sum(self.measures))

    def llogl_sum(self) -> float:
        """Cell sum of |Omega| (1 + log^+ |Omega|)."""
        magnitude = self.abs_values
        return float(np.sum(magnitude * (1.0 + np.log(np.maximum(magnitude, 1.0))) * self.measures))

    def to_dict(self) -> Dict[str, Any]:
        """Convert kernel to its JSON document form"""
        if self.catalogue_id is not None:
            data: Dict[str, Any] = {
                "dimension": self.dimension,
                "callable_id": self.catalogue_id,
                "params": dict(self.params),
            }
            if self.resolution is not None:
                data["resolution"] = self.resolution
            return data
        cells = []
        for start, stop, value in zip(self.edges[:-1], self.edges[1:], self.values):
            if value == 0:
                continue
            entry: Any = value.real if value.imag == 0 else {"re": value.real, "im": value.imag}
            cells.append({"angle_from": float(start), "angle_to": float(stop), "value": entry})
        return {"dimension": self.dimension, "cells": cells}


@dataclass(frozen=True, eq=False)
class RadialFactor:
    """h on (0, infinity) with class exponent, optional truncation and h(0)."""

    func: RadialFunction
    sigma: float = 1.0
    epsilon: float = 0.0
    h0: Optional[complex] = None
    class_constant: Optional[float] = None
    label: str = "h"
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)
    constant_value: Optional[complex] = None

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.func(r))
        if out.shape != r.shape:
            out = np.broadcast_to(out, r.shape).copy()
        if self.epsilon > 0:
            out = np.where(r <= self.epsilon, 0.0, out)
        return out

    def truncated(self, epsilon: float) -> "RadialFactor":
        """h_eps = h on (eps, infinity), 0 on (0, eps]."""
        if epsilon < 0:
            raise DomainError("truncation radius must be nonnegative")
        return replace(self, epsilon=max(self.epsilon, float(epsilon)), label=f"{self.label}_eps")

    def with_constant(self, constant: float) -> "RadialFactor":
        return replace(self, class_constant=float(constant))

    @property
    def breakpoints(self) -> List[float]:
        return [self.epsilon] if self.epsilon > 0 else []

    @property
    def is_constant(self) -> bool:
        return self.constant_value is not None and self.epsilon == 0

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "params": dict(self.params), "sigma": self.sigma}
        if self.epsilon:
            data["epsilon"] = self.epsilon
        if self.h0 is not None:
            data["h0"] = complex(self.h0).real
        return data


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Omega, h and an optional bounded non-convolution factor k(x, y)."""

    omega: AngularKernel
    radial: RadialFactor
    k: Optional[BoundedFactor] = None
    k_bound: Optional[float] = None

    @property
    def dimension(self) -> int:
        return self.omega.dimension

    def truncated(self, epsilon: float) -> "KernelSpec":
        return replace(self, radial=self.radial.truncated(epsilon))

    def check_k_bound(self, x: np.ndarray, y: np.ndarray) -> bool:
        """True when |k| stays below its declared bound on the probed pairs."""
        if self.k is None:
            return True
        if self.k_bound is None:
            raise ConfigurationError("a non-convolution factor needs a declared sup bound", field="k_bound")
        values = np.abs(np.asarray(self.k(np.asarray(x, dtype=float), np.asarray(y, dtype=float))))
        return bool(np.all(values <= self.k_bound * (1.0 + 1e-12)))


def eval_omega(kernel: AngularKernel, x: Sequence[float]) -> complex:
    """Omega(x/|x|) at a single point x != 0."""
    return complex(kernel.evaluate(np.asarray(x, dtype=float)))


def rho(kernel: AngularKernel, x: Sequence[float]) -> float:
    """|Omega(x/|x|)|^{1/n} at a single point x != 0."""
    return float(abs(eval_omega(kernel, x)) ** (1.0 / kernel.dimension))
