"""
Analytic test functions f with declared bounds, and Lipschitz fields a(x).

Test functions are what the pointwise operator evaluations and the
principal-value limits run on: each one carries sup |f|, sup |grad f| and a
support radius about its centre (effective support for the Gaussian).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from rough_sio.errors import ConfigurationError, DomainError
from rough_sio.models.grid import GridFunction

# exp(-GAUSSIAN_CUTOFF^2 / 2) is below double precision relative to the peak
GAUSSIAN_CUTOFF = 8.5

FAMILIES = ("gaussian", "bump", "poly_bump", "plateau")


@dataclass(frozen=True, eq=False)
class TestFunction:
    """One member of an analytic family centred at ``center``.

    gaussian:  amplitude * exp(-|u|^2 / (2 s^2)), s = width
    bump:      amplitude * (1 - |u|^2 / w^2)^2 on |u| < w
    poly_bump: amplitude * (u_1 / w) * (1 - |u|^2 / w^2)^2 on |u| < w
    plateau:   amplitude on |u| <= inner, smoothstep down to 0 at |u| = width
    with u = y - center.
    """

    __test__ = False

    family: str
    center: np.ndarray
    width: float = 1.0
    amplitude: float = 1.0
    inner: float = 0.0
    label: str = "f"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown test function family {self.family!r}", field="family")
        if self.width <= 0:
            raise ConfigurationError("width must be positive", field="width")
        if self.family == "plateau" and not (0 <= self.inner < self.width):
            raise ConfigurationError("plateau needs 0 <= inner < width", field="inner")

    @property
    def dimension(self) -> int:
        return int(np.asarray(self.center).size)

    # evaluation

    def __call__(self, y: np.ndarray) -> np.ndarray:
        u = np.asarray(y, dtype=float) - self.center
        r2 = np.sum(u * u, axis=-1)
        w = self.width
        if self.family == "gaussian":
            return self.amplitude * np.exp(-r2 / (2.0 * w * w))
        if self.family in ("bump", "poly_bump"):
            q = np.clip(1.0 - r2 / (w * w), 0.0, None)
            out = self.amplitude * q * q
            if self.family == "poly_bump":
                out = out * u[..., 0] / w
            return out
        return self.amplitude * _smoothstep((w - np.sqrt(r2)) / (w - self.inner))

    def gradient(self, y: np.ndarray) -> np.ndarray:
        u = np.asarray(y, dtype=float) - self.center
        r2 = np.sum(u * u, axis=-1)
        w = self.width
        if self.family == "gaussian":
            return -(u / (w * w)) * (self.amplitude * np.exp(-r2 / (2.0 * w * w)))[..., None]
        if self.family in ("bump", "poly_bump"):
            q = np.clip(1.0 - r2 / (w * w), 0.0, None)
            grad = (-4.0 * q / (w * w))[..., None] * u
            if self.family == "bump":
                return self.amplitude * grad
            e1 = np.zeros(self.dimension)
            e1[0] = 1.0
            return self.amplitude * ((q * q)[..., None] * e1 / w + (u[..., 0] / w)[..., None] * grad)
        r = np.sqrt(r2)
        s = (w - r) / (w - self.inner)
        slope = np.where((s > 0) & (s < 1), 6.0 * s * (1.0 - s), 0.0) / (w - self.inner)
        with np.errstate(divide="ignore", invalid="ignore"):
            radial = np.where(r > 0, u / np.where(r > 0, r, 1.0)[..., None], 0.0)
        return -self.amplitude * slope[..., None] * radial

    # declared bounds

    @property
    def sup_norm(self) -> float:
        a = abs(self.amplitude)
        if self.family == "poly_bump":
            return a * 16.0 / (25.0 * math.sqrt(5.0))
        return a

    @property
    def grad_bound(self) -> float:
        a = abs(self.amplitude)
        w = self.width
        if self.family == "gaussian":
            return a * math.exp(-0.5) / w
        if self.family == "bump":
            return a * 8.0 / (3.0 * math.sqrt(3.0) * w)
        if self.family == "poly_bump":
            return a * (1.0 + 8.0 / (3.0 * math.sqrt(3.0))) / w
        return a * 1.5 / (w - self.inner)

    @property
    def support_radius(self) -> float:
        if self.family == "gaussian":
            return GAUSSIAN_CUTOFF * self.width
        return self.width

    @property
    def support_center(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    # transforms

    def shifted(self, v: Sequence[float]) -> "TestFunction":
        """y -> f(y - v)."""
        return replace(self, center=self.support_center + np.asarray(v, dtype=float))

    def dilated(self, factor: float) -> "TestFunction":
        """y -> f(y / factor)."""
        if factor <= 0:
            raise DomainError("dilation factor must be positive")
        return replace(self, center=self.support_center * factor, width=self.width * factor,
                       inner=self.inner * factor)

    def scaled(self, factor: float) -> "TestFunction":
        return replace(self, amplitude=self.amplitude * factor)

    def on_grid(self, half_width: float, resolution: int) -> GridFunction:
        return GridFunction.centered_box(self, half_width, resolution, dimension=self.dimension, label=self.label)

    def finite_difference_check(self, rng: np.random.Generator, count: int = 100, step: float = 1e-6) -> Dict[str, float]:
        """Compare the analytic gradient with central differences at random points of the support."""
        n = self.dimension
        radius = self.support_radius
        points = self.support_center + rng.uniform(-radius, radius, size=(count, n))
        fd = np.zeros((count, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            fd[:, i] = (self(points + e) - self(points - e)) / (2.0 * step)
        analytic = self.gradient(points)
        mismatch = float(np.max(np.linalg.norm(fd - analytic, axis=-1)))
        observed = float(np.max(np.linalg.norm(fd, axis=-1)))
        return {
            "max_gradient_mismatch": mismatch,
            "relative_mismatch": mismatch / self.grad_bound,
            "observed_gradient": observed,
            "grad_bound": self.grad_bound,
            "bound_ok": observed <= self.grad_bound * 1.01,
        }

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": "analytic",
            "family": self.family,
            "center": [float(v) for v in self.center],
            "width": self.width,
            "amplitude": self.amplitude,
        }
        if self.family == "plateau":
            data["inner"] = self.inner
        return data


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True, eq=False)
class FunctionSum:
    """Finite linear combination sum_i c_i f_i of test functions."""

    terms: Tuple[Tuple[complex, TestFunction], ...]
    label: str = "sum"

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return sum(c * f(y) for c, f in self.terms)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        return sum(c * f.gradient(y) for c, f in self.terms)

    @property
    def dimension(self) -> int:
        return self.terms[0][1].dimension

    @property
    def support_center(self) -> np.ndarray:
        return np.mean([f.support_center for _, f in self.terms], axis=0)

    @property
    def support_radius(self) -> float:
        c = self.support_center
        return max(float(np.linalg.norm(f.support_center - c)) + f.support_radius for _, f in self.terms)

    @property
    def sup_norm(self) -> float:
        return float(sum(abs(c) * f.sup_norm for c, f in self.terms))

    @property
    def grad_bound(self) -> float:
        return float(sum(abs(c) * f.grad_bound for c, f in self.terms))


def combine(terms: Sequence[Tuple[complex, TestFunction]], label: str = "sum") -> FunctionSum:
    if not terms:
        raise DomainError("a combination needs at least one term")
    return FunctionSum(terms=tuple((complex(c), f) for c, f in terms), label=label)


@dataclass(frozen=True, eq=False)
class LipschitzField:
    """a(x) with gradient; ``kind`` is "constant", "linear" or "sinusoid".

    constant: a = offset
    linear:   a = v . x + offset
    sinusoid: a = amplitude * sin(v . x) + offset
    """

    kind: str
    vector: np.ndarray
    amplitude: float = 1.0
    offset: float = 0.0
    label: str = "a"

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "sinusoid"):
            raise ConfigurationError(f"unknown field kind {self.kind!r}", field="kind")

    @property
    def dimension(self) -> int:
        return int(np.asarray(self.vector).size)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape[:-1], self.offset)
        phase = x @ np.asarray(self.vector, dtype=float)
        if self.kind == "linear":
            return phase + self.offset
        return self.amplitude * np.sin(phase) + self.offset

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(self.vector, dtype=float)
        if self.kind == "constant":
            return np.zeros(x.shape)
        if self.kind == "linear":
            return np.broadcast_to(v, x.shape).copy()
        return (self.amplitude * np.cos(x @ v))[..., None] * v

    @property
    def lipschitz_bound(self) -> float:
        """Declared sup |grad a|."""
        if self.kind == "constant":
            return 0.0
        scale = 1.0 if self.kind == "linear" else abs(self.amplitude)
        return scale * float(np.linalg.norm(self.vector))

    def modulus(self, x: Sequence[float], t: np.ndarray, directions: int = 256) -> np.ndarray:
        """w_x(t) = sup_theta |a(x) - a(x - t theta) - grad a(x) . t theta| / t over sampled theta (n = 2)."""
        if self.dimension != 2:
            raise DomainError("the sampled modulus is implemented for n = 2")
        x = np.asarray(x, dtype=float)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        angles = np.linspace(0.0, 2.0 * math.pi, directions, endpoint=False)
        theta = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        steps = t[:, None, None] * theta[None, :, :]
        remainder = float(self(x)) - self(x - steps) - steps @ self.gradient(x)
        return np.max(np.abs(remainder), axis=-1) / t

    def check_lipschitz(self, rng: np.random.Generator, count: int = 200, spread: float = 4.0) -> bool:
        """|a(x) - a(y)| <= sup|grad a| |x - y| on random pairs."""
        x = rng.uniform(-spread, spread, size=(count, self.dimension))
        y = rng.uniform(-spread, spread, size=(count, self.dimension))
        lhs = np.abs(self(x) - self(y))
        rhs = self.lipschitz_bound * np.linalg.norm(x - y, axis=-1)
        return bool(np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-14))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "vector": [float(v) for v in self.vector],
            "amplitude": self.amplitude,
            "offset": self.offset,
        }
