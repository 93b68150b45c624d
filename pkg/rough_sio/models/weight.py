"""
Weights w(x) > 0 with family tags used to pick quadrature strategies
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from rough_sio.errors import ConfigurationError, DomainError

WeightFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Weight:
    """A positive weight.

    ``family`` is one of "constant", "power" (|x|^alpha, homogeneous with a
    possible singularity at 0), "exp_x1" (exp(beta * x_1)) or "custom".
    ``length_scale`` bounds the size of boxes on which the weight is treated
    as smooth by the quadrature.
    """

    func: WeightFunction
    family: str = "custom"
    params: Dict[str, float] = field(default_factory=dict)
    length_scale: Optional[float] = None
    label: str = "w"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    @property
    def is_homogeneous(self) -> bool:
        return self.family in ("power", "constant")

    @property
    def degree(self) -> float:
        """Homogeneity degree of power and constant weights."""
        if self.family == "power":
            return float(self.params["alpha"])
        if self.family == "constant":
            return 0.0
        raise DomainError(f"weight family {self.family!r} is not homogeneous")

    def power(self, exponent: float) -> "Weight":
        """x -> w(x)^exponent with the family tag propagated."""
        if self.family == "constant":
            return constant_weight(self.params["value"] ** exponent)
        if self.family == "power":
            return power_weight(self.params["alpha"] * exponent)
        if self.family == "exp_x1":
            return exp_weight(self.params["beta"] * exponent)
        inner = self.func
        return Weight(
            func=lambda x: np.asarray(inner(x), dtype=float) ** exponent,
            family="custom",
            length_scale=self.length_scale,
            label=f"({self.label})^{exponent:g}",
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, **{k: float(v) for k, v in self.params.items()}}


def constant_weight(value: float = 1.0) -> Weight:
    if value <= 0:
        raise ConfigurationError("constant weight must be positive", field="value")
    return Weight(func=lambda x: np.full(np.shape(x)[:-1], float(value)), family="constant",
                  params={"value": float(value)}, label=f"{value:g}")


def power_weight(alpha: float) -> Weight:
    def func(x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore"):
            return r**alpha

    return Weight(func=func, family="power", params={"alpha": float(alpha)}, label=f"|x|^{alpha:g}")


def exp_weight(beta: float = 1.0) -> Weight:
    return Weight(
        func=lambda x: np.exp(beta * x[..., 0]),
        family="exp_x1",
        params={"beta": float(beta)},
        length_scale=1.0 / max(abs(beta), 1e-12),
        label=f"exp({beta:g} x1)",
    )


def conjugate_exponent(p: float) -> float:
    if p <= 1:
        raise DomainError(f"exponent must exceed 1, got {p}")
    return p / (p - 1.0)


def dual_weight(w: Weight, p: float) -> Weight:
    """w^{-p'/p}."""
    if not (1 < p < np.inf):
        raise DomainError(f"dual weight needs 1 < p < infinity, got {p}")
    return w.power(-conjugate_exponent(p) / p)
