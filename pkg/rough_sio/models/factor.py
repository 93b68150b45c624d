"""
Nonnegative kernel factors H(x, y) for the maximal operators and the
rectangle condition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np

from rough_sio.errors import ConfigurationError
from rough_sio.models.kernel import AngularKernel, RadialFactor

PairFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class KernelFactor:
    """H(x, y) >= 0.

    kind "constant": H = value; "radial": H = |h(|y|)|; "angular": H = |Phi(y/|y|)|
    (Phi an AngularKernel); "custom": H = func(x, y), possibly depending on x.
    """

    kind: str
    value: float = 1.0
    radial: Optional[RadialFactor] = None
    angular: Optional[AngularKernel] = None
    func: Optional[PairFunction] = None
    label: str = "H"

    def __post_init__(self):
        required = {"constant": None, "radial": "radial", "angular": "angular", "custom": "func"}
        if self.kind not in required:
            raise ConfigurationError(f"unknown factor kind {self.kind!r}", field="kind")
        attr = required[self.kind]
        if attr is not None and getattr(self, attr) is None:
            raise ConfigurationError(f"{self.kind} factor needs {attr}", field=attr)

    @classmethod
    def constant(cls, value: float = 1.0) -> "KernelFactor":
        return cls(kind="constant", value=float(value), label=f"{value:g}")

    @classmethod
    def from_radial(cls, h: RadialFactor) -> "KernelFactor":
        return cls(kind="radial", radial=h, label=f"|{h.label}|")

    @classmethod
    def from_angular(cls, kernel: AngularKernel) -> "KernelFactor":
        return cls(kind="angular", angular=kernel, label=f"|{kernel.label}|")

    @classmethod
    def custom(cls, func: PairFunction, label: str = "H") -> "KernelFactor":
        return cls(kind="custom", func=func, label=label)

    @property
    def translation_invariant(self) -> bool:
        return self.kind != "custom"

    def of_offset(self, y: np.ndarray) -> np.ndarray:
        """H(., y) for translation-invariant factors; H(0) is taken as 0 for angular factors."""
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            return np.full(y.shape[:-1], self.value)
        r = np.linalg.norm(y, axis=-1)
        if self.kind == "radial":
            out = np.zeros(r.shape)
            positive = r > 0
            out[positive] = np.abs(np.asarray(self.radial(r[positive])))
            return out
        if self.kind == "angular":
            out = np.zeros(r.shape)
            positive = r > 0
            out[positive] = np.abs(self.angular.evaluate(y[positive]))
            return out
        raise ConfigurationError("custom factors depend on x; use __call__", field="kind")

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "custom":
            return np.asarray(self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float)), dtype=float)
        return self.of_offset(y)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "label": self.label}
        if self.kind == "constant":
            data["value"] = self.value
        elif self.kind == "radial":
            data["radial"] = self.radial.to_dict()
        elif self.kind == "angular":
            data["angular"] = self.angular.to_dict()
        return data
