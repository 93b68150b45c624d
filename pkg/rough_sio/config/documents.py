"""
JSON documents for kernels, weights, functions, fields and probe points.

Documents are validated with pydantic and converted to domain objects.
Validation problems surface as ConfigurationError naming the offending
field, e.g. ``cells.2.angle_to``.
"""
import json
import logging
import os
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from rough_sio.config.catalogue import build_field, build_kernel, build_radial, build_test_function, build_weight
from rough_sio.errors import ConfigurationError
from rough_sio.models.analytic import LipschitzField, TestFunction
from rough_sio.models.grid import GridFunction
from rough_sio.models.kernel import AngularKernel, KernelSpec
from rough_sio.models.weight import Weight

logger = logging.getLogger(__name__)


class ComplexValue(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: float
    im: float = 0.0


class CellModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    angle_from: float
    angle_to: float
    value: Union[float, ComplexValue]

    def as_tuple(self):
        value = self.value
        if isinstance(value, ComplexValue):
            value = complex(value.re, value.im)
        return self.angle_from, self.angle_to, value


class RadialModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str = "constant"
    params: Dict[str, Any] = Field(default_factory=dict)
    sigma: float = 1.0
    epsilon: float = 0.0
    h0: Optional[float] = None

    @field_validator("sigma")
    @classmethod
    def _sigma_at_least_one(cls, v: float) -> float:
        if v < 1:
            raise ValueError("sigma must be >= 1")
        return v

    @field_validator("epsilon")
    @classmethod
    def _epsilon_nonnegative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("epsilon must be >= 0")
        return v


class KernelDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = 2
    cells: Optional[List[CellModel]] = None
    callable_id: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    resolution: Optional[int] = None
    radial: RadialModel = Field(default_factory=RadialModel)

    @field_validator("dimension")
    @classmethod
    def _supported_dimension(cls, v: int) -> int:
        if v not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        return v

    @model_validator(mode="after")
    def _one_representation(self) -> "KernelDocument":
        if (self.cells is None) == (self.callable_id is None):
            raise ValueError("exactly one of 'cells' and 'callable_id' is required")
        if self.cells is not None and self.dimension != 2:
            raise ValueError("cell lists describe n = 2 kernels")
        return self

    def build(self) -> KernelSpec:
        if self.cells is not None:
            if not self.cells:
                raise ConfigurationError("cell list is empty", field="cells")
            omega = AngularKernel.from_arcs([c.as_tuple() for c in self.cells], label="cells")
        else:
            omega = build_kernel(self.callable_id, self.params, self.dimension, self.resolution)
        r = self.radial
        radial = build_radial(r.kind, r.params, sigma=r.sigma, epsilon=r.epsilon, h0=r.h0)
        return KernelSpec(omega=omega, radial=radial)


class WeightDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["constant", "power", "exp_x1"]
    value: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def build(self) -> Weight:
        params = {k: v for k, v in (("value", self.value), ("alpha", self.alpha), ("beta", self.beta)) if v is not None}
        return build_weight(self.family, params)


class AnalyticFunctionDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["analytic"] = "analytic"
    family: str
    center: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    width: Optional[float] = None
    amplitude: float = 1.0
    inner: Optional[float] = None

    def build(self) -> TestFunction:
        return build_test_function(self.family, center=self.center, width=self.width, amplitude=self.amplitude,
                                   inner=self.inner, dimension=len(self.center))


class ComplexGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: List[Any]
    im: List[Any]


class GridFunctionDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["grid"]
    corner: List[float]
    sides: List[float]
    resolution: List[int]
    values: Union[List[Any], ComplexGrid]

    def build(self) -> GridFunction:
        values = self.values
        if isinstance(values, ComplexGrid):
            array = np.asarray(values.re, dtype=float) + 1j * np.asarray(values.im, dtype=float)
        else:
            array = np.asarray(values, dtype=float)
        if list(array.shape) != list(self.resolution):
            raise ConfigurationError(f"value array has shape {array.shape}, expected {tuple(self.resolution)}",
                                     field="values")
        return GridFunction(corner=np.asarray(self.corner, dtype=float), sides=np.asarray(self.sides, dtype=float),
                            values=array)


class FieldDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["constant", "linear", "sinusoid"]
    vector: Optional[List[float]] = None
    amplitude: float = 1.0
    offset: float = 0.0

    def build(self) -> LipschitzField:
        return build_field(self.kind, vector=self.vector, amplitude=self.amplitude, offset=self.offset)


class PointsDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    points: List[List[float]]

    @field_validator("points")
    @classmethod
    def _consistent(cls, v: List[List[float]]) -> List[List[float]]:
        if not v:
            raise ValueError("at least one point is required")
        if len({len(p) for p in v}) != 1:
            raise ValueError("all points need the same dimension")
        return v


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ()))


def validate_document(model: type, data: Any):
    """Validate ``data`` against a document model, mapping errors to ConfigurationError"""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigurationError(first.get("msg", "invalid value"), field=_field_path(first) or None) from e


def read_json(path: str) -> Any:
    """Read a JSON document from disk"""
    if not os.path.exists(path):
        raise ConfigurationError(f"file not found: {path}", field="path")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path} is not valid JSON: {e}", field="path") from e


def write_json(path: str, data: Any) -> None:
    """Write a JSON document with stable key order"""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def parse_kernel(data: Dict[str, Any]) -> KernelSpec:
    return validate_document(KernelDocument, data).build()


def parse_weight(data: Dict[str, Any]) -> Weight:
    return validate_document(WeightDocument, data).build()


def parse_function(data: Dict[str, Any]) -> Union[TestFunction, GridFunction]:
    kind = data.get("kind", "analytic") if isinstance(data, dict) else None
    if kind == "grid":
        return validate_document(GridFunctionDocument, data).build()
    return validate_document(AnalyticFunctionDocument, data).build()


def parse_field(data: Dict[str, Any]) -> LipschitzField:
    return validate_document(FieldDocument, data).build()


def parse_points(data: Any) -> np.ndarray:
    if isinstance(data, list):
        data = {"points": data}
    return np.asarray(validate_document(PointsDocument, data).points, dtype=float)


def load_kernel(path: str) -> KernelSpec:
    """Load a kernel document (Omega plus radial factor)"""
    spec = parse_kernel(read_json(path))
    logger.info("Loaded kernel %s with radial factor %s from %s", spec.omega.label, spec.radial.label, path)
    return spec


def load_weight(path: str) -> Weight:
    return parse_weight(read_json(path))


def load_function(path: str) -> Union[TestFunction, GridFunction]:
    return parse_function(read_json(path))


def load_field(path: str) -> LipschitzField:
    return parse_field(read_json(path))


def load_points(path: str) -> np.ndarray:
    return parse_points(read_json(path))
