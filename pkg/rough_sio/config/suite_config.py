"""
Verification suite configuration
"""
import json
import logging
import os
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from rough_sio.config.documents import validate_document
from rough_sio.config.settings import tolerance as default_tolerance
from rough_sio.errors import ConfigurationError

logger = logging.getLogger(__name__)

SUITE_CONFIG_FILE = os.path.join(os.path.dirname(__file__), "default_suite.json")


class KernelChoice(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    params: Dict[str, Any] = Field(default_factory=dict)
    dimension: int = 2


class RadialChoice(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str
    params: Dict[str, Any] = Field(default_factory=dict)
    sigma: float = 1.0
    h0: Optional[float] = None


class WeightChoice(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: str
    params: Dict[str, Any] = Field(default_factory=dict)


class SuiteConfig(BaseModel):
    """Everything run_all needs; a fixed seed makes the report reproducible"""

    model_config = ConfigDict(extra="forbid")

    kernels: List[KernelChoice]
    radial_factors: List[RadialChoice]
    weights: List[WeightChoice]
    p_values: List[float] = Field(default_factory=lambda: [2.0])
    r: float = 1.25
    sigma: float = 2.0
    eps_list: List[float] = Field(default_factory=lambda: [1.0, 0.25, 0.0625])
    probe_points: List[List[float]] = Field(default_factory=lambda: [[0.0, 0.0], [0.5, 0.0], [0.3, -0.4],
                                                                     [-0.7, 0.2], [1.1, 0.9]])
    grid_resolution: int = 48
    grid_half_width: float = 4.0
    monte_carlo_samples: int = 20000
    identity_points: int = 100
    vector_families: int = 50
    family_size: int = 8
    test_function_count: int = 20
    arm_count: int = 6
    seed: int = 20240611
    tolerances: Dict[str, float] = Field(default_factory=dict)
    strict: bool = False

    @field_validator("tolerances")
    @classmethod
    def _positive_tolerances(cls, v: Dict[str, float]) -> Dict[str, float]:
        for name, value in v.items():
            if value <= 0:
                raise ValueError(f"tolerance {name!r} must be positive")
        return v

    @field_validator("p_values")
    @classmethod
    def _p_range(cls, v: List[float]) -> List[float]:
        if not v or any(p <= 1 for p in v):
            raise ValueError("every p must exceed 1")
        return v

    @field_validator("r", "sigma")
    @classmethod
    def _above_one(cls, v: float) -> float:
        if v <= 1:
            raise ValueError("must exceed 1")
        return v

    @field_validator("eps_list")
    @classmethod
    def _positive_eps(cls, v: List[float]) -> List[float]:
        if not v or any(e <= 0 for e in v):
            raise ValueError("truncation radii must be positive")
        return sorted(v, reverse=True)

    @field_validator("grid_resolution")
    @classmethod
    def _grid_resolution(cls, v: int) -> int:
        if v < 2:
            raise ValueError("grid resolution must be at least 2")
        return v

    def tolerance(self, name: str) -> float:
        """Suite override or the packaged default"""
        if name in self.tolerances:
            return float(self.tolerances[name])
        return default_tolerance(name)


def load_suite_config(path: Optional[str] = None) -> SuiteConfig:
    """Load a suite configuration, falling back to the packaged default"""
    path = path or SUITE_CONFIG_FILE
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigurationError(f"suite config not found: {path}", field="config") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path} is not valid JSON: {e}", field="config") from e
    config = validate_document(SuiteConfig, data)
    logger.info("Loaded suite config from %s (%d kernels, seed %d)", path, len(config.kernels), config.seed)
    return config


def save_suite_config(config: SuiteConfig, path: str) -> bool:
    """Save a suite configuration as JSON"""
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(config.model_dump(), f, indent=2, sort_keys=True)
            f.write("\n")
        return True
    except OSError as e:
        logger.error("Error saving suite config to %s: %s", path, e)
        return False
