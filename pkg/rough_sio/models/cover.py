"""
Origin-centred rectangles, their translate/dilate families and stratified covers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from rough_sio.errors import ConfigurationError, DomainError


def rotation(angle: float) -> np.ndarray:
    """Rows are the rotated axes e1, e2 for an n = 2 orientation angle."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]])


def frame_from_axis(axis: Sequence[float]) -> np.ndarray:
    """Orthonormal frame (rows) whose first row is ``axis`` (n = 3)."""
    e1 = np.asarray(axis, dtype=float)
    e1 = e1 / np.linalg.norm(e1)
    helper = np.array([1.0, 0.0, 0.0]) if abs(e1[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e2 = np.cross(e1, helper)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(e1, e2)
    return np.stack([e1, e2, e3])


@dataclass(frozen=True, eq=False)
class Rectangle:
    """Origin-centred box with orthonormal frame rows and half-extents along them."""

    frame: np.ndarray
    half_extents: np.ndarray
    m: int = 0
    k: int = 0

    def __post_init__(self):
        if np.any(np.asarray(self.half_extents) <= 0):
            raise DomainError("rectangle half-extents must be positive")

    @classmethod
    def planar(cls, angle: float, half_major: float, half_minor: float, m: int = 0, k: int = 0) -> "Rectangle":
        return cls(frame=rotation(angle), half_extents=np.array([half_major, half_minor], dtype=float), m=m, k=k)

    @classmethod
    def axis_aligned(cls, half_extents: Sequence[float], m: int = 0, k: int = 0) -> "Rectangle":
        half = np.asarray(half_extents, dtype=float)
        return cls(frame=np.eye(half.size), half_extents=half, m=m, k=k)

    @property
    def dimension(self) -> int:
        return int(self.half_extents.size)

    @property
    def angle(self) -> float:
        """Orientation of the first axis (n = 2)."""
        return math.atan2(self.frame[0, 1], self.frame[0, 0])

    @property
    def major_axis_angle(self) -> float:
        """Angle in [0, pi) of the longest axis (n = 2)."""
        axis = int(np.argmax(self.half_extents))
        return math.atan2(self.frame[axis, 1], self.frame[axis, 0]) % math.pi

    @property
    def volume(self) -> float:
        return float(2.0**self.dimension * np.prod(self.half_extents))

    @property
    def longest_half_extent(self) -> float:
        return float(np.max(self.half_extents))

    def scaled(self, factor: float) -> "Rectangle":
        if factor <= 0:
            raise DomainError("dilation factor must be positive")
        return replace(self, half_extents=self.half_extents * factor)

    def local(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.frame.T

    def contains(self, points: np.ndarray, guard: float = 0.0) -> np.ndarray:
        """Closed membership; ``guard`` enlarges every half-extent relatively."""
        coords = np.abs(self.local(points))
        return np.all(coords <= self.half_extents * (1.0 + guard), axis=-1)

    def radial_extent(self, directions: np.ndarray) -> np.ndarray:
        """Distance from the origin to the boundary along unit directions."""
        coords = np.abs(self.local(directions))
        with np.errstate(divide="ignore"):
            ratios = np.where(coords > 0, self.half_extents / np.where(coords > 0, coords, 1.0), np.inf)
        return ratios.min(axis=-1)

    def corner_angles(self) -> List[float]:
        """Directions (n = 2) where the radial extent has a kink."""
        a, b = self.half_extents
        base = self.angle
        phi = math.atan2(b, a)
        return [base + phi, base + math.pi - phi, base + math.pi + phi, base - phi]

    def corners(self) -> np.ndarray:
        """Closed corner polyline (n = 2)."""
        a, b = self.half_extents
        local = np.array([[a, b], [-a, b], [-a, -b], [a, -b], [a, b]])
        return local @ self.frame

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"m": self.m, "k": self.k, "half_extents": [float(v) for v in self.half_extents]}
        if self.dimension == 2:
            data["angle"] = self.angle
        else:
            data["frame"] = [[float(v) for v in row] for row in self.frame]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Rectangle":
        try:
            half = np.asarray(data["half_extents"], dtype=float)
            if "angle" in data:
                frame = rotation(float(data["angle"]))
            else:
                frame = np.asarray(data["frame"], dtype=float)
            return cls(frame=frame, half_extents=half, m=int(data.get("m", 0)), k=int(data.get("k", 0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"invalid rectangle entry: {e}", field="rectangles") from e


@dataclass(frozen=True, eq=False)
class Region:
    """A translate of a dilate: {center + scale * y : y in base}."""

    base: Rectangle
    center: np.ndarray
    scale: float = 1.0

    @property
    def dimension(self) -> int:
        return self.base.dimension

    @property
    def volume(self) -> float:
        return self.base.volume * self.scale**self.dimension

    @property
    def half_extents(self) -> np.ndarray:
        return self.base.half_extents * self.scale

    @property
    def frame(self) -> np.ndarray:
        return self.base.frame

    def scaled_about_origin(self, factor: float) -> "Region":
        return Region(base=self.base, center=np.asarray(self.center) * factor, scale=self.scale * factor)

    @classmethod
    def cube(cls, center: Sequence[float], half_side: float) -> "Region":
        center = np.asarray(center, dtype=float)
        base = Rectangle.axis_aligned(np.ones(center.size))
        return cls(base=base, center=center, scale=float(half_side))


@dataclass(frozen=True, eq=False)
class RectangleFamily:
    """Sampled translates and dilates B(R) of a base rectangle.

    Offsets are given in units of the base half-extents along the base frame.
    """

    base: Rectangle
    offsets: Tuple[Tuple[float, ...], ...]
    scales: Tuple[float, ...]

    def __post_init__(self):
        if any(s <= 0 for s in self.scales):
            raise DomainError("family scale factors must be positive")

    @classmethod
    def default(cls, base: Rectangle, grid: int = 5, reach: float = 4.0, j_min: int = -8, j_max: int = 8) -> "RectangleFamily":
        ticks = np.linspace(-reach, reach, grid)
        mesh = np.meshgrid(*([ticks] * base.dimension), indexing="ij")
        offsets = tuple(tuple(float(v) for v in row) for row in np.stack([g.ravel() for g in mesh], axis=-1))
        return cls(base=base, offsets=offsets, scales=tuple(2.0**j for j in range(j_min, j_max + 1)))

    def regions(self) -> Iterator[Region]:
        for scale in self.scales:
            for offset in self.offsets:
                local = np.asarray(offset) * self.base.half_extents * scale
                yield Region(base=self.base, center=local @ self.base.frame, scale=scale)

    def __len__(self) -> int:
        return len(self.offsets) * len(self.scales)


@dataclass(frozen=True, eq=False)
class StratifiedCover:
    """Rectangles R_{m,k} grouped by stratum with the achieved constants."""

    rectangles: Dict[int, List[Rectangle]]
    dimension: int = 2
    stratum_constants: Dict[int, float] = field(default_factory=dict)
    comparability: float = 0.0
    cap_ratio: float = 0.0
    exhaustive: bool = True
    label: str = "cover"

    @property
    def global_constant(self) -> float:
        return max(self.stratum_constants.values(), default=0.0)

    def all_rectangles(self) -> List[Rectangle]:
        return [rect for m in sorted(self.rectangles) for rect in self.rectangles[m]]

    def total_volume(self) -> float:
        return float(sum(rect.volume for rect in self.all_rectangles()))

    def drop_rectangle(self, m: int, k: int) -> "StratifiedCover":
        """Copy without R_{m,k} (negative control for coverage checks)."""
        rects = {level: [r for r in items if not (level == m and r.k == k)] for level, items in self.rectangles.items()}
        return replace(self, rectangles=rects, label=f"{self.label}-minus-{m}-{k}")

    def scaled(self, factor: float) -> "StratifiedCover":
        rects = {m: [r.scaled(factor) for r in items] for m, items in self.rectangles.items()}
        return replace(self, rectangles=rects)

    def to_dict(self) -> Dict[str, Any]:
        """Convert cover to its JSON document form"""
        return {
            "label": self.label,
            "dimension": self.dimension,
            "comparability": self.comparability,
            "cap_ratio": self.cap_ratio,
            "exhaustive": self.exhaustive,
            "global_constant": self.global_constant,
            "stratum_constants": {str(m): c for m, c in sorted(self.stratum_constants.items())},
            "rectangles": [rect.to_dict() for rect in self.all_rectangles()],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StratifiedCover":
        """Create cover from its JSON document form"""
        entries = data.get("rectangles")
        if not isinstance(entries, list) or not entries:
            raise ConfigurationError("cover needs a nonempty rectangle list", field="rectangles")
        rects: Dict[int, List[Rectangle]] = {}
        for entry in entries:
            rect = Rectangle.from_dict(entry)
            rects.setdefault(rect.m, []).append(rect)
        return cls(
            rectangles=rects,
            dimension=int(data.get("dimension", 2)),
            stratum_constants={int(m): float(c) for m, c in data.get("stratum_constants", {}).items()},
            comparability=float(data.get("comparability", 0.0)),
            cap_ratio=float(data.get("cap_ratio", 0.0)),
            exhaustive=bool(data.get("exhaustive", False)),
            label=str(data.get("label", "cover")),
        )
