"""Extracted material properties: product format plus per-shade attributes."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .boxes import BoundingBox
from .colors import RgbColor

# Minimum 8-bit channel of a stored reflective color: the 0.4*x + 0.6 scaling
# guarantees a normalized channel of at least 0.6, i.e. 153/255.
_REFLECTIVE_MIN_CHANNEL = 153


class Format(enum.Enum):
    POWDER = "Powder"
    CREAM = "Cream"
    STICK = "Stick"
    LIQUID = "Liquid"


class FinishType(enum.Enum):
    MATTE = "Matte"
    SHIMMER = "Shimmer"
    METALLIC = "Metallic"
    GLITTER = "Glitter"


class Provenance(enum.Enum):
    PIPELINE = "Pipeline"
    OVERRIDE = "Override"
    GROUND_TRUTH = "GroundTruth"


@dataclass(frozen=True)
class ShadeProperties:
    """One shade of a product: where it was found and how it should render.

    A reflective color exists exactly when the finish is glitter, and it is
    stored post-scaling, so every channel is at least 153 (0.6 normalized).
    """

    region: BoundingBox
    base_color: RgbColor
    finish: FinishType
    reflective_color: Optional[RgbColor] = None

    def __post_init__(self) -> None:
        if self.finish is FinishType.GLITTER:
            if self.reflective_color is None:
                raise ValueError("glitter shade requires a reflective color")
            c = self.reflective_color
            if min(c.r, c.g, c.b) < _REFLECTIVE_MIN_CHANNEL:
                raise ValueError(
                    f"reflective color {c.hex} below the post-scaling floor of "
                    f"{_REFLECTIVE_MIN_CHANNEL} per channel"
                )
        elif self.reflective_color is not None:
            raise ValueError(f"{self.finish.value} shade must not carry a reflective color")

    def to_json_dict(self) -> dict:
        return {
            "region": self.region.to_json_dict(),
            "base_color": self.base_color.hex,
            "finish": self.finish.value,
            "reflective_color": self.reflective_color.hex if self.reflective_color else None,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ShadeProperties":
        reflective = data.get("reflective_color")
        return cls(
            region=BoundingBox.from_json_dict(data["region"]),
            base_color=RgbColor.from_hex(data["base_color"]),
            finish=FinishType(data["finish"]),
            reflective_color=RgbColor.from_hex(reflective) if reflective else None,
        )


@dataclass(frozen=True)
class MaterialProperties:
    """Full extraction result for one product."""

    format: Format
    shades: tuple[ShadeProperties, ...]
    best_image_position: int = 0
    provenance: Provenance = Provenance.PIPELINE

    def __post_init__(self) -> None:
        if not self.shades:
            raise ValueError("a product needs at least one shade")
        if self.best_image_position < 0:
            raise ValueError("best_image_position must be >= 0")
        object.__setattr__(self, "shades", tuple(self.shades))

    def with_provenance(self, provenance: Provenance) -> "MaterialProperties":
        return MaterialProperties(self.format, self.shades, self.best_image_position, provenance)

    def to_json_dict(self) -> dict:
        return {
            "format": self.format.value,
            "best_image_position": self.best_image_position,
            "provenance": self.provenance.value,
            "shades": [s.to_json_dict() for s in self.shades],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MaterialProperties":
        return cls(
            format=Format(data["format"]),
            shades=tuple(ShadeProperties.from_json_dict(s) for s in data["shades"]),
            best_image_position=int(data.get("best_image_position", 0)),
            provenance=Provenance(data.get("provenance", "Pipeline")),
        )
