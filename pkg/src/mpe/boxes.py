"""Normalized bounding boxes for shade regions."""

from __future__ import annotations

from dataclasses import dataclass

_EDGE_TOL = 1e-6


@dataclass(frozen=True)
class BoundingBox:
    """A detection region in normalized image coordinates.

    (cx, cy) is the box center, w/h the full extent, all relative to the image
    dimensions, so the box must fit inside the unit square. confidence is the
    detector's score in [0, 1].
    """

    cx: float
    cy: float
    w: float
    h: float
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive extent, got w={self.w}, h={self.h}")
        for edge in (self.cx - self.w / 2, self.cy - self.h / 2):
            if edge < -_EDGE_TOL:
                raise ValueError(f"box leaves the unit square: {self}")
        for edge in (self.cx + self.w / 2, self.cy + self.h / 2):
            if edge > 1 + _EDGE_TOL:
                raise ValueError(f"box leaves the unit square: {self}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def left(self) -> float:
        return max(0.0, self.cx - self.w / 2)

    @property
    def top(self) -> float:
        return max(0.0, self.cy - self.h / 2)

    @property
    def right(self) -> float:
        return min(1.0, self.cx + self.w / 2)

    @property
    def bottom(self) -> float:
        return min(1.0, self.cy + self.h / 2)

    @property
    def area(self) -> float:
        return (self.right - self.left) * (self.bottom - self.top)

    def shrunk(self, fraction: float) -> "BoundingBox":
        """Box with each side pulled in by `fraction` of its extent."""
        if not 0.0 <= fraction < 0.5:
            raise ValueError(f"shrink fraction {fraction} outside [0, 0.5)")
        return BoundingBox(
            self.cx, self.cy, self.w * (1 - 2 * fraction), self.h * (1 - 2 * fraction),
            self.confidence,
        )

    def to_json_dict(self) -> dict:
        return {
            "cx": self.cx, "cy": self.cy, "w": self.w, "h": self.h,
            "confidence": self.confidence,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BoundingBox":
        return cls(
            float(data["cx"]), float(data["cy"]), float(data["w"]), float(data["h"]),
            float(data.get("confidence", 1.0)),
        )


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two normalized boxes."""
    ix = max(0.0, min(a.right, b.right) - max(a.left, b.left))
    iy = max(0.0, min(a.bottom, b.bottom) - max(a.top, b.top))
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union
