"""Clothing color extraction from garment segmentation masks.

Segmentations arrive as four per-pixel maps (upper body, lower body, full
body, background) produced by an external model or fixture files; this module
only consumes them. A region's pixels are those whose region channel is the
per-pixel argmax and clears the threshold; dominant colors then come from the
shared clustering in mpe.colors.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .colors import RgbColor, WeightedColor, dominant_colors
from .images import DecodeError, ImageData

_SUM_TOL = 1e-3


class EmptyRegion(Exception):
    """No pixel qualified for the requested garment region."""


class GarmentRegion(enum.Enum):
    UPPER_BODY = "UpperBody"
    LOWER_BODY = "LowerBody"
    FULL_BODY = "FullBody"


# Channel layout of a segmentation: garment channels first, background last,
# so an exact tie between a garment channel and background resolves to the
# garment.
CHANNEL_ORDER = ("UpperBody", "LowerBody", "FullBody", "Background")
_REGION_CHANNEL = {region: CHANNEL_ORDER.index(region.value) for region in GarmentRegion}
BACKGROUND_CHANNEL = CHANNEL_ORDER.index("Background")


@dataclass(frozen=True, eq=False)
class SegmentationMask:
    """Four soft per-pixel maps with shape (4, height, width), values in [0, 1]."""

    channels: np.ndarray

    def __post_init__(self) -> None:
        if self.channels.ndim != 3 or self.channels.shape[0] != 4:
            raise ValueError(f"expected (4, H, W) channels, got {self.channels.shape}")
        if (self.channels < 0).any():
            raise ValueError("mask channels must be nonnegative")
        sums = self.channels.sum(axis=0)
        if (sums <= 0).any():
            raise ValueError("every pixel needs some mass in at least one channel")
        if (sums > 1.0 + _SUM_TOL).any():
            raise ValueError(f"per-pixel channel sums exceed 1 (max {sums.max():.4f})")

    @property
    def height(self) -> int:
        return self.channels.shape[1]

    @property
    def width(self) -> int:
        return self.channels.shape[2]


@dataclass(frozen=True)
class OutfitColorProfile:
    """Dominant colors of one garment region, heaviest first."""

    region: GarmentRegion
    colors: tuple[WeightedColor, ...]
    pixel_count: int

    def __post_init__(self) -> None:
        if not 1 <= len(self.colors) <= 5:
            raise ValueError(f"profile must hold 1..5 colors, got {len(self.colors)}")
        weights = [c.weight for c in self.colors]
        if weights != sorted(weights, reverse=True):
            raise ValueError("profile colors must be sorted by descending weight")
        if self.pixel_count <= 0:
            raise ValueError("pixel_count must be positive")

    def to_json_dict(self) -> dict:
        return {
            "region": self.region.value,
            "pixel_count": self.pixel_count,
            "colors": [{"hex": c.color.hex, "weight": c.weight} for c in self.colors],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OutfitColorProfile":
        return cls(
            region=GarmentRegion(data["region"]),
            colors=tuple(
                WeightedColor(RgbColor.from_hex(c["hex"]), float(c["weight"]))
                for c in data["colors"]
            ),
            pixel_count=int(data["pixel_count"]),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "OutfitColorProfile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def region_mask(mask: SegmentationMask, region: GarmentRegion,
                threshold: float = 0.5) -> np.ndarray:
    """Boolean (H, W) selection of the region's pixels.

    A pixel belongs to the region when its region channel is the per-pixel
    argmax (garment channels win exact ties against background) and is at
    least the threshold.

    Raises EmptyRegion when nothing qualifies.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold {threshold} outside (0, 1)")
    idx = _REGION_CHANNEL[region]
    winner = np.argmax(mask.channels, axis=0)  # first max wins: garment over background
    selected = (winner == idx) & (mask.channels[idx] >= threshold)
    if not selected.any():
        raise EmptyRegion(f"no pixels for {region.value} at threshold {threshold}")
    return selected


def outfit_colors(
    image: ImageData,
    mask: SegmentationMask,
    region: GarmentRegion,
    k: int = 4,
    threshold: float = 0.5,
) -> OutfitColorProfile:
    """Top k (3..5) dominant colors of the garment region in the image."""
    if not 3 <= k <= 5:
        raise ValueError(f"k={k} outside [3, 5]")
    if (mask.height, mask.width) != (image.height, image.width):
        raise ValueError(
            f"mask {mask.width}x{mask.height} does not match image "
            f"{image.width}x{image.height}"
        )
    selected = region_mask(mask, region, threshold)
    pixels = image.pixels[selected]
    colors = dominant_colors(pixels, k=k)
    return OutfitColorProfile(region=region, colors=tuple(colors),
                              pixel_count=int(selected.sum()))


# -- mask files ---------------------------------------------------------------


def load_mask(path: str | os.PathLike) -> SegmentationMask:
    """Read a segmentation from disk.

    Two layouts are accepted:
      - a 4-channel image, channels in the order upper, lower, full, background
      - a single-channel image holding the four planes stacked vertically in
        that same order (so its height is 4x the mask height)
    """
    try:
        with Image.open(path) as img:
            if len(img.getbands()) == 4:
                arr = np.asarray(img, dtype=np.float64) / 255.0
                channels = np.stack([arr[:, :, i] for i in range(4)])
            elif len(img.getbands()) == 1:
                arr = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
                if arr.shape[0] % 4 != 0:
                    raise ValueError(
                        f"stacked mask height {arr.shape[0]} is not a multiple of 4"
                    )
                h = arr.shape[0] // 4
                channels = np.stack([arr[i * h:(i + 1) * h] for i in range(4)])
            else:
                raise ValueError(
                    f"mask must have 1 (stacked) or 4 channels, got {len(img.getbands())}"
                )
    except (OSError, UnidentifiedImageError) as exc:
        raise DecodeError(f"cannot decode mask {path}: {exc}") from exc
    return SegmentationMask(channels=channels)


def save_mask(mask: SegmentationMask, path: str | os.PathLike) -> None:
    """Write a segmentation as a 4-channel image."""
    arr = np.clip(mask.channels * 255.0, 0, 255).astype(np.uint8)
    stacked = np.stack([arr[0], arr[1], arr[2], arr[3]], axis=-1)
    Image.fromarray(stacked, mode="RGBA").save(path)
