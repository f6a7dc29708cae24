"""Image decoding and pixel access.

Images are RGB uint8 arrays wrapped with a stable name so that scripted
predictor backends can key their fixtures on it. Decoding goes through
Pillow; anything Pillow rejects surfaces as DecodeError.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from PIL import Image, UnidentifiedImageError

from .boxes import BoundingBox


class DecodeError(Exception):
    """An image could not be decoded."""


@dataclass(frozen=True, eq=False)
class ImageData:
    """A decoded RGB image plus the name it is addressed by.

    path is set when the pixels came straight from a file, so adapters that
    hand images to external processes can pass the original file through.
    """

    name: str
    pixels: np.ndarray = field(repr=False)
    path: str | None = None

    def __post_init__(self) -> None:
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError(f"expected HxWx3 pixel array, got shape {self.pixels.shape}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def load(cls, path: str | os.PathLike, name: str | None = None) -> "ImageData":
        try:
            with Image.open(path) as img:
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            raise DecodeError(f"cannot decode image {path}: {exc}") from exc
        return cls(name=name if name is not None else str(path), pixels=arr, path=str(path))

    def crop(self, box: BoundingBox, name: str | None = None) -> "ImageData":
        """Axis-aligned crop of a normalized box; always at least 1x1 pixels."""
        x0 = int(round(box.left * self.width))
        x1 = int(round(box.right * self.width))
        y0 = int(round(box.top * self.height))
        y1 = int(round(box.bottom * self.height))
        x1 = min(max(x1, x0 + 1), self.width)
        y1 = min(max(y1, y0 + 1), self.height)
        x0 = min(x0, x1 - 1)
        y0 = min(y0, y1 - 1)
        return ImageData(
            name=name if name is not None else f"{self.name}#crop",
            pixels=self.pixels[y0:y1, x0:x1],
        )


class ImageLoader(Protocol):
    """Resolves a catalog image URI to decoded pixels."""

    def load(self, uri: str) -> ImageData: ...


class DirectoryImages:
    """Loads image URIs as paths relative to a base directory.

    Remote URLs are rejected: the engine never downloads at extraction time.
    """

    def __init__(self, base_dir: str | os.PathLike):
        self.base_dir = Path(base_dir)
        self._cache: dict[str, ImageData] = {}

    def load(self, uri: str) -> ImageData:
        if uri.startswith(("http://", "https://")):
            raise DecodeError(f"remote image URIs are not fetched: {uri}")
        if uri in self._cache:
            return self._cache[uri]
        path = Path(uri)
        if uri.startswith("file://"):
            path = Path(uri[len("file://"):])
        if not path.is_absolute():
            path = self.base_dir / path
        image = ImageData.load(path, name=uri)
        self._cache[uri] = image
        return image


class MemoryImages:
    """In-memory URI to image mapping, for fixtures and tests."""

    def __init__(self, images: dict[str, ImageData] | None = None):
        self._images = dict(images or {})

    def add(self, uri: str, image: ImageData) -> None:
        self._images[uri] = image

    def load(self, uri: str) -> ImageData:
        if uri not in self._images:
            raise DecodeError(f"no image registered for {uri}")
        return self._images[uri]
