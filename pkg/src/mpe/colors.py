"""Color representations and the numeric color operations everything else builds on.

Conversion chain: 8-bit sRGB -> linear RGB -> XYZ (D65, 2 degree observer) -> CIELAB.
Perceptual distance is plain Euclidean distance in CIELAB (CIE76); the more
elaborate CIE94/CIEDE2000 formulas are deliberately not used here.

Dominant-color clustering is a deterministic k-means: farthest-point seeding
anchored at the lexicographically smallest pixel, fixed iteration budget, and
a fixed convergence threshold, so identical input always yields an identical
palette.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "RgbColor",
    "NormalizedRgb",
    "LabColor",
    "WeightedColor",
    "EmptyInput",
    "srgb_to_lab",
    "delta_e",
    "scale_reflective",
    "dominant_colors",
]

_HEX_RE = re.compile(r"^#[0-9A-F]{6}$")


class EmptyInput(ValueError):
    """Raised when an operation receives an empty pixel collection."""


@dataclass(frozen=True, order=True)
class RgbColor:
    """An 8-bit sRGB color. Channels are integers in [0, 255]."""

    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v!r} outside [0, 255]")

    @property
    def hex(self) -> str:
        """Uppercase '#RRGGBB', exactly 7 characters."""
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}"

    @classmethod
    def from_hex(cls, text: str) -> "RgbColor":
        s = text.strip().upper()
        if not _HEX_RE.match(s):
            raise ValueError(f"not a #RRGGBB hex color: {text!r}")
        return cls(int(s[1:3], 16), int(s[3:5], 16), int(s[5:7], 16))

    def to_normalized(self) -> "NormalizedRgb":
        return NormalizedRgb(self.r / 255.0, self.g / 255.0, self.b / 255.0)


def _round_channel(x: float) -> int:
    # Half-away-from-zero; channels are nonnegative so floor(x + 0.5) suffices.
    return int(math.floor(x * 255.0 + 0.5))


@dataclass(frozen=True)
class NormalizedRgb:
    """Regressor output space: real-valued sRGB channels in [0, 1]."""

    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"channel {name}={v!r} outside [0, 1]")

    def to_rgb(self) -> RgbColor:
        """Quantize to 8 bits, rounding half away from zero."""
        return RgbColor(_round_channel(self.r), _round_channel(self.g), _round_channel(self.b))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class LabColor:
    """A point in CIELAB. L in [0, 100] for anything that came from sRGB."""

    L: float
    a: float
    b: float


@dataclass(frozen=True)
class WeightedColor:
    """A palette entry: a color plus the fraction of clustered pixels it covers."""

    color: RgbColor
    weight: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight {self.weight!r} outside [0, 1]")


# --- sRGB -> CIELAB ---------------------------------------------------------

# Linear sRGB -> XYZ for D65 / 2 degree observer (IEC 61966-2-1 primaries).
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = np.array([0.95047, 1.00000, 1.08883])
_LAB_EPS = 216.0 / 24389.0
_LAB_KAPPA = 24389.0 / 27.0


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t > _LAB_EPS, np.cbrt(t), (_LAB_KAPPA * t + 16.0) / 116.0)


def srgb_array_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Vectorized conversion of sRGB values in [0, 1], shape (..., 3), to Lab."""
    linear = _srgb_to_linear(np.asarray(rgb, dtype=np.float64))
    xyz = linear @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE_D65)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def srgb_to_lab(c: RgbColor) -> LabColor:
    """Convert one 8-bit sRGB color to CIELAB (D65, 2 degree observer)."""
    lab = srgb_array_to_lab(np.array([c.r, c.g, c.b], dtype=np.float64) / 255.0)
    return LabColor(float(lab[0]), float(lab[1]), float(lab[2]))


def delta_e(x: LabColor, y: LabColor) -> float:
    """CIE76 color difference: Euclidean distance between two Lab points."""
    return math.sqrt((x.L - y.L) ** 2 + (x.a - y.a) ** 2 + (x.b - y.b) ** 2)


# --- reflective-color scaling -----------------------------------------------

_SCALE_GAIN = 0.4
_SCALE_OFFSET = 0.6


def scale_reflective(c: NormalizedRgb) -> NormalizedRgb:
    """Brighten a predicted reflective color: each channel maps to 0.4*x + 0.6.

    The output range is [0.6, 1.0] per channel, which keeps rendered sparkle
    highlights bright regardless of what the regressor produced.
    """
    return NormalizedRgb(
        _SCALE_GAIN * c.r + _SCALE_OFFSET,
        _SCALE_GAIN * c.g + _SCALE_OFFSET,
        _SCALE_GAIN * c.b + _SCALE_OFFSET,
    )


# --- dominant-color clustering ----------------------------------------------

_KMEANS_MAX_ITER = 100
_KMEANS_SHIFT_TOL = 0.5  # channel units; converged when every centroid moves less
_MERGE_DELTA_E = 1.0

PixelInput = Union[np.ndarray, Sequence[RgbColor], Iterable[RgbColor]]


def _as_pixel_array(pixels: PixelInput) -> np.ndarray:
    if isinstance(pixels, np.ndarray):
        arr = pixels.reshape(-1, 3).astype(np.float64)
    else:
        arr = np.array([(p.r, p.g, p.b) for p in pixels], dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("no pixels to cluster")
    return arr


def _lex_smallest_index(arr: np.ndarray, candidates: np.ndarray) -> int:
    # Smallest (r, g, b) tuple among candidate row indices; ties fall to the
    # earliest index so the result is deterministic.
    sub = arr[candidates]
    order = np.lexsort((candidates, sub[:, 2], sub[:, 1], sub[:, 0]))
    return int(candidates[order[0]])


def _farthest_point_seeds(arr: np.ndarray, k: int) -> np.ndarray:
    """Deterministic seeding: start at the lexicographically smallest pixel,
    then repeatedly take the pixel farthest from its nearest seed."""
    n = arr.shape[0]
    first = _lex_smallest_index(arr, np.arange(n))
    seeds = [arr[first]]
    dist = np.linalg.norm(arr - seeds[0], axis=1)
    while len(seeds) < k:
        far = float(dist.max())
        if far == 0.0:
            break  # fewer distinct colors than k
        candidates = np.flatnonzero(dist == far)
        idx = _lex_smallest_index(arr, candidates)
        seeds.append(arr[idx])
        dist = np.minimum(dist, np.linalg.norm(arr - seeds[-1], axis=1))
    return np.array(seeds)


def dominant_colors(pixels: PixelInput, k: int) -> list[WeightedColor]:
    """Cluster pixels into at most k dominant colors.

    Accepts a sequence of RgbColor or a numpy array reshapeable to (N, 3).
    Returns WeightedColors sorted by descending weight (ties broken by the
    earliest pixel assigned to the cluster); weights sum to 1. Clusters whose
    centroids land within deltaE <= 1 of each other are merged, so the result
    can be shorter than k.

    Raises EmptyInput for an empty pixel collection.
    """
    if not 1 <= k <= 8:
        raise ValueError(f"k={k} outside [1, 8]")
    arr = _as_pixel_array(pixels)
    centroids = _farthest_point_seeds(arr, k)

    assign = np.zeros(arr.shape[0], dtype=np.intp)
    for _ in range(_KMEANS_MAX_ITER):
        d = np.linalg.norm(arr[:, None, :] - centroids[None, :, :], axis=2)
        assign = np.argmin(d, axis=1)  # ties go to the lowest centroid index
        new_centroids = centroids.copy()
        for ci in range(centroids.shape[0]):
            members = assign == ci
            if members.any():
                new_centroids[ci] = arr[members].mean(axis=0)
        shift = np.linalg.norm(new_centroids - centroids, axis=1).max()
        centroids = new_centroids
        if shift < _KMEANS_SHIFT_TOL:
            break

    d = np.linalg.norm(arr[:, None, :] - centroids[None, :, :], axis=2)
    assign = np.argmin(d, axis=1)

    clusters = []  # (centroid, weight, first_index)
    n = arr.shape[0]
    for ci in range(centroids.shape[0]):
        members = np.flatnonzero(assign == ci)
        if members.size == 0:
            continue
        clusters.append((centroids[ci], members.size / n, int(members[0])))
    clusters.sort(key=lambda c: (-c[1], c[2]))

    merged: list[list] = []
    for centroid, weight, first in clusters:
        lab = srgb_array_to_lab(centroid / 255.0)
        for kept in merged:
            if np.linalg.norm(lab - kept[3]) <= _MERGE_DELTA_E:
                total = kept[1] + weight
                kept[0] = (kept[0] * kept[1] + centroid * weight) / total
                kept[1] = total
                kept[2] = min(kept[2], first)
                kept[3] = srgb_array_to_lab(kept[0] / 255.0)
                break
        else:
            merged.append([centroid, weight, first, lab])

    merged.sort(key=lambda c: (-c[1], c[2]))
    total = sum(c[1] for c in merged)
    out = []
    for centroid, weight, _first, _lab in merged:
        color = RgbColor(*(_round_channel(v / 255.0) for v in centroid))
        out.append(WeightedColor(color, weight / total))
    return out
