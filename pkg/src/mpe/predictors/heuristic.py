"""Classical reference backend.

Runs the whole pipeline with zero model weights: shade detection is
background flood suppression plus connected-component blobs, finish type is a
luminance-variance band check, colors come from dominant-color clustering and
bright-pixel statistics. All thresholds live in HeuristicConfig and were
calibrated on the synthetic fixtures in the test suite. The point is a
deterministic, dependency-free stand-in with sane behavior, not a competitor
to trained models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..boxes import BoundingBox
from ..colors import NormalizedRgb, dominant_colors
from ..images import ImageData
from .base import (
    FORMAT_LABELS,
    SHADE_COUNT_MULTI,
    SHADE_COUNT_SINGLE,
    ClassDistribution,
    PredictorSuite,
    PreferenceResult,
)

_LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

# Catalog prior over formats: powder is by far the most common, then stick,
# liquid, and cream.
_FORMAT_PRIOR = {"Powder": 0.55, "Stick": 0.20, "Liquid": 0.15, "Cream": 0.10}

_FORMAT_CUES = {
    "liquid": "Liquid",
    "stick": "Stick",
    "pencil": "Stick",
    "crayon": "Stick",
    "cream": "Cream",
    "creme": "Cream",
    "powder": "Powder",
    "palette": "Powder",
    "pressed": "Powder",
    "baked": "Powder",
}


@dataclass(frozen=True)
class HeuristicConfig:
    background_tolerance: float = 40.0  # channel distance treated as background
    border_fraction: float = 0.02       # frame width used to sample the background color
    min_blob_fraction: float = 0.002    # components smaller than this are noise
    matte_sigma_max: float = 8.0        # luminance stddev below: matte
    shimmer_sigma_max: float = 25.0     # below: shimmer; above: metallic/glitter band
    glitter_bright_luma: float = 220.0  # luminance counted as sparkle
    glitter_bright_min: float = 0.002   # sparkle fraction inside (min, max): glitter
    glitter_bright_max: float = 0.35
    base_color_clusters: int = 3
    reflective_fraction: float = 0.10   # brightest fraction averaged for reflective color
    count_logistic_slope: float = 1.5   # single/multi decision sharpness


class HeuristicSuite(PredictorSuite):
    name = "heuristic"

    def __init__(self, config: HeuristicConfig | None = None):
        self.config = config or HeuristicConfig()

    # -- detection -------------------------------------------------------

    def detect_shades(self, image: ImageData) -> list[BoundingBox]:
        cfg = self.config
        pixels = image.pixels.astype(np.float64)
        h, w = pixels.shape[:2]
        bw = max(1, round(min(h, w) * cfg.border_fraction))

        border = np.concatenate([
            pixels[:bw].reshape(-1, 3),
            pixels[-bw:].reshape(-1, 3),
            pixels[:, :bw].reshape(-1, 3),
            pixels[:, -bw:].reshape(-1, 3),
        ])
        bg_color = np.median(border, axis=0)

        near_bg = np.linalg.norm(pixels - bg_color, axis=2) <= cfg.background_tolerance
        # Flood from the border: only background-colored regions connected to
        # the frame count as background, so swatches that happen to match the
        # border color survive.
        labels, _ = ndimage.label(near_bg, structure=np.ones((3, 3), dtype=int))
        border_labels = np.unique(np.concatenate([
            labels[:bw].ravel(), labels[-bw:].ravel(),
            labels[:, :bw].ravel(), labels[:, -bw:].ravel(),
        ]))
        background = near_bg & np.isin(labels, border_labels[border_labels > 0])
        foreground = ~background

        comp, n_comp = ndimage.label(foreground, structure=np.ones((3, 3), dtype=int))
        if n_comp == 0:
            return []
        min_area = cfg.min_blob_fraction * h * w
        boxes = []
        slices = ndimage.find_objects(comp)
        for idx, sl in enumerate(slices, start=1):
            if sl is None:
                continue
            area = int((comp[sl] == idx).sum())
            if area < min_area:
                continue
            y0, y1 = sl[0].start, sl[0].stop
            x0, x1 = sl[1].start, sl[1].stop
            fill = area / ((y1 - y0) * (x1 - x0))
            boxes.append(BoundingBox(
                cx=(x0 + x1) / (2 * w),
                cy=(y0 + y1) / (2 * h),
                w=(x1 - x0) / w,
                h=(y1 - y0) / h,
                confidence=min(1.0, fill),
            ))
        boxes.sort(key=lambda b: (-b.confidence, b.cy, b.cx))
        return boxes

    # -- image preference --------------------------------------------------

    def prefer_image(self, candidate: ImageData, reference: ImageData) -> PreferenceResult:
        cand = len(self.detect_shades(candidate))
        ref = len(self.detect_shades(reference))
        if cand > ref:
            return PreferenceResult(preferred=True, confidence=1.0 - ref / cand)
        return PreferenceResult(preferred=False, confidence=0.0)

    # -- classification ------------------------------------------------------

    def classify_shade_count(self, image: ImageData) -> ClassDistribution:
        count = len(self.detect_shades(image))
        p_single = 1.0 / (1.0 + math.exp(self.config.count_logistic_slope * (count - 1.5)))
        return ClassDistribution.binary(SHADE_COUNT_SINGLE, p_single, SHADE_COUNT_MULTI)

    def classify_format(self, image: ImageData, title: str) -> ClassDistribution:
        chosen = None
        for token in title.lower().replace("-", " ").split():
            token = token.strip(".,;:()[]!?\"'")
            if token in _FORMAT_CUES:
                chosen = _FORMAT_CUES[token]
                break
        if chosen is None:
            return ClassDistribution(dict(_FORMAT_PRIOR))
        rest_total = sum(p for f, p in _FORMAT_PRIOR.items() if f != chosen)
        probs = {}
        for fmt in FORMAT_LABELS:
            if fmt == chosen:
                probs[fmt] = 0.7
            else:
                probs[fmt] = 0.3 * _FORMAT_PRIOR[fmt] / rest_total
        return ClassDistribution(probs)

    def classify_finish(self, crop: ImageData) -> ClassDistribution:
        cfg = self.config
        luma = crop.pixels.astype(np.float64) @ _LUMA_WEIGHTS
        sigma = float(luma.std())
        bright_frac = float((luma >= cfg.glitter_bright_luma).mean())
        if sigma < cfg.matte_sigma_max:
            chosen = "Matte"
        elif sigma < cfg.shimmer_sigma_max:
            chosen = "Shimmer"
        elif cfg.glitter_bright_min <= bright_frac <= cfg.glitter_bright_max:
            chosen = "Glitter"
        else:
            chosen = "Metallic"
        share = 0.25 / 3
        return ClassDistribution(
            {f: 0.75 if f == chosen else share for f in ("Matte", "Shimmer", "Metallic", "Glitter")}
        )

    # -- color regression ------------------------------------------------------

    def regress_base_color(self, crop: ImageData) -> NormalizedRgb:
        palette = dominant_colors(crop.pixels, k=self.config.base_color_clusters)
        top = palette[0].color
        return NormalizedRgb(top.r / 255.0, top.g / 255.0, top.b / 255.0)

    def regress_reflective_color(self, crop: ImageData) -> NormalizedRgb:
        pixels = crop.pixels.reshape(-1, 3).astype(np.float64)
        luma = pixels @ _LUMA_WEIGHTS
        take = max(1, round(len(pixels) * self.config.reflective_fraction))
        order = np.argsort(-luma, kind="stable")
        bright = pixels[order[:take]]
        mean = bright.mean(axis=0) / 255.0
        return NormalizedRgb(float(mean[0]), float(mean[1]), float(mean[2]))
