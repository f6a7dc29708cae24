"""Material property extraction engine for makeup catalogs.

Extracts renderable attributes (format, per-shade base color, finish type,
reflective color) from product records through a staged pipeline of pluggable
predictors, pulls dominant colors out of garment segmentations, matches
products by perceptual color distance, and scores every stage of the pipeline.
"""

__version__ = "0.1.0"

from .colors import (
    LabColor,
    NormalizedRgb,
    RgbColor,
    WeightedColor,
    delta_e,
    dominant_colors,
    scale_reflective,
    srgb_to_lab,
)

__all__ = [
    "LabColor",
    "NormalizedRgb",
    "RgbColor",
    "WeightedColor",
    "delta_e",
    "dominant_colors",
    "scale_reflective",
    "srgb_to_lab",
    "__version__",
]
