"""Scripted backend for tests.

Replays fixture answers keyed by image name (crops are keyed by the name the
pipeline assigns, "<image>[<index>]"). Any query the fixture does not cover
raises UnscriptedQuery rather than inventing an answer, so a test that drifts
from its fixture fails loudly.
"""

from __future__ import annotations

import json
import os

from ..boxes import BoundingBox
from ..colors import NormalizedRgb
from ..images import ImageData
from .base import ClassDistribution, PredictorSuite, PreferenceResult, UnscriptedQuery


class ScriptedSuite(PredictorSuite):
    name = "scripted"

    def __init__(
        self,
        preferences: dict[tuple[str, str], tuple[bool, float]] | None = None,
        formats: dict[str, ClassDistribution] | None = None,
        detections: dict[str, list[BoundingBox]] | None = None,
        shade_counts: dict[str, ClassDistribution] | None = None,
        finishes: dict[str, ClassDistribution] | None = None,
        base_colors: dict[str, NormalizedRgb] | None = None,
        reflective_colors: dict[str, NormalizedRgb] | None = None,
    ):
        self._preferences = preferences or {}
        self._formats = formats or {}
        self._detections = detections or {}
        self._shade_counts = shade_counts or {}
        self._finishes = finishes or {}
        self._base_colors = base_colors or {}
        self._reflective_colors = reflective_colors or {}

    @staticmethod
    def _lookup(table: dict, key, op: str):
        if key not in table:
            raise UnscriptedQuery(f"{op} has no scripted answer for {key!r}")
        return table[key]

    def prefer_image(self, candidate: ImageData, reference: ImageData) -> PreferenceResult:
        preferred, confidence = self._lookup(
            self._preferences, (candidate.name, reference.name), "prefer_image"
        )
        return PreferenceResult(preferred=preferred, confidence=confidence)

    def detect_shades(self, image: ImageData) -> list[BoundingBox]:
        return list(self._lookup(self._detections, image.name, "detect_shades"))

    def classify_shade_count(self, image: ImageData) -> ClassDistribution:
        return self._lookup(self._shade_counts, image.name, "classify_shade_count")

    def classify_format(self, image: ImageData, title: str) -> ClassDistribution:
        return self._lookup(self._formats, image.name, "classify_format")

    def classify_finish(self, crop: ImageData) -> ClassDistribution:
        return self._lookup(self._finishes, crop.name, "classify_finish")

    def regress_base_color(self, crop: ImageData) -> NormalizedRgb:
        return self._lookup(self._base_colors, crop.name, "regress_base_color")

    def regress_reflective_color(self, crop: ImageData) -> NormalizedRgb:
        return self._lookup(self._reflective_colors, crop.name, "regress_reflective_color")

    # -- fixture files ---------------------------------------------------------

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ScriptedSuite":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_json_dict(data)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScriptedSuite":
        def rgb(v) -> NormalizedRgb:
            return NormalizedRgb(float(v[0]), float(v[1]), float(v[2]))

        preferences = {
            (p["candidate"], p["reference"]): (bool(p["preferred"]), float(p["confidence"]))
            for p in data.get("preferences", [])
        }
        return cls(
            preferences=preferences,
            formats={k: ClassDistribution(v) for k, v in data.get("formats", {}).items()},
            detections={
                k: [BoundingBox.from_json_dict(b) for b in v]
                for k, v in data.get("detections", {}).items()
            },
            shade_counts={
                k: ClassDistribution(v) for k, v in data.get("shade_counts", {}).items()
            },
            finishes={k: ClassDistribution(v) for k, v in data.get("finishes", {}).items()},
            base_colors={k: rgb(v) for k, v in data.get("base_colors", {}).items()},
            reflective_colors={
                k: rgb(v) for k, v in data.get("reflective_colors", {}).items()
            },
        )
