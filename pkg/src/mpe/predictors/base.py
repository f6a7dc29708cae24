"""Predictor contracts.

A PredictorSuite bundles the seven predictions the extraction pipeline needs:
pairwise image preference, product format, shade region detection, the binary
single/multi shade count, per-crop finish type, and the two color regressors.
Every backend, whether the in-repo heuristic, a scripted test fixture, or an
external trained model behind the adapter protocol, satisfies the same
contracts and must be deterministic for fixed inputs and configuration.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Mapping

from ..boxes import BoundingBox
from ..colors import NormalizedRgb
from ..images import ImageData
from ..properties import FinishType, Format

_PROB_SUM_TOL = 1e-6

SHADE_COUNT_SINGLE = "Single"
SHADE_COUNT_MULTI = "Multi"
SHADE_COUNT_LABELS = (SHADE_COUNT_SINGLE, SHADE_COUNT_MULTI)
FORMAT_LABELS = tuple(f.value for f in Format)
FINISH_LABELS = tuple(f.value for f in FinishType)


class PredictorError(Exception):
    """Base class for backend failures."""


class UnscriptedQuery(PredictorError):
    """A scripted backend was asked something its fixture does not cover."""


@dataclass(frozen=True)
class ClassDistribution:
    """Probabilities over a fixed label set; sums to 1 within 1e-6."""

    probs: Mapping[str, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", dict(self.probs))
        if not self.probs:
            raise ValueError("distribution needs at least one label")
        for label, p in self.probs.items():
            if p < 0:
                raise ValueError(f"negative probability {p} for {label!r}")
        total = sum(self.probs.values())
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def argmax(self) -> str:
        """Most probable label; exact ties resolve to the lexicographically first."""
        return min(self.probs.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def prob(self, label: str) -> float:
        return self.probs.get(label, 0.0)

    def to_json_dict(self) -> dict:
        return dict(sorted(self.probs.items()))

    @classmethod
    def point_mass(cls, label: str, labels: tuple[str, ...]) -> "ClassDistribution":
        return cls({lab: 1.0 if lab == label else 0.0 for lab in labels})

    @classmethod
    def binary(cls, label: str, p: float, other: str) -> "ClassDistribution":
        return cls({label: p, other: 1.0 - p})


@dataclass(frozen=True)
class PreferenceResult:
    """Outcome of a pairwise image comparison against the reference image."""

    preferred: bool
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


class PredictorSuite(abc.ABC):
    """The seven prediction contracts the pipeline composes."""

    name: str = "abstract"

    @abc.abstractmethod
    def prefer_image(self, candidate: ImageData, reference: ImageData) -> PreferenceResult:
        """Is the candidate a better extraction input than the reference?

        The confidence is meaningful only when preferred is True.
        """

    @abc.abstractmethod
    def detect_shades(self, image: ImageData) -> list[BoundingBox]:
        """All shade regions, sorted by descending confidence. May be empty."""

    @abc.abstractmethod
    def classify_shade_count(self, image: ImageData) -> ClassDistribution:
        """Distribution over {Single, Multi}."""

    @abc.abstractmethod
    def classify_format(self, image: ImageData, title: str) -> ClassDistribution:
        """Distribution over the four product formats."""

    @abc.abstractmethod
    def classify_finish(self, crop: ImageData) -> ClassDistribution:
        """Distribution over the four finish types, judged from a shade crop."""

    @abc.abstractmethod
    def regress_base_color(self, crop: ImageData) -> NormalizedRgb:
        """Predicted base color of a shade crop, in normalized RGB."""

    @abc.abstractmethod
    def regress_reflective_color(self, crop: ImageData) -> NormalizedRgb:
        """Raw (pre-scaling) reflective color of a glitter shade crop."""
