from .adapter import HANDSHAKE, AdapterSuite
from .base import (
    FINISH_LABELS,
    FORMAT_LABELS,
    SHADE_COUNT_LABELS,
    SHADE_COUNT_MULTI,
    SHADE_COUNT_SINGLE,
    ClassDistribution,
    PredictorError,
    PredictorSuite,
    PreferenceResult,
    UnscriptedQuery,
)
from .heuristic import HeuristicConfig, HeuristicSuite
from .registry import BACKEND_NAMES, UnknownBackend, create_suite
from .scripted import ScriptedSuite

__all__ = [
    "AdapterSuite",
    "BACKEND_NAMES",
    "ClassDistribution",
    "FINISH_LABELS",
    "FORMAT_LABELS",
    "HANDSHAKE",
    "HeuristicConfig",
    "HeuristicSuite",
    "PredictorError",
    "PredictorSuite",
    "PreferenceResult",
    "SHADE_COUNT_LABELS",
    "SHADE_COUNT_MULTI",
    "SHADE_COUNT_SINGLE",
    "ScriptedSuite",
    "UnknownBackend",
    "UnscriptedQuery",
    "create_suite",
]
