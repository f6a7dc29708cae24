"""Backend selection by name plus parameters, for the CLI and the service."""

from __future__ import annotations

from .adapter import AdapterSuite
from .base import PredictorError, PredictorSuite
from .heuristic import HeuristicConfig, HeuristicSuite
from .scripted import ScriptedSuite


class UnknownBackend(PredictorError):
    pass


BACKEND_NAMES = ("heuristic", "scripted", "adapter")


def create_suite(name: str, params: dict | None = None) -> PredictorSuite:
    """Instantiate a predictor backend from its runtime configuration.

    - "heuristic": params override HeuristicConfig fields
    - "scripted":  params = {"fixture": path to a scripted fixture file}
    - "adapter":   params = {"command": argv list of the external backend}
    """
    params = params or {}
    if name == "heuristic":
        return HeuristicSuite(HeuristicConfig(**params))
    if name == "scripted":
        if "fixture" not in params:
            raise UnknownBackend("scripted backend needs a 'fixture' parameter")
        return ScriptedSuite.from_file(params["fixture"])
    if name == "adapter":
        if "command" not in params:
            raise UnknownBackend("adapter backend needs a 'command' parameter")
        return AdapterSuite(command=params["command"])
    raise UnknownBackend(f"unknown backend {name!r}; known: {', '.join(BACKEND_NAMES)}")
