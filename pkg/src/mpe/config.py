"""Service configuration: one JSON file, a few environment overrides.

Environment variables win over the file: MPE_PORT, MPE_BACKEND,
MPE_PARALLELISM, and MPE_KEYWORDS (path to a keyword rule file).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .keywords import KeywordConfig


@dataclass
class ServiceConfig:
    catalog_log: Optional[str] = None    # append-only event log; None = memory only
    images_dir: str = "."
    backend: str = "heuristic"
    backend_params: dict = field(default_factory=dict)
    port: int = 8300
    parallelism: int = 4
    token: Optional[str] = None          # shared bearer token; None disables auth
    keywords_path: Optional[str] = None
    ui_dir: Optional[str] = None         # static files served at /

    def keyword_config(self) -> KeywordConfig:
        if self.keywords_path:
            return KeywordConfig.load(self.keywords_path)
        return KeywordConfig.default()

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> "ServiceConfig":
        data: dict = {}
        if path is not None:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            base = Path(path).resolve().parent
            for key in ("catalog_log", "images_dir", "keywords_path", "ui_dir"):
                if data.get(key):
                    data[key] = str((base / data[key]).resolve()) \
                        if not os.path.isabs(data[key]) else data[key]
        cfg = cls(**data)
        if os.environ.get("MPE_PORT"):
            cfg.port = int(os.environ["MPE_PORT"])
        if os.environ.get("MPE_BACKEND"):
            cfg.backend = os.environ["MPE_BACKEND"]
        if os.environ.get("MPE_PARALLELISM"):
            cfg.parallelism = int(os.environ["MPE_PARALLELISM"])
        if os.environ.get("MPE_KEYWORDS"):
            cfg.keywords_path = os.environ["MPE_KEYWORDS"]
        return cfg
