"""Adapter for external predictor backends.

Talks to a child process over stdio: after a one-line "MPEPRED1" version
handshake, each request and response is a single JSON line. Images are passed
by file path; in-memory images (crops) are written to a temporary PNG first.
Calls are serialized over the single channel, so the suite is safe to share
between threads.

Protocol, one message per line:

    -> MPEPRED1
    <- MPEPRED1
    -> {"id": 1, "op": "detect_shades", "image": "/path/img.png"}
    <- {"id": 1, "result": {"boxes": [{"cx": ..., "cy": ..., "w": ..., "h": ...,
                                        "confidence": ...}]}}
    -> {"id": 2, "op": "classify_finish", "image": "/tmp/....png"}
    <- {"id": 2, "result": {"distribution": {"Matte": 0.9, ...}}}
    -> {"id": 3, "op": "regress_base_color", "image": "..."}
    <- {"id": 3, "result": {"rgb": [0.2, 0.4, 0.6]}}
    -> {"id": 4, "op": "prefer_image", "candidate": "...", "reference": "..."}
    <- {"id": 4, "result": {"preferred": true, "confidence": 0.9}}

Errors come back as {"id": n, "error": "message"}.
"""

from __future__ import annotations

import hashlib
import json
import os
import subprocess
import tempfile
import threading
from typing import Sequence

from PIL import Image

from ..boxes import BoundingBox
from ..colors import NormalizedRgb
from ..images import ImageData
from .base import ClassDistribution, PredictorError, PredictorSuite, PreferenceResult

HANDSHAKE = "MPEPRED1"


class AdapterSuite(PredictorSuite):
    name = "adapter"

    def __init__(self, command: Sequence[str]):
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lock = threading.Lock()
        self._tmpdir = tempfile.TemporaryDirectory(prefix="mpe-adapter-")
        self._next_id = 0
        self._write_line(HANDSHAKE)
        reply = self._read_line()
        if reply != HANDSHAKE:
            self.close()
            raise PredictorError(f"backend handshake mismatch: expected {HANDSHAKE!r}, got {reply!r}")

    def close(self) -> None:
        if self._proc.stdin and not self._proc.stdin.closed:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)
        self._tmpdir.cleanup()

    def __enter__(self) -> "AdapterSuite":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- wire plumbing ---------------------------------------------------------

    def _write_line(self, line: str) -> None:
        assert self._proc.stdin is not None
        self._proc.stdin.write(line + "\n")
        self._proc.stdin.flush()

    def _read_line(self) -> str:
        assert self._proc.stdout is not None
        line = self._proc.stdout.readline()
        if not line:
            raise PredictorError("backend process closed its output")
        return line.rstrip("\n")

    def _call(self, op: str, **args) -> dict:
        with self._lock:
            self._next_id += 1
            request = {"id": self._next_id, "op": op, **args}
            self._write_line(json.dumps(request, sort_keys=True))
            response = json.loads(self._read_line())
        if response.get("id") != request["id"]:
            raise PredictorError(
                f"backend answered request {response.get('id')} instead of {request['id']}"
            )
        if "error" in response:
            raise PredictorError(f"backend error on {op}: {response['error']}")
        return response["result"]

    def _image_path(self, image: ImageData) -> str:
        if image.path and os.path.exists(image.path):
            return image.path
        digest = hashlib.sha1(image.name.encode() + image.pixels.tobytes()).hexdigest()[:16]
        path = os.path.join(self._tmpdir.name, f"{digest}.png")
        if not os.path.exists(path):
            Image.fromarray(image.pixels, mode="RGB").save(path)
        return path

    # -- contracts ---------------------------------------------------------------

    def prefer_image(self, candidate: ImageData, reference: ImageData) -> PreferenceResult:
        result = self._call(
            "prefer_image",
            candidate=self._image_path(candidate),
            reference=self._image_path(reference),
        )
        return PreferenceResult(bool(result["preferred"]), float(result["confidence"]))

    def detect_shades(self, image: ImageData) -> list[BoundingBox]:
        result = self._call("detect_shades", image=self._image_path(image))
        return [BoundingBox.from_json_dict(b) for b in result["boxes"]]

    def classify_shade_count(self, image: ImageData) -> ClassDistribution:
        result = self._call("classify_shade_count", image=self._image_path(image))
        return ClassDistribution(result["distribution"])

    def classify_format(self, image: ImageData, title: str) -> ClassDistribution:
        result = self._call("classify_format", image=self._image_path(image), title=title)
        return ClassDistribution(result["distribution"])

    def classify_finish(self, crop: ImageData) -> ClassDistribution:
        result = self._call("classify_finish", image=self._image_path(crop))
        return ClassDistribution(result["distribution"])

    def regress_base_color(self, crop: ImageData) -> NormalizedRgb:
        result = self._call("regress_base_color", image=self._image_path(crop))
        r, g, b = result["rgb"]
        return NormalizedRgb(float(r), float(g), float(b))

    def regress_reflective_color(self, crop: ImageData) -> NormalizedRgb:
        result = self._call("regress_reflective_color", image=self._image_path(crop))
        r, g, b = result["rgb"]
        return NormalizedRgb(float(r), float(g), float(b))
