"""Annotator records for shades: three human colors, categorical labels.

The file format is JSON lines, one record per shade, keyed by product id and
shade index. Colors are hex strings; categorical labels are listed once per
annotator in annotator order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Optional

from .colors import RgbColor

ANNOTATOR_COUNT = 3


@dataclass(frozen=True)
class ShadeAnnotation:
    """What the three annotators said about one shade."""

    product_id: str
    shade_index: int
    colors: Optional[tuple[RgbColor, RgbColor, RgbColor]] = None
    finish_labels: tuple[str, ...] = ()
    format_labels: tuple[str, ...] = ()
    model_color: Optional[RgbColor] = None

    def __post_init__(self) -> None:
        if self.shade_index < 0:
            raise ValueError("shade_index must be >= 0")
        if self.colors is not None and len(self.colors) != ANNOTATOR_COUNT:
            raise ValueError(f"expected {ANNOTATOR_COUNT} annotator colors")
        for labels in (self.finish_labels, self.format_labels):
            if labels and len(labels) != ANNOTATOR_COUNT:
                raise ValueError(f"expected {ANNOTATOR_COUNT} labels per task")

    def to_json_dict(self) -> dict:
        d: dict = {"product_id": self.product_id, "shade_index": self.shade_index}
        if self.colors is not None:
            d["colors"] = {f"a{i + 1}": c.hex for i, c in enumerate(self.colors)}
        if self.finish_labels:
            d["finish_labels"] = list(self.finish_labels)
        if self.format_labels:
            d["format_labels"] = list(self.format_labels)
        if self.model_color is not None:
            d["model_color"] = self.model_color.hex
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> "ShadeAnnotation":
        colors = None
        if "colors" in data and data["colors"]:
            raw = data["colors"]
            colors = tuple(RgbColor.from_hex(raw[f"a{i + 1}"]) for i in range(ANNOTATOR_COUNT))
        model = data.get("model_color")
        return cls(
            product_id=str(data["product_id"]),
            shade_index=int(data["shade_index"]),
            colors=colors,
            finish_labels=tuple(data.get("finish_labels", ())),
            format_labels=tuple(data.get("format_labels", ())),
            model_color=RgbColor.from_hex(model) if model else None,
        )


def load_annotations(path: str | os.PathLike) -> list[ShadeAnnotation]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ShadeAnnotation.from_json_dict(json.loads(line)))
    return records


def save_annotations(records: Iterable[ShadeAnnotation], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")
