"""Product records, ingestion, persistence, and curator overrides.

The store keeps everything in memory behind a single writer lock and can
persist two ways: an append-only JSON-lines event log written as mutations
happen, and an on-demand snapshot file. Both are plain text; the snapshot
starts with the magic header "MPECAT1".

Catalogs here are small (thousands of products), so there is deliberately no
database underneath.
"""

from __future__ import annotations

import enum
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .annotations import ShadeAnnotation
from .properties import FinishType, Format, MaterialProperties, Provenance

SNAPSHOT_MAGIC = "MPECAT1"


class Category(enum.Enum):
    EYESHADOW = "Eyeshadow"
    LIPSTICK = "Lipstick"
    FOUNDATION = "Foundation"
    CLOTHING = "Clothing"
    OTHER = "Other"


class CatalogError(Exception):
    """Base class for store errors."""


class DuplicateId(CatalogError):
    pass


class MalformedRecord(CatalogError):
    pass


class UnknownProduct(CatalogError):
    pass


class InvalidProperties(CatalogError):
    pass


@dataclass(frozen=True)
class ImageRef:
    position: int
    uri: str
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.position < 0:
            raise ValueError("image position must be >= 0")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")

    def to_json_dict(self) -> dict:
        return {"position": self.position, "uri": self.uri, "width": self.width, "height": self.height}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ImageRef":
        return cls(int(data["position"]), str(data["uri"]), int(data["width"]), int(data["height"]))


@dataclass(frozen=True)
class ProductRecord:
    product_id: str
    title: str
    category: Category
    brand: str = ""
    description: str = ""
    images: tuple[ImageRef, ...] = ()
    ground_truth: Optional[MaterialProperties] = None

    def __post_init__(self) -> None:
        if not self.product_id:
            raise ValueError("product_id must be non-empty")
        object.__setattr__(self, "images", tuple(self.images))
        positions = [img.position for img in self.images]
        if positions != list(range(len(positions))):
            raise ValueError(f"image positions must be contiguous from 0, got {positions}")

    @property
    def main_image(self) -> Optional[ImageRef]:
        return self.images[0] if self.images else None

    def to_json_dict(self) -> dict:
        d: dict = {
            "product_id": self.product_id,
            "title": self.title,
            "category": self.category.value,
            "brand": self.brand,
            "description": self.description,
            "images": [img.to_json_dict() for img in self.images],
        }
        if self.ground_truth is not None:
            d["ground_truth"] = self.ground_truth.to_json_dict()
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProductRecord":
        try:
            gt = data.get("ground_truth")
            return cls(
                product_id=str(data["product_id"]),
                title=str(data.get("title", "")),
                category=Category(data["category"]),
                brand=str(data.get("brand", "")),
                description=str(data.get("description", "")),
                images=tuple(ImageRef.from_json_dict(i) for i in data.get("images", [])),
                ground_truth=MaterialProperties.from_json_dict(gt) if gt else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad product record: {exc}") from exc


@dataclass(frozen=True)
class OverrideRevision:
    revision: int
    author: str
    properties: MaterialProperties


@dataclass(frozen=True)
class IngestError:
    product_id: Optional[str]
    code: str  # "DuplicateId" or "MalformedRecord"
    message: str


@dataclass
class IngestReport:
    count: int = 0
    errors: list[IngestError] = field(default_factory=list)


@dataclass(frozen=True)
class PinnedAssociation:
    """A curator-approved match, keyed by the query source it answers."""

    source_key: str
    product_id: str
    shade_index: int
    author: str
    revision: int


class CatalogStore:
    """Single-writer product store with override history.

    All mutations are serialized through one lock; readers take the same lock
    briefly, so they always observe a consistent state. Passing ``log_path``
    turns on the append-only event log: the constructor replays an existing
    log, and every mutation is appended as it commits.
    """

    def __init__(self, log_path: str | os.PathLike | None = None):
        self._lock = threading.RLock()
        self._records: dict[str, ProductRecord] = {}
        self._extracted: dict[str, MaterialProperties] = {}
        self._overrides: dict[str, list[OverrideRevision]] = {}
        self._annotations: list[ShadeAnnotation] = []
        self._associations: dict[str, list[PinnedAssociation]] = {}
        self._revision = 0
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None and self._log_path.exists():
            self._replay_log()

    # -- persistence ---------------------------------------------------------

    def _append_log(self, event: dict) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay_log(self) -> None:
        with open(self._log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply_event(json.loads(line))

    def _apply_event(self, event: dict) -> None:
        kind = event["event"]
        if kind == "product":
            record = ProductRecord.from_json_dict(event["record"])
            self._records[record.product_id] = record
        elif kind == "extracted":
            self._extracted[event["product_id"]] = MaterialProperties.from_json_dict(
                event["properties"]
            )
        elif kind == "override":
            rev = OverrideRevision(
                revision=int(event["revision"]),
                author=event.get("author", ""),
                properties=MaterialProperties.from_json_dict(event["properties"]),
            )
            self._overrides.setdefault(event["product_id"], []).append(rev)
            self._revision = max(self._revision, rev.revision)
        elif kind == "annotation":
            self._annotations.append(ShadeAnnotation.from_json_dict(event["record"]))
        elif kind == "association":
            assoc = PinnedAssociation(
                source_key=event["source_key"],
                product_id=event["product_id"],
                shade_index=int(event["shade_index"]),
                author=event.get("author", ""),
                revision=int(event["revision"]),
            )
            self._associations.setdefault(assoc.source_key, []).append(assoc)
            self._revision = max(self._revision, assoc.revision)
        else:
            raise MalformedRecord(f"unknown log event {kind!r}")

    def snapshot(self, path: str | os.PathLike) -> None:
        """Write the full store state, prefixed with the magic header."""
        with self._lock:
            lines = [SNAPSHOT_MAGIC]
            for pid in sorted(self._records):
                entry: dict = {"event": "product", "record": self._records[pid].to_json_dict()}
                lines.append(json.dumps(entry, sort_keys=True))
                if pid in self._extracted:
                    lines.append(json.dumps({
                        "event": "extracted",
                        "product_id": pid,
                        "properties": self._extracted[pid].to_json_dict(),
                    }, sort_keys=True))
                for rev in self._overrides.get(pid, []):
                    lines.append(json.dumps({
                        "event": "override",
                        "product_id": pid,
                        "revision": rev.revision,
                        "author": rev.author,
                        "properties": rev.properties.to_json_dict(),
                    }, sort_keys=True))
            for ann in self._annotations:
                lines.append(json.dumps({"event": "annotation", "record": ann.to_json_dict()},
                                        sort_keys=True))
            for assocs in self._associations.values():
                for assoc in assocs:
                    lines.append(json.dumps({
                        "event": "association",
                        "source_key": assoc.source_key,
                        "product_id": assoc.product_id,
                        "shade_index": assoc.shade_index,
                        "author": assoc.author,
                        "revision": assoc.revision,
                    }, sort_keys=True))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_snapshot(cls, path: str | os.PathLike,
                      log_path: str | os.PathLike | None = None) -> "CatalogStore":
        store = cls(log_path=None)
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != SNAPSHOT_MAGIC:
                raise MalformedRecord(
                    f"not a catalog snapshot: expected header {SNAPSHOT_MAGIC!r}, got {header!r}"
                )
            for line in fh:
                line = line.strip()
                if line:
                    store._apply_event(json.loads(line))
        store._log_path = Path(log_path) if log_path is not None else None
        return store

    # -- ingestion -----------------------------------------------------------

    def ingest(self, records: Iterable[ProductRecord], upsert: bool = False) -> IngestReport:
        """Add records; per-record failures are collected, never fatal."""
        report = IngestReport()
        for record in records:
            try:
                with self._lock:
                    if record.product_id in self._records and not upsert:
                        raise DuplicateId(f"product {record.product_id!r} already ingested")
                    self._records[record.product_id] = record
                    self._append_log({"event": "product", "record": record.to_json_dict()})
                report.count += 1
            except DuplicateId as exc:
                report.errors.append(IngestError(record.product_id, "DuplicateId", str(exc)))
        return report

    def ingest_jsonl(self, path: str | os.PathLike, upsert: bool = False) -> IngestReport:
        """Ingest newline-delimited JSON records; malformed lines are collected."""
        report = IngestReport()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = ProductRecord.from_json_dict(json.loads(line))
                except (json.JSONDecodeError, MalformedRecord, ValueError) as exc:
                    report.errors.append(
                        IngestError(None, "MalformedRecord", f"line {lineno}: {exc}")
                    )
                    continue
                sub = self.ingest([record], upsert=upsert)
                report.count += sub.count
                report.errors.extend(sub.errors)
        return report

    # -- access --------------------------------------------------------------

    def get(self, product_id: str) -> ProductRecord:
        with self._lock:
            try:
                return self._records[product_id]
            except KeyError:
                raise UnknownProduct(f"no product {product_id!r}") from None

    def __contains__(self, product_id: str) -> bool:
        with self._lock:
            return product_id in self._records

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._records)

    # -- extraction results and overrides -------------------------------------

    def set_extracted(self, product_id: str, properties: MaterialProperties) -> None:
        with self._lock:
            if product_id not in self._records:
                raise UnknownProduct(f"no product {product_id!r}")
            stored = properties.with_provenance(Provenance.PIPELINE)
            self._extracted[product_id] = stored
            self._append_log({
                "event": "extracted",
                "product_id": product_id,
                "properties": stored.to_json_dict(),
            })

    def apply_override(self, product_id: str, properties: MaterialProperties,
                       author: str) -> int:
        """Store a curator override; returns its revision id."""
        if not isinstance(properties, MaterialProperties):
            raise InvalidProperties(f"expected MaterialProperties, got {type(properties)}")
        with self._lock:
            if product_id not in self._records:
                raise UnknownProduct(f"no product {product_id!r}")
            self._revision += 1
            rev = OverrideRevision(
                revision=self._revision,
                author=author,
                properties=properties.with_provenance(Provenance.OVERRIDE),
            )
            self._overrides.setdefault(product_id, []).append(rev)
            self._append_log({
                "event": "override",
                "product_id": product_id,
                "revision": rev.revision,
                "author": author,
                "properties": rev.properties.to_json_dict(),
            })
            return rev.revision

    def override_history(self, product_id: str) -> list[OverrideRevision]:
        with self._lock:
            if product_id not in self._records:
                raise UnknownProduct(f"no product {product_id!r}")
            return list(self._overrides.get(product_id, []))

    def effective_properties(self, product_id: str) -> Optional[MaterialProperties]:
        """Override wins over pipeline output; no mixing between the two."""
        with self._lock:
            if product_id not in self._records:
                raise UnknownProduct(f"no product {product_id!r}")
            revisions = self._overrides.get(product_id)
            if revisions:
                return revisions[-1].properties
            return self._extracted.get(product_id)

    # -- querying ------------------------------------------------------------

    def query(self, category: Category | None = None, brand: str | None = None,
              format: Format | None = None, finish: FinishType | None = None) -> list[str]:
        """Conjunctive attribute filter; returns matching ids sorted."""
        with self._lock:
            out = []
            for pid in sorted(self._records):
                record = self._records[pid]
                if category is not None and record.category is not category:
                    continue
                if brand is not None and record.brand != brand:
                    continue
                if format is not None or finish is not None:
                    props = self.effective_properties(pid)
                    if props is None:
                        continue
                    if format is not None and props.format is not format:
                        continue
                    if finish is not None and not any(
                        s.finish is finish for s in props.shades
                    ):
                        continue
                out.append(pid)
            return out

    # -- annotations and pinned matches ---------------------------------------

    def add_annotations(self, records: Iterable[ShadeAnnotation]) -> int:
        added = 0
        with self._lock:
            for rec in records:
                self._annotations.append(rec)
                self._append_log({"event": "annotation", "record": rec.to_json_dict()})
                added += 1
        return added

    def annotations(self) -> list[ShadeAnnotation]:
        with self._lock:
            return list(self._annotations)

    def pin_association(self, source_key: str, product_id: str, shade_index: int,
                        author: str) -> int:
        with self._lock:
            if product_id not in self._records:
                raise UnknownProduct(f"no product {product_id!r}")
            self._revision += 1
            assoc = PinnedAssociation(source_key, product_id, shade_index, author, self._revision)
            self._associations.setdefault(source_key, []).append(assoc)
            self._append_log({
                "event": "association",
                "source_key": source_key,
                "product_id": product_id,
                "shade_index": shade_index,
                "author": author,
                "revision": assoc.revision,
            })
            return assoc.revision

    def associations(self, source_key: str) -> list[PinnedAssociation]:
        with self._lock:
            return list(self._associations.get(source_key, []))
