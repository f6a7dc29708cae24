"""End-to-end extraction for one product.

Stage order is fixed: title eligibility screen, best-image selection, format
classification, shade region detection, the single/multi gate, then per-shade
base color and finish, with the reflective color regressed and scaled only
for glitter shades. Every stage leaves a trace record; timing is kept out of
the canonical result payload so batch output is byte-stable.
"""

from __future__ import annotations

import enum
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .boxes import BoundingBox
from .catalog import CatalogStore, ProductRecord, UnknownProduct
from .colors import scale_reflective
from .images import DecodeError, ImageData, ImageLoader
from .keywords import KeywordConfig, eligibility_filter
from .predictors.base import (
    SHADE_COUNT_SINGLE,
    ClassDistribution,
    PredictorError,
    PredictorSuite,
)
from .properties import FinishType, Format, MaterialProperties, Provenance, ShadeProperties


class PipelineError(Exception):
    pass


class NoDecodableImage(PipelineError):
    pass


class NoShadesDetected(PipelineError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    keywords: KeywordConfig = field(default_factory=KeywordConfig.default)
    crop_shrink: float = 0.10        # per-side inset before color/finish prediction
    confidence_floor: float = 0.25   # detection boxes below this are dropped pre-gate
    max_shades: int = 256            # hard cap; products above it are flagged
    retry_main_on_no_shades: bool = True


@dataclass
class StageRecord:
    stage: str
    detail: dict
    elapsed_ms: float

    def to_json_dict(self, include_timing: bool = False) -> dict:
        d = {"stage": self.stage, "detail": self.detail}
        if include_timing:
            d["elapsed_ms"] = round(self.elapsed_ms, 3)
        return d


@dataclass
class PipelineTrace:
    product_id: str
    stages: list[StageRecord] = field(default_factory=list)

    def record(self, stage: str, started: float, **detail) -> None:
        self.stages.append(
            StageRecord(stage=stage, detail=detail,
                        elapsed_ms=(time.perf_counter() - started) * 1000.0)
        )

    def to_json_dict(self, include_timing: bool = False) -> dict:
        return {
            "product_id": self.product_id,
            "stages": [s.to_json_dict(include_timing) for s in self.stages],
        }


class ExtractionStatus(enum.Enum):
    EXTRACTED = "extracted"
    FILTERED_OUT = "filtered_out"
    FAILED = "failed"


@dataclass
class ExtractionOutcome:
    product_id: str
    status: ExtractionStatus
    trace: PipelineTrace
    properties: Optional[MaterialProperties] = None
    matched_keyword: Optional[str] = None
    failed_stage: Optional[str] = None
    error: Optional[str] = None

    def to_json_dict(self) -> dict:
        d: dict = {"product_id": self.product_id, "status": self.status.value}
        if self.properties is not None:
            d["properties"] = self.properties.to_json_dict()
        if self.matched_keyword is not None:
            d["matched_keyword"] = self.matched_keyword
        if self.failed_stage is not None:
            d["failed_stage"] = self.failed_stage
        if self.error is not None:
            d["error"] = self.error
        d["trace"] = self.trace.to_json_dict(include_timing=False)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class BestImageChoice:
    position: int
    confidence: float


def select_best_image(
    product: ProductRecord,
    suite: PredictorSuite,
    loader: ImageLoader,
    trace: PipelineTrace | None = None,
) -> tuple[BestImageChoice, ImageData]:
    """Pick the extraction input image.

    The first image is the reference; any candidate the backend prefers over
    it competes on confidence, ties going to the lowest position. If the
    reference image cannot be decoded, the next decodable image takes its
    place (recorded in the trace).
    """
    if not product.images:
        raise NoDecodableImage(f"product {product.product_id!r} has no images")

    decoded: list[tuple[int, ImageData]] = []
    for ref in product.images:
        try:
            decoded.append((ref.position, loader.load(ref.uri)))
        except DecodeError as exc:
            if trace is not None:
                trace.record("decode_skip", time.perf_counter(), position=ref.position,
                             error=str(exc))
    if not decoded:
        raise NoDecodableImage(f"no decodable image for product {product.product_id!r}")

    ref_position, reference = decoded[0]
    if trace is not None and ref_position != 0:
        trace.record("reference_fallback", time.perf_counter(), position=ref_position)

    best: Optional[tuple[float, int]] = None  # (confidence, position); lower position wins ties
    for position, candidate in decoded[1:]:
        result = suite.prefer_image(candidate, reference)
        if result.preferred:
            key = (result.confidence, -position)
            if best is None or key > (best[0], -best[1]):
                best = (result.confidence, position)

    if best is None:
        choice = BestImageChoice(position=ref_position, confidence=1.0)
        image = reference
    else:
        choice = BestImageChoice(position=best[1], confidence=best[0])
        image = dict(decoded)[best[1]]
    return choice, image


def gate_regions(count_dist: ClassDistribution, boxes: list[BoundingBox]) -> list[BoundingBox]:
    """Prune detections with the single/multi verdict.

    A Single verdict collapses multiple boxes to the highest-confidence one
    (earliest wins an exact tie); Multi passes the boxes through untouched.
    """
    if not boxes:
        return []
    if count_dist.argmax() == SHADE_COUNT_SINGLE and len(boxes) > 1:
        best = max(boxes, key=lambda b: b.confidence)
        return [best]
    return list(boxes)


_FORMAT_TITLE_WORDS = ("powder", "cream", "stick", "liquid")


def _title_format_cues(title: str) -> list[str]:
    words = title.lower().split()
    return [w for w in _FORMAT_TITLE_WORDS if w in words]


def extract(
    product: ProductRecord,
    suite: PredictorSuite,
    loader: ImageLoader,
    config: PipelineConfig | None = None,
) -> ExtractionOutcome:
    """Run the full extraction pipeline for one product."""
    config = config or PipelineConfig()
    trace = PipelineTrace(product_id=product.product_id)

    def failed(stage: str, exc: Exception) -> ExtractionOutcome:
        return ExtractionOutcome(
            product_id=product.product_id,
            status=ExtractionStatus.FAILED,
            trace=trace,
            failed_stage=stage,
            error=str(exc),
        )

    # 1. eligibility screen
    t0 = time.perf_counter()
    text = product.title
    if config.keywords.scan_description:
        text = f"{product.title} {product.description}"
    verdict = eligibility_filter(text, config.keywords.rules)
    trace.record("eligibility", t0, eligible=verdict.eligible,
                 matched_keyword=verdict.matched_keyword)
    if not verdict.eligible:
        return ExtractionOutcome(
            product_id=product.product_id,
            status=ExtractionStatus.FILTERED_OUT,
            trace=trace,
            matched_keyword=verdict.matched_keyword,
        )

    # 2. best image selection
    t0 = time.perf_counter()
    try:
        choice, image = select_best_image(product, suite, loader, trace)
    except (NoDecodableImage, PredictorError) as exc:
        return failed("select_best_image", exc)
    trace.record("select_best_image", t0, position=choice.position,
                 confidence=choice.confidence)
    best_position = choice.position

    # 3. format classification
    t0 = time.perf_counter()
    try:
        format_dist = suite.classify_format(image, product.title)
    except PredictorError as exc:
        return failed("classify_format", exc)
    fmt = Format(format_dist.argmax())
    trace.record("classify_format", t0, distribution=format_dist.to_json_dict(),
                 argmax=fmt.value, title_cues=_title_format_cues(product.title))

    # 4. shade detection (with one retry on the first image)
    t0 = time.perf_counter()
    try:
        boxes = suite.detect_shades(image)
    except PredictorError as exc:
        return failed("detect_shades", exc)
    boxes = [b for b in boxes if b.confidence >= config.confidence_floor]
    trace.record("detect_shades", t0, count=len(boxes), image=image.name)

    if not boxes and config.retry_main_on_no_shades and best_position != 0 and product.images:
        t0 = time.perf_counter()
        try:
            main = loader.load(product.images[0].uri)
            boxes = [
                b for b in suite.detect_shades(main)
                if b.confidence >= config.confidence_floor
            ]
        except (DecodeError, PredictorError) as exc:
            trace.record("detect_retry_main", t0, error=str(exc))
            boxes = []
        else:
            trace.record("detect_retry_main", t0, count=len(boxes))
            if boxes:
                # crops must come from the image the boxes refer to
                image = main
                best_position = 0
    if not boxes:
        return failed("detect_shades", NoShadesDetected("no shade regions found"))

    if len(boxes) > config.max_shades:
        kept = sorted(boxes, key=lambda b: -b.confidence)[: config.max_shades]
        trace.record("shade_cap", time.perf_counter(), detected=len(boxes),
                     kept=config.max_shades)
        boxes = kept

    # 5. single/multi gate
    t0 = time.perf_counter()
    try:
        count_dist = suite.classify_shade_count(image)
    except PredictorError as exc:
        return failed("classify_shade_count", exc)
    gated = gate_regions(count_dist, boxes)
    trace.record("gate_regions", t0, distribution=count_dist.to_json_dict(),
                 before=len(boxes), after=len(gated))

    # 6. per-shade attributes
    shades = []
    for i, box in enumerate(gated):
        t0 = time.perf_counter()
        crop = image.crop(box.shrunk(config.crop_shrink), name=f"{image.name}[{i}]")
        try:
            base = suite.regress_base_color(crop).to_rgb()
            finish = FinishType(suite.classify_finish(crop).argmax())
            reflective = None
            if finish is FinishType.GLITTER:
                raw = suite.regress_reflective_color(crop)
                reflective = scale_reflective(raw).to_rgb()
        except PredictorError as exc:
            return failed(f"shade[{i}]", exc)
        shades.append(ShadeProperties(
            region=box, base_color=base, finish=finish, reflective_color=reflective,
        ))
        trace.record("shade", t0, box_index=i, base_color=base.hex, finish=finish.value,
                     reflective_color=reflective.hex if reflective else None)

    properties = MaterialProperties(
        format=fmt,
        shades=tuple(shades),
        best_image_position=best_position,
        provenance=Provenance.PIPELINE,
    )
    return ExtractionOutcome(
        product_id=product.product_id,
        status=ExtractionStatus.EXTRACTED,
        trace=trace,
        properties=properties,
    )


ProgressCallback = Callable[[int, int, str], None]


def extract_batch(
    store: CatalogStore,
    ids: list[str],
    suite: PredictorSuite,
    loader: ImageLoader,
    config: PipelineConfig | None = None,
    parallelism: int = 1,
    progress: ProgressCallback | None = None,
) -> dict[str, ExtractionOutcome]:
    """Extract many products; results are identical for any parallelism."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    config = config or PipelineConfig()

    def run_one(product_id: str) -> ExtractionOutcome:
        try:
            product = store.get(product_id)
        except UnknownProduct as exc:
            return ExtractionOutcome(
                product_id=product_id,
                status=ExtractionStatus.FAILED,
                trace=PipelineTrace(product_id=product_id),
                failed_stage="load",
                error=str(exc),
            )
        return extract(product, suite, loader, config)

    results: dict[str, ExtractionOutcome] = {}
    done = 0
    if parallelism == 1:
        for pid in ids:
            results[pid] = run_one(pid)
            done += 1
            if progress is not None:
                progress(done, len(ids), pid)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            for pid, outcome in zip(ids, pool.map(run_one, ids)):
                results[pid] = outcome
                done += 1
                if progress is not None:
                    progress(done, len(ids), pid)
    return results
