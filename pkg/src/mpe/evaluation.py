"""Metrics for every pipeline stage, agreement statistics, and full-catalog
evaluation with ground-truth substitution.

Covers: single-class mean average precision over IoU thresholds 0.50 to 0.95,
F1 from confusion matrices, best-image selection accuracy, Fleiss kappa for
inter-annotator agreement, the paired human/model color-consistency sums, and
perceptual distance histograms bucketed at "up to 3" (imperceptible to most
eyes) and "3 to 12" (distinguishable but acceptable).

evaluate_pipeline can force any of the best-image, shade-region, and finish
stages to ground truth ("m1", "m3", "m5" on the wire) to measure how error
propagates through the remaining stages; substituted stages are left unscored
rather than reported as trivially perfect.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .annotations import ANNOTATOR_COUNT, ShadeAnnotation
from .boxes import BoundingBox, iou
from .catalog import CatalogStore, ProductRecord
from .colors import RgbColor, delta_e, scale_reflective, srgb_to_lab
from .images import DecodeError, ImageLoader
from .keywords import eligibility_filter
from .pipeline import PipelineConfig, gate_regions, select_best_image
from .predictors.base import PredictorError, PredictorSuite
from .properties import FinishType, Format, MaterialProperties

IOU_THRESHOLDS = tuple(t / 100 for t in range(50, 100, 5))

MATCH_IOU = 0.5  # predicted shades pair with ground-truth shades at this IoU

STRATA = ("Single", "Multi", "All")

HISTOGRAM_BUCKETS = ("le_3", "in_3_12", "gt_12")


class EvaluationError(Exception):
    pass


class RaggedRatings(EvaluationError):
    pass


class DegenerateAgreement(EvaluationError):
    """Every rating fell in one category; chance agreement is 1 and kappa undefined."""


class MissingAnnotator(EvaluationError):
    pass


class MissingGroundTruth(EvaluationError):
    pass


# -- mean average precision ----------------------------------------------------


def _average_precision(
    predictions: Mapping[str, Sequence[BoundingBox]],
    ground_truth: Mapping[str, Sequence[BoundingBox]],
    threshold: float,
) -> float:
    total_gt = sum(len(v) for v in ground_truth.values())
    ranked = []
    for image_id in sorted(predictions):
        for order, box in enumerate(predictions[image_id]):
            ranked.append((-box.confidence, image_id, order, box))
    ranked.sort(key=lambda t: t[:3])

    if total_gt == 0:
        return 1.0 if not ranked else 0.0
    if not ranked:
        return 0.0

    matched: dict[str, list[bool]] = {
        image_id: [False] * len(boxes) for image_id, boxes in ground_truth.items()
    }
    tp = np.zeros(len(ranked))
    for i, (_negconf, image_id, _order, box) in enumerate(ranked):
        gts = ground_truth.get(image_id, ())
        best_iou, best_j = 0.0, -1
        for j, gt_box in enumerate(gts):
            if matched[image_id][j]:
                continue
            overlap = iou(box, gt_box)
            if overlap > best_iou:
                best_iou, best_j = overlap, j
        if best_j >= 0 and best_iou >= threshold:
            matched[image_id][best_j] = True
            tp[i] = 1.0

    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(1.0 - tp)
    recall = tp_cum / total_gt
    precision = tp_cum / (tp_cum + fp_cum)

    # precision envelope over all recall points
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    change = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[change + 1] - mrec[change]) * mpre[change + 1]))


def mean_average_precision(
    predictions: Mapping[str, Sequence[BoundingBox]],
    ground_truth: Mapping[str, Sequence[BoundingBox]],
) -> float:
    """Single-class mAP averaged over IoU thresholds 0.50, 0.55, ..., 0.95.

    Per threshold, predictions are taken in descending confidence and each
    greedily claims the unmatched ground-truth box it overlaps most, counting
    as a true positive when that overlap reaches the threshold. AP integrates
    the precision envelope over all recall points. Images with no entry in
    either mapping contribute empty lists.
    """
    return sum(_average_precision(predictions, ground_truth, t)
               for t in IOU_THRESHOLDS) / len(IOU_THRESHOLDS)


# -- confusion matrices and F1 ---------------------------------------------------


@dataclass
class ConfusionMatrix:
    """Square count matrix; rows are ground truth, columns are predictions."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def empty(cls, labels: Sequence[str]) -> "ConfusionMatrix":
        n = len(labels)
        return cls(labels=tuple(labels), counts=np.zeros((n, n), dtype=np.int64))

    def __post_init__(self) -> None:
        n = len(self.labels)
        if self.counts.shape != (n, n):
            raise ValueError(f"counts shape {self.counts.shape} does not match {n} labels")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")

    def add(self, truth: str, prediction: str, n: int = 1) -> None:
        self.counts[self.labels.index(truth), self.labels.index(prediction)] += n

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_json_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": self.counts.tolist()}


@dataclass(frozen=True)
class F1Scores:
    per_class: dict[str, float]
    macro: float
    excluded: tuple[str, ...]  # classes absent from both truth and prediction

    def to_json_dict(self) -> dict:
        return {
            "per_class": dict(sorted(self.per_class.items())),
            "macro": self.macro,
            "excluded": list(self.excluded),
        }


def f1_from_confusion(matrix: ConfusionMatrix) -> F1Scores:
    """Per-class and macro F1.

    A class with no truth rows and no predicted columns gets F1 = 0 and is
    excluded from the macro average (and flagged), since it carries no signal.
    """
    per_class: dict[str, float] = {}
    excluded = []
    included = []
    for i, label in enumerate(matrix.labels):
        row = matrix.counts[i].sum()
        col = matrix.counts[:, i].sum()
        diag = matrix.counts[i, i]
        if row == 0 and col == 0:
            per_class[label] = 0.0
            excluded.append(label)
            continue
        precision = diag / col if col else 0.0
        recall = diag / row if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = float(f1)
        included.append(float(f1))
    macro = float(np.mean(included)) if included else 0.0
    return F1Scores(per_class=per_class, macro=macro, excluded=tuple(excluded))


# -- selection accuracy ------------------------------------------------------------


def selection_accuracy(model_choices: Sequence, human_choices: Sequence) -> float:
    """Fraction of products where the model picked the same image a human did."""
    if len(model_choices) != len(human_choices):
        raise ValueError("choice sequences differ in length")
    if not model_choices:
        raise ValueError("no choices to compare")
    hits = sum(1 for m, h in zip(model_choices, human_choices) if m == h)
    return hits / len(model_choices)


# -- Fleiss kappa ---------------------------------------------------------------------


def fleiss_kappa(table: Sequence[Sequence[int]], raters: int) -> float:
    """Fleiss kappa over an items x categories count table.

    Every item must be rated by exactly `raters` raters (RaggedRatings
    otherwise). If all ratings across all items land in one category, chance
    agreement is 1 and the statistic is undefined: DegenerateAgreement.
    """
    if raters < 2:
        raise RaggedRatings("kappa needs at least 2 raters")
    counts = np.asarray(table, dtype=np.float64)
    if counts.ndim != 2 or counts.shape[0] == 0:
        raise RaggedRatings("table must be items x categories")
    row_sums = counts.sum(axis=1)
    if not np.all(row_sums == raters):
        raise RaggedRatings(f"every item needs exactly {raters} ratings")

    n_items = counts.shape[0]
    p_item = (np.sum(counts * counts, axis=1) - raters) / (raters * (raters - 1))
    p_bar = float(np.mean(p_item))
    p_categories = counts.sum(axis=0) / (n_items * raters)
    p_chance = float(np.sum(p_categories**2))
    if np.any(p_categories == 1.0):
        raise DegenerateAgreement("all ratings fall in a single category")
    return (p_bar - p_chance) / (1.0 - p_chance)


# -- human consistency ------------------------------------------------------------------


@dataclass(frozen=True)
class DistributionStats:
    mean: float
    variance: float  # population variance (divide by N)
    count: int

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "count": self.count}


def _stats(values: list[float]) -> DistributionStats:
    arr = np.asarray(values, dtype=np.float64)
    return DistributionStats(mean=float(arr.mean()), variance=float(arr.var()),
                             count=len(values))


def human_consistency(
    annotations: Sequence[ShadeAnnotation],
    predictions: Mapping[tuple[str, int], RgbColor] | None = None,
) -> dict[str, dict[str, DistributionStats]]:
    """Per-shade disagreement sums, aggregated per stratum.

    For each shade, the human sum adds the three pairwise distances between
    annotator colors; the model sum adds each annotator's distance to the
    model color (from `predictions`, falling back to the record's own
    model_color). A product is Multi when more than one of its shades is
    annotated. Returns mean and population variance of both sums for the
    Single, Multi, and All strata.
    """
    predictions = predictions or {}
    per_product: dict[str, int] = {}
    for ann in annotations:
        per_product[ann.product_id] = per_product.get(ann.product_id, 0) + 1

    sums: dict[str, dict[str, list[float]]] = {
        s: {"d_hc": [], "d_ml": []} for s in STRATA
    }
    for ann in annotations:
        if ann.colors is None:
            raise MissingAnnotator(
                f"shade {ann.product_id}:{ann.shade_index} lacks annotator colors"
            )
        model = predictions.get((ann.product_id, ann.shade_index), ann.model_color)
        if model is None:
            raise MissingAnnotator(
                f"shade {ann.product_id}:{ann.shade_index} lacks a model prediction"
            )
        labs = [srgb_to_lab(c) for c in ann.colors]
        model_lab = srgb_to_lab(model)
        d_hc = delta_e(labs[0], labs[1]) + delta_e(labs[0], labs[2]) + delta_e(labs[1], labs[2])
        d_ml = sum(delta_e(lab, model_lab) for lab in labs)
        stratum = "Multi" if per_product[ann.product_id] > 1 else "Single"
        for key in (stratum, "All"):
            sums[key]["d_hc"].append(d_hc)
            sums[key]["d_ml"].append(d_ml)

    out: dict[str, dict[str, DistributionStats]] = {}
    for stratum in STRATA:
        if sums[stratum]["d_hc"]:
            out[stratum] = {
                "d_hc": _stats(sums[stratum]["d_hc"]),
                "d_ml": _stats(sums[stratum]["d_ml"]),
            }
    return out


# -- perceptual distance histogram ----------------------------------------------------------


def delta_e_histogram(values: Iterable[float]) -> dict[str, int]:
    """Bucket distances at the perceptual edges: up to 3 inclusive, 3 to 12
    inclusive, beyond 12."""
    hist = {bucket: 0 for bucket in HISTOGRAM_BUCKETS}
    for v in values:
        if v <= 3.0:
            hist["le_3"] += 1
        elif v <= 12.0:
            hist["in_3_12"] += 1
        else:
            hist["gt_12"] += 1
    return hist


# -- pipeline evaluation ---------------------------------------------------------------------


class SubstitutionStage(enum.Enum):
    """Stages that can be forced to ground truth, by their wire aliases."""

    BEST_IMAGE = "m1"
    SHADE_REGIONS = "m3"
    FINISH = "m5"

    @classmethod
    def parse(cls, token: str) -> "SubstitutionStage":
        t = token.strip().lower()
        aliases = {
            "m1": cls.BEST_IMAGE, "best-image": cls.BEST_IMAGE, "best_image": cls.BEST_IMAGE,
            "m3": cls.SHADE_REGIONS, "shade-regions": cls.SHADE_REGIONS,
            "shade_regions": cls.SHADE_REGIONS,
            "m5": cls.FINISH, "finish": cls.FINISH,
        }
        if t not in aliases:
            raise ValueError(f"unknown substitution stage {token!r}")
        return aliases[t]


@dataclass(frozen=True)
class MetricValue:
    mean: float
    count: int

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "count": self.count}


@dataclass
class BrandRow:
    brand: str
    product_count: int
    base_color_mean_delta_e: Optional[float]
    finish_macro_f1: Optional[float]
    format_macro_f1: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "brand": self.brand,
            "product_count": self.product_count,
            "base_color_mean_delta_e": self.base_color_mean_delta_e,
            "finish_macro_f1": self.finish_macro_f1,
            "format_macro_f1": self.format_macro_f1,
        }


@dataclass
class EvaluationReport:
    substituted: tuple[str, ...]  # wire aliases of stages consumed from ground truth
    product_count: int
    selection_accuracy: Optional[float]
    detection_map: Optional[float]
    format_f1: F1Scores
    format_confusion: ConfusionMatrix
    finish_f1: Optional[dict[str, F1Scores]]  # per stratum; None when finish substituted
    finish_confusion: Optional[ConfusionMatrix]
    base_color_delta_e: dict[str, MetricValue]  # per stratum
    base_color_histogram: dict[str, int]
    reflective_delta_e: Optional[MetricValue]
    reflective_histogram: dict[str, int]
    agreement: Optional[dict[str, dict[str, DistributionStats]]] = None
    fleiss: Optional[dict[str, Optional[float]]] = None  # per labeling task
    per_brand: Optional[list[BrandRow]] = None
    unmatched_shades: int = 0

    def to_json_dict(self) -> dict:
        d: dict = {
            "substituted": list(self.substituted),
            "product_count": self.product_count,
            "selection_accuracy": self.selection_accuracy,
            "detection_map": self.detection_map,
            "format_f1": self.format_f1.to_json_dict(),
            "format_confusion": self.format_confusion.to_json_dict(),
            "finish_f1": (
                {k: v.to_json_dict() for k, v in self.finish_f1.items()}
                if self.finish_f1 is not None else None
            ),
            "finish_confusion": (
                self.finish_confusion.to_json_dict()
                if self.finish_confusion is not None else None
            ),
            "base_color_delta_e": {k: v.to_json_dict()
                                   for k, v in self.base_color_delta_e.items()},
            "base_color_histogram": dict(self.base_color_histogram),
            "reflective_delta_e": (
                self.reflective_delta_e.to_json_dict()
                if self.reflective_delta_e is not None else None
            ),
            "reflective_histogram": dict(self.reflective_histogram),
            "unmatched_shades": self.unmatched_shades,
        }
        if self.agreement is not None:
            d["agreement"] = {
                stratum: {k: v.to_json_dict() for k, v in stats.items()}
                for stratum, stats in self.agreement.items()
            }
        if self.fleiss is not None:
            d["fleiss"] = dict(self.fleiss)
        if self.per_brand is not None:
            d["per_brand"] = [row.to_json_dict() for row in self.per_brand]
        return d


@dataclass
class _ProductScore:
    product: ProductRecord
    gt: MaterialProperties
    model_position: Optional[int] = None
    pred_format: Optional[Format] = None
    pred_boxes: Optional[list[BoundingBox]] = None
    # matched (gt_index, predicted color, predicted finish or None, reflective or None)
    pairs: list[tuple[int, RgbColor, Optional[FinishType], Optional[RgbColor]]] = \
        field(default_factory=list)
    unmatched: int = 0


def _match_regions(
    predicted: Sequence[BoundingBox], gt: Sequence[BoundingBox]
) -> list[Optional[int]]:
    """Greedy assignment of predicted regions to ground-truth shades.

    Predictions are visited in descending confidence; each claims the
    unmatched ground-truth box with the highest IoU at 0.5 or above. Returns
    a ground-truth index (or None) per prediction, in prediction order.
    """
    order = sorted(range(len(predicted)), key=lambda i: (-predicted[i].confidence, i))
    taken = [False] * len(gt)
    assigned: list[Optional[int]] = [None] * len(predicted)
    for i in order:
        best_iou, best_j = 0.0, -1
        for j, gt_box in enumerate(gt):
            if taken[j]:
                continue
            overlap = iou(predicted[i], gt_box)
            if overlap > best_iou:
                best_iou, best_j = overlap, j
        if best_j >= 0 and best_iou >= MATCH_IOU:
            taken[best_j] = True
            assigned[i] = best_j
    return assigned


def _score_product(
    product: ProductRecord,
    suite: PredictorSuite,
    loader: ImageLoader,
    config: PipelineConfig,
    substitution: frozenset[SubstitutionStage],
) -> _ProductScore:
    gt = product.ground_truth
    assert gt is not None
    score = _ProductScore(product=product, gt=gt)

    # best image: model choice is scored only when the stage runs
    if SubstitutionStage.BEST_IMAGE in substitution:
        position = gt.best_image_position
        image = loader.load(product.images[position].uri)
    else:
        choice, image = select_best_image(product, suite, loader)
        score.model_position = choice.position
        position = choice.position

    score.pred_format = Format(suite.classify_format(image, product.title).argmax())

    gt_regions = [s.region for s in gt.shades]
    if SubstitutionStage.SHADE_REGIONS in substitution:
        regions = list(gt_regions)
        assigned: list[Optional[int]] = list(range(len(regions)))
    else:
        boxes = [b for b in suite.detect_shades(image)
                 if b.confidence >= config.confidence_floor]
        score.pred_boxes = boxes
        count_dist = suite.classify_shade_count(image)
        regions = gate_regions(count_dist, boxes)
        assigned = _match_regions(regions, gt_regions)

    for i, region in enumerate(regions):
        gt_index = assigned[i]
        if gt_index is None:
            score.unmatched += 1
            continue
        crop = image.crop(region.shrunk(config.crop_shrink), name=f"{image.name}[{i}]")
        pred_color = suite.regress_base_color(crop).to_rgb()
        if SubstitutionStage.FINISH in substitution:
            pred_finish = None  # consumed from ground truth, not scored
            effective_finish = gt.shades[gt_index].finish
        else:
            pred_finish = FinishType(suite.classify_finish(crop).argmax())
            effective_finish = pred_finish
        reflective = None
        if effective_finish is FinishType.GLITTER:
            reflective = scale_reflective(suite.regress_reflective_color(crop)).to_rgb()
        score.pairs.append((gt_index, pred_color, pred_finish, reflective))
    return score


def evaluate_pipeline(
    store: CatalogStore,
    suite: PredictorSuite,
    loader: ImageLoader,
    substitution: Iterable[SubstitutionStage] = (),
    annotations: Sequence[ShadeAnnotation] | None = None,
    group_by_brand: bool = False,
    config: PipelineConfig | None = None,
    ids: Sequence[str] | None = None,
) -> EvaluationReport:
    """Score the pipeline against products that carry ground truth.

    Stages named in `substitution` consume ground-truth values instead of
    predictor output; downstream stages run unchanged, and the substituted
    stages are reported as absent (None) rather than perfectly scored.
    Ineligible-titled products are skipped the same way the pipeline would
    skip them.
    """
    config = config or PipelineConfig()
    substitution = frozenset(substitution)
    candidates = list(ids) if ids is not None else store.ids()

    scores: list[_ProductScore] = []
    for pid in candidates:
        product = store.get(pid)
        if product.ground_truth is None:
            continue
        if not eligibility_filter(product.title, config.keywords.rules).eligible:
            continue
        try:
            scores.append(_score_product(product, suite, loader, config, substitution))
        except (PredictorError, DecodeError) as exc:
            raise EvaluationError(f"scoring {pid} failed: {exc}") from exc
    if not scores:
        raise MissingGroundTruth("no product in scope carries ground truth")

    # selection accuracy
    sel_acc = None
    if SubstitutionStage.BEST_IMAGE not in substitution:
        model = [s.model_position for s in scores]
        human = [s.gt.best_image_position for s in scores]
        sel_acc = selection_accuracy(model, human)

    # detection mAP
    det_map = None
    if SubstitutionStage.SHADE_REGIONS not in substitution:
        predictions = {s.product.product_id: list(s.pred_boxes or []) for s in scores}
        truth = {s.product.product_id: [sh.region for sh in s.gt.shades] for s in scores}
        det_map = mean_average_precision(predictions, truth)

    # format
    format_confusion = ConfusionMatrix.empty([f.value for f in Format])
    for s in scores:
        format_confusion.add(s.gt.format.value, s.pred_format.value)
    format_f1 = f1_from_confusion(format_confusion)

    # per-shade metrics
    finish_conf_all = ConfusionMatrix.empty([f.value for f in FinishType])
    finish_conf: dict[str, ConfusionMatrix] = {
        s: ConfusionMatrix.empty([f.value for f in FinishType]) for s in STRATA
    }
    base_values: dict[str, list[float]] = {s: [] for s in STRATA}
    reflective_values: list[float] = []
    unmatched = 0
    for s in scores:
        stratum = "Single" if len(s.gt.shades) == 1 else "Multi"
        unmatched += s.unmatched
        for gt_index, pred_color, pred_finish, reflective in s.pairs:
            gt_shade = s.gt.shades[gt_index]
            d = delta_e(srgb_to_lab(gt_shade.base_color), srgb_to_lab(pred_color))
            base_values[stratum].append(d)
            base_values["All"].append(d)
            if pred_finish is not None:
                finish_conf_all.add(gt_shade.finish.value, pred_finish.value)
                finish_conf[stratum].add(gt_shade.finish.value, pred_finish.value)
                finish_conf["All"].add(gt_shade.finish.value, pred_finish.value)
            if reflective is not None and gt_shade.reflective_color is not None:
                reflective_values.append(
                    delta_e(srgb_to_lab(gt_shade.reflective_color), srgb_to_lab(reflective))
                )

    base_metrics = {
        stratum: MetricValue(mean=float(np.mean(vals)), count=len(vals))
        for stratum, vals in base_values.items() if vals
    }

    finish_f1 = None
    finish_confusion = None
    if SubstitutionStage.FINISH not in substitution:
        finish_confusion = finish_conf_all
        finish_f1 = {stratum: f1_from_confusion(m) for stratum, m in finish_conf.items()
                     if m.total > 0}

    reflective_metric = None
    if reflective_values:
        reflective_metric = MetricValue(mean=float(np.mean(reflective_values)),
                                        count=len(reflective_values))

    # annotator agreement
    agreement = None
    fleiss: Optional[dict[str, Optional[float]]] = None
    if annotations:
        predictions_by_shade: dict[tuple[str, int], RgbColor] = {}
        for s in scores:
            for gt_index, pred_color, _f, _r in s.pairs:
                predictions_by_shade[(s.product.product_id, gt_index)] = pred_color
        usable = [a for a in annotations
                  if a.colors is not None
                  and ((a.product_id, a.shade_index) in predictions_by_shade
                       or a.model_color is not None)]
        if usable:
            agreement = human_consistency(usable, predictions_by_shade)
        fleiss = {}
        for task, labels in (("format", [f.value for f in Format]),
                             ("finish", [f.value for f in FinishType])):
            table = []
            for ann in annotations:
                chosen = ann.format_labels if task == "format" else ann.finish_labels
                if not chosen:
                    continue
                row = [0] * len(labels)
                for label in chosen:
                    row[labels.index(label)] += 1
                table.append(row)
            if not table:
                continue
            try:
                fleiss[task] = fleiss_kappa(table, raters=ANNOTATOR_COUNT)
            except DegenerateAgreement:
                fleiss[task] = None

    per_brand = None
    if group_by_brand:
        per_brand = []
        brands = sorted({s.product.brand for s in scores})
        for brand in brands:
            rows = [s for s in scores if s.product.brand == brand]
            brand_base = [
                delta_e(srgb_to_lab(s.gt.shades[j].base_color), srgb_to_lab(color))
                for s in rows for j, color, _f, _r in s.pairs
            ]
            brand_format = ConfusionMatrix.empty([f.value for f in Format])
            brand_finish = ConfusionMatrix.empty([f.value for f in FinishType])
            for s in rows:
                brand_format.add(s.gt.format.value, s.pred_format.value)
                for j, _c, pf, _r in s.pairs:
                    if pf is not None:
                        brand_finish.add(s.gt.shades[j].finish.value, pf.value)
            per_brand.append(BrandRow(
                brand=brand,
                product_count=len(rows),
                base_color_mean_delta_e=float(np.mean(brand_base)) if brand_base else None,
                finish_macro_f1=(f1_from_confusion(brand_finish).macro
                                 if brand_finish.total else None),
                format_macro_f1=f1_from_confusion(brand_format).macro,
            ))

    return EvaluationReport(
        substituted=tuple(sorted(s.value for s in substitution)),
        product_count=len(scores),
        selection_accuracy=sel_acc,
        detection_map=det_map,
        format_f1=format_f1,
        format_confusion=format_confusion,
        finish_f1=finish_f1,
        finish_confusion=finish_confusion,
        base_color_delta_e=base_metrics,
        base_color_histogram=delta_e_histogram(base_values["All"]),
        reflective_delta_e=reflective_metric,
        reflective_histogram=delta_e_histogram(reflective_values),
        agreement=agreement,
        fleiss=fleiss,
        per_brand=per_brand,
        unmatched_shades=unmatched,
    )
