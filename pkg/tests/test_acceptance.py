"""Acceptance suite: one test per release criterion, each at its stated
tolerance and runtime budget. Run with `pytest tests/test_acceptance.py -v -s`
to see the per-criterion pass lines."""

import math
import time

import numpy as np
import pytest
from PIL import Image

from mpe.boxes import BoundingBox
from mpe.catalog import CatalogStore, Category, ImageRef, ProductRecord
from mpe.colors import (
    LabColor,
    NormalizedRgb,
    RgbColor,
    delta_e,
    dominant_colors,
    scale_reflective,
    srgb_to_lab,
)
from mpe.evaluation import (
    DegenerateAgreement,
    delta_e_histogram,
    fleiss_kappa,
    human_consistency,
    mean_average_precision,
)
from mpe.annotations import ShadeAnnotation
from mpe.images import ImageData, MemoryImages
from mpe.keywords import KeywordConfig, eligibility_filter
from mpe.matching import MatchMaker, MatchQuery
from mpe.pipeline import ExtractionStatus, extract, extract_batch
from mpe.predictors import ClassDistribution, HeuristicSuite, ScriptedSuite
from mpe.predictors.base import FINISH_LABELS, FORMAT_LABELS
from mpe.properties import FinishType, Format, MaterialProperties, ShadeProperties
from synth import swatch_grid
from test_colors import LAB_REFERENCE
from test_evaluation import oracle_map, random_detection_fixture


def _pass(name: str) -> None:
    print(f"[PASS] {name}")


class Budget:
    def __init__(self, seconds: float, name: str):
        self.seconds = seconds
        self.name = name

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, *exc):
        elapsed = time.perf_counter() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, \
                f"{self.name} took {elapsed:.2f}s, budget {self.seconds}s"


def test_reflective_scaling_affine_map():
    """Reflective scaling: 1,000 random triples, 0.4x + 0.6 within 1e-12,
    range within [0.6, 1.0], in under a second."""
    rng = np.random.default_rng(2024)
    with Budget(1.0, "reflective scaling"):
        for _ in range(1000):
            r, g, b = rng.uniform(0, 1, size=3)
            out = scale_reflective(NormalizedRgb(float(r), float(g), float(b)))
            for got, x in zip(out.as_tuple(), (r, g, b)):
                assert abs(got - (0.4 * x + 0.6)) <= 1e-12
                assert 0.6 - 1e-12 <= got <= 1.0 + 1e-12
    _pass("reflective scaling: affine map exact, range [0.6, 1.0]")


def test_color_oracle():
    """srgb_to_lab matches the independent reference table on 16 canonical
    colors within 0.05 per component; delta_e is Euclidean within 1e-9 on
    10,000 random Lab pairs. Under 5 seconds."""
    assert len(LAB_REFERENCE) >= 12
    with Budget(5.0, "color oracle"):
        for hex_code, (L, a, b) in LAB_REFERENCE:
            lab = srgb_to_lab(RgbColor.from_hex(hex_code))
            assert abs(lab.L - L) <= 0.05, hex_code
            assert abs(lab.a - a) <= 0.05, hex_code
            assert abs(lab.b - b) <= 0.05, hex_code
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            x = LabColor(float(rng.uniform(0, 100)), float(rng.uniform(-128, 128)),
                         float(rng.uniform(-128, 128)))
            y = LabColor(float(rng.uniform(0, 100)), float(rng.uniform(-128, 128)),
                         float(rng.uniform(-128, 128)))
            want = math.sqrt((x.L - y.L) ** 2 + (x.a - y.a) ** 2 + (x.b - y.b) ** 2)
            assert abs(delta_e(x, y) - want) <= 1e-9
    _pass("color oracle: reference table within 0.05, Euclidean deltaE within 1e-9")


def test_histogram_bucket_semantics():
    """3.0 lands in the inclusive low bucket, 12.0 in the middle bucket."""
    hist = delta_e_histogram([3.0, 12.0])
    assert hist == {"le_3": 1, "in_3_12": 1, "gt_12": 0}
    _pass("deltaE histogram: 3.0 in [0,3], 12.0 in (3,12]")


def _match_fixture_catalog(n_products=250, shades_per_product=2, seed=42):
    rng = np.random.default_rng(seed)
    store = CatalogStore()
    for i in range(n_products):
        pid = f"p{i:04d}"
        shades = tuple(
            ShadeProperties(
                region=BoundingBox(0.5, 0.5, 0.4, 0.4, 0.9),
                base_color=RgbColor(int(rng.integers(256)), int(rng.integers(256)),
                                    int(rng.integers(256))),
                finish=FinishType.MATTE,
            )
            for _ in range(shades_per_product)
        )
        store.ingest([ProductRecord(
            product_id=pid, title="Fixture Shadow", category=Category.EYESHADOW,
            brand="Lumina", images=(ImageRef(0, f"{pid}.png", 8, 8),),
        )])
        store.set_extracted(pid, MaterialProperties(format=Format.POWDER, shades=shades))
    return store, rng


def test_matchmaker_oracle_equivalence():
    """similar_shades equals a brute-force scan (deltaE <= 10 filter, ascending
    sort) on a 500-shade catalog for 50 random queries, in under 10 seconds."""
    store, rng = _match_fixture_catalog()
    matcher = MatchMaker(store)
    with Budget(10.0, "matchmaker oracle"):
        for _ in range(50):
            color = RgbColor(int(rng.integers(256)), int(rng.integers(256)),
                             int(rng.integers(256)))
            got = matcher.similar_shades(MatchQuery(
                source=color, target_category=Category.EYESHADOW,
                max_delta_e=10.0, limit=10_000,
            ))
            # brute force: every shade, filter, sort
            target = srgb_to_lab(color)
            rows = []
            for pid in sorted(store.ids()):
                props = store.effective_properties(pid)
                for idx, s in enumerate(props.shades):
                    d = delta_e(target, srgb_to_lab(s.base_color))
                    if d <= 10.0:
                        rows.append((d, pid, idx))
            rows.sort()
            assert [(r.score, r.product_id, r.shade_index) for r in got] == rows
    _pass("matchmaker: equals brute-force scan on 50 queries over 500 shades")


def test_pipeline_gating_properties():
    """1,000 randomized scripted pipelines: glitter-iff-reflective holds and a
    Single verdict over multiple boxes keeps exactly the top-confidence box."""
    rng = np.random.default_rng(9)
    white = np.full((16, 16, 3), 255, dtype=np.uint8)
    violations = 0
    for case in range(1000):
        uri = f"case{case}.png"
        n_boxes = int(rng.integers(1, 7))
        xs = np.linspace(0.15, 0.85, n_boxes)
        confs = rng.uniform(0.3, 1.0, size=n_boxes)
        confs = np.round(confs, 6)
        while len(set(confs)) < n_boxes:  # unique so "the max" is well defined
            confs = np.round(rng.uniform(0.3, 1.0, size=n_boxes), 6)
        boxes = [BoundingBox(float(x), 0.5, 0.1, 0.2, float(c))
                 for x, c in zip(xs, confs)]
        single = bool(rng.random() < 0.5)
        count_dist = ClassDistribution({"Single": 0.9 if single else 0.1,
                                        "Multi": 0.1 if single else 0.9})
        finishes, bases, reflectives = {}, {}, {}
        expected_regions = [max(boxes, key=lambda b: b.confidence)] if (
            single and n_boxes > 1) else boxes
        for i in range(len(expected_regions)):
            crop = f"{uri}[{i}]"
            finish = FINISH_LABELS[int(rng.integers(4))]
            finishes[crop] = ClassDistribution.point_mass(finish, FINISH_LABELS)
            bases[crop] = NormalizedRgb(*(float(v) for v in rng.uniform(0, 1, 3)))
            reflectives[crop] = NormalizedRgb(*(float(v) for v in rng.uniform(0, 1, 3)))
        suite = ScriptedSuite(
            formats={uri: ClassDistribution.point_mass("Powder", FORMAT_LABELS)},
            detections={uri: boxes},
            shade_counts={uri: count_dist},
            finishes=finishes, base_colors=bases, reflective_colors=reflectives,
        )
        product = ProductRecord(
            product_id=f"case{case}", title="Fixture Shadow",
            category=Category.EYESHADOW,
            images=(ImageRef(0, uri, 16, 16),),
        )
        outcome = extract(product, suite, MemoryImages({uri: ImageData(uri, white)}))
        assert outcome.status is ExtractionStatus.EXTRACTED
        shades = outcome.properties.shades
        for shade in shades:
            if (shade.finish is FinishType.GLITTER) != (shade.reflective_color is not None):
                violations += 1
        if single and n_boxes > 1:
            if len(shades) != 1 or shades[0].region != max(boxes, key=lambda b: b.confidence):
                violations += 1
        else:
            if [s.region for s in shades] != boxes:
                violations += 1
    assert violations == 0
    _pass("pipeline gating: glitter-iff-reflective and single-box gate, 1,000 cases")


def test_map_oracle():
    """Artifact mAP equals the brute-force evaluator on 200 synthetic images
    within 1e-9; the single-box IoU-0.60 case is exactly 0.3. Under 30s."""
    with Budget(30.0, "mAP oracle"):
        rng = np.random.default_rng(1234)
        preds, gt = random_detection_fixture(200, rng, max_boxes=20)
        got = mean_average_precision(preds, gt)
        want = oracle_map(preds, gt)
        assert abs(got - want) <= 1e-9
        # exact-binary construction: intersection 0.1875, union 0.3125, IoU 0.6
        single = mean_average_precision(
            {"a": [BoundingBox(0.625, 0.5, 0.5, 0.5, 1.0)]},
            {"a": [BoundingBox(0.5, 0.5, 0.5, 0.5)]},
        )
        assert single == 0.3
    _pass("mAP: equals brute force on 200 images, IoU-0.60 case exactly 0.3")


def test_fleiss_kappa_criteria():
    """Perfect nondegenerate agreement is exactly 1.0; the published worked
    example reproduces within 1e-3; a degenerate table raises."""
    assert fleiss_kappa([[4, 0, 0], [0, 4, 0], [0, 0, 4]], raters=4) == 1.0
    worked = [
        [0, 0, 0, 0, 14], [0, 2, 6, 4, 2], [0, 0, 3, 5, 6], [0, 3, 9, 2, 0],
        [2, 2, 8, 1, 1], [7, 7, 0, 0, 0], [3, 2, 6, 3, 0], [2, 5, 3, 2, 2],
        [6, 5, 2, 1, 0], [0, 2, 2, 3, 7],
    ]
    assert fleiss_kappa(worked, raters=14) == pytest.approx(0.20993070442195524,
                                                            abs=1e-3)
    with pytest.raises(DegenerateAgreement):
        fleiss_kappa([[5, 0], [5, 0], [5, 0]], raters=5)
    _pass("Fleiss kappa: perfect=1.0, worked example within 1e-3, degenerate raises")


def test_human_consistency_criteria():
    """200-shade random fixture matches an independent per-shade recomputation
    within 1e-9; the identical-annotation fixture yields all zeros."""
    rng = np.random.default_rng(77)

    def random_color():
        return RgbColor(int(rng.integers(256)), int(rng.integers(256)),
                        int(rng.integers(256)))

    annotations = []
    for i in range(200):
        annotations.append(ShadeAnnotation(
            product_id=f"p{i // 2}", shade_index=i % 2,
            colors=(random_color(), random_color(), random_color()),
            model_color=random_color(),
        ))
    stats = human_consistency(annotations)

    hc, ml = [], []
    for ann in annotations:
        l1, l2, l3 = (srgb_to_lab(c) for c in ann.colors)
        lm = srgb_to_lab(ann.model_color)
        hc.append(delta_e(l1, l2) + delta_e(l1, l3) + delta_e(l2, l3))
        ml.append(delta_e(l1, lm) + delta_e(l2, lm) + delta_e(l3, lm))
    for series, key in ((hc, "d_hc"), (ml, "d_ml")):
        mean = sum(series) / len(series)
        var = sum((v - mean) ** 2 for v in series) / len(series)
        assert abs(stats["All"][key].mean - mean) <= 1e-9
        assert abs(stats["All"][key].variance - var) <= 1e-9

    same = RgbColor.from_hex("#806040")
    identical = [ShadeAnnotation(product_id="q", shade_index=0,
                                 colors=(same, same, same), model_color=same)]
    zero = human_consistency(identical)
    assert zero["All"]["d_hc"].mean == 0.0
    assert zero["All"]["d_ml"].mean == 0.0
    assert zero["All"]["d_hc"].variance == 0.0
    _pass("human consistency: matches independent recomputation within 1e-9")


def _heuristic_batch_fixture(n_products=50, seed=3):
    rng = np.random.default_rng(seed)
    store = CatalogStore()
    loader = MemoryImages()
    palette = ["#AA3344", "#3366AA", "#44AA66", "#AA8833", "#7744AA", "#33AAAA"]
    for i in range(n_products):
        pid = f"p{i:03d}"
        uri = f"{pid}.png"
        n = int(rng.integers(1, 5))
        colors = [palette[int(rng.integers(len(palette)))] for _ in range(n)]
        rows = 1 if n <= 2 else 2
        cols = math.ceil(n / rows)
        while rows * cols > n:
            colors.append(palette[int(rng.integers(len(palette)))])
            n = len(colors)
        image, _ = swatch_grid(colors, rows, cols, size=(96, 96), noise=2,
                               rng=np.random.default_rng(1000 + i), name=uri)
        loader.add(uri, image)
        store.ingest([ProductRecord(
            product_id=pid, title="Matte Powder Eyeshadow Palette",
            category=Category.EYESHADOW, brand="Lumina",
            images=(ImageRef(0, uri, 96, 96),),
        )])
    return store, loader


def test_end_to_end_determinism():
    """extract_batch at parallelism 1 and 8 produces byte-identical outputs on
    50 products with the heuristic backend, in under 60 seconds."""
    store, loader = _heuristic_batch_fixture()
    suite = HeuristicSuite()
    ids = store.ids()
    with Budget(60.0, "end-to-end determinism"):
        seq = extract_batch(store, ids, suite, loader, parallelism=1)
        par = extract_batch(store, ids, suite, loader, parallelism=8)
    seq_bytes = {pid: out.to_json().encode() for pid, out in seq.items()}
    par_bytes = {pid: out.to_json().encode() for pid, out in par.items()}
    assert seq_bytes == par_bytes
    extracted = sum(1 for o in seq.values() if o.status is ExtractionStatus.EXTRACTED)
    assert extracted == len(ids)
    _pass("end-to-end determinism: parallelism 1 vs 8 byte-identical on 50 products")


def test_reference_backend_sanity():
    """Heuristic backend on planted synthetics: detection mAP >= 0.7, solid
    crop base color within deltaE 2, k-means palettes within deltaE 2 and
    weight 0.02."""
    suite = HeuristicSuite()
    rng = np.random.default_rng(11)
    palette = ["#AA3344", "#3366AA", "#44AA66", "#AA8833"]

    predictions, truth = {}, {}
    for i in range(20):
        name = f"sanity{i}.png"
        n = int(rng.integers(1, 5))
        colors = [palette[int(rng.integers(len(palette)))] for _ in range(4)][:4]
        image, planted = swatch_grid(colors[: max(1, n)], 1, max(1, n),
                                     size=(80, 80 * max(1, n)), noise=3,
                                     rng=np.random.default_rng(500 + i), name=name)
        predictions[name] = suite.detect_shades(image)
        truth[name] = planted
    sanity_map = mean_average_precision(predictions, truth)
    assert sanity_map >= 0.7, f"detection mAP {sanity_map:.3f} below 0.7"

    solid = ImageData("solid", np.full((32, 32, 3), (51, 102, 204), dtype=np.uint8))
    got = suite.regress_base_color(solid).to_rgb()
    assert delta_e(srgb_to_lab(got), srgb_to_lab(RgbColor(51, 102, 204))) <= 2.0

    planted_palette = [("#C03020", 0.6), ("#2060C0", 0.3), ("#F0E040", 0.1)]
    pixels = []
    for hex_code, frac in planted_palette:
        c = RgbColor.from_hex(hex_code)
        noise = rng.integers(-3, 4, size=(int(frac * 4000), 3))
        pixels.append(np.clip(np.array([c.r, c.g, c.b]) + noise, 0, 255))
    result = dominant_colors(np.concatenate(pixels), k=3)
    assert len(result) == 3
    for got_wc, (hex_code, frac) in zip(result, planted_palette):
        d = delta_e(srgb_to_lab(got_wc.color), srgb_to_lab(RgbColor.from_hex(hex_code)))
        assert d <= 2.0
        assert abs(got_wc.weight - frac) <= 0.02
    _pass("reference backend: mAP >= 0.7 on synthetics, colors and palettes in tolerance")


INELIGIBLE_TITLES = [
    # multichrome and variants
    "Multichrome Eyeshadow Duo",
    "MULTICHROME shifter single pan",
    "Multi-chrome pressed pigment",
    "multi chrome shift topper",
    "Multichromes collection vol 2",
    "Galaxy multi-chrome loose pigment",
    "Shifting multichrome gel shadow",
    "Prismatic multi chrome palette",
    "Cosmic Multichrome Shadow Stick",
    "Hyper multi-chrome glitter gel",
    # iridescence and variants
    "Iridescent Topper Shade",
    "Pure Iridescence Gel",
    "Iridescent duo chrome veil",
    "Aurora iridescent overlay shadow",
    "Soft iridescence cream pot",
    "IRIDESCENT fairy dust pigment",
    "Opal iridescent shimmer topper",
    "Iridescence infused primer shadow",
    # makeup kit and variants
    "Eyeshadow Makeup Kit 24pc",
    "Complete makeup kit with brushes",
    "Travel Makeup Kits for teens",
    "Pro eyeshadow kit 12 colors plus primer",
    "Glam cosmetic kit all-in-one",
    "Starter eye makeup kit",
    "Deluxe makeup kit gift set",
    "Mini eyeshadow kit trio pack",
    # makeup organizer and variants
    "Acrylic Makeup Organizer with drawers",
    "Rotating makeup organizer tower",
    "Marble makeup organizers set of two",
    "Clear eyeshadow organizer tray",
    "Vanity makeup organizer station",
    "Bamboo cosmetic organizer box",
    "Stackable makeup organizer drawers",
    "Desk makeup organizer caddy",
    # neon / fluorescent type listings
    "Neon pigment pressed palette",
    "UV fluorescent eyeshadow set",
    "Florescent bright shadow pots",
    "Neon dreams liner and shadow",
    "Fluorescence glow powder",
    "Blacklight neon face pigment",
]

CLEAN_TITLES = [
    "Matte Powder Eyeshadow Palette, 12 Shades",
    "Velvet cream shadow single",
    "Silk stick eyeshadow nude",
    "Liquid metal shadow bronze",
    "Satin finish pressed shadow",
    "Warm brown quad palette",
    "Shimmer duo rose gold",
    "Smokey night palette 6 colors",
    "Everyday nudes shadow palette",
    "Glitter topper champagne",
    "Metallic foil shadow copper",
    "Soft matte beige single pan",
    "Terracotta sunset palette",
    "Midnight blue velvet shadow",
    "Brush cleaning kit",
    "Survival kit for hikers",
    "Desk cable organizer",
    "Closet shoe organizer rack",
    "Waterproof liquid eyeliner black",
    "Long-wear cream shadow taupe",
    "Pressed pearl shadow ivory",
    "Baked shadow trio sunset",
    "Mauve matte single shadow",
    "Forest green stick shadow",
    "Champagne shimmer single",
    "Duo brow powder kit-free refill",
    "Loose pigment bronze dust",
    "Buildable satin shadow almond",
    "Creamy shadow pot caramel",
    "Espresso matte liner shadow",
    "Golden hour palette 9 pan",
    "Slate gray pressed shadow",
    "Rosewood velvet quad",
    "Icy lilac shimmer pan",
    "Pumpkin spice mini palette",
    "Cocoa butter cream shadow",
    "Feather soft blending shadow",
    "Twilight mauve duo",
    "Classic neutrals 18 pan palette",
    "Sandstone matte trio",
]


def test_eligibility_filter_fixture():
    """All canonical keywords and configured variants fire on 40 ineligible
    titles; 40 clean titles pass with zero false positives."""
    rules = KeywordConfig.default().rules
    assert len(INELIGIBLE_TITLES) == 40
    assert len(CLEAN_TITLES) == 40
    for title in INELIGIBLE_TITLES:
        verdict = eligibility_filter(title, rules)
        assert not verdict.eligible, f"missed: {title!r}"
        assert verdict.matched_keyword
    for title in CLEAN_TITLES:
        verdict = eligibility_filter(title, rules)
        assert verdict.eligible, \
            f"false positive on {title!r}: {verdict.matched_keyword}"
    _pass("eligibility filter: 40/40 ineligible caught, 0/40 false positives")
