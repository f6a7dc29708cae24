import json
import sys
import textwrap

import numpy as np
import pytest

from mpe.boxes import BoundingBox, iou
from mpe.colors import NormalizedRgb, RgbColor, delta_e, srgb_to_lab
from mpe.images import ImageData
from mpe.predictors import (
    AdapterSuite,
    ClassDistribution,
    HeuristicSuite,
    PredictorError,
    ScriptedSuite,
    UnknownBackend,
    UnscriptedQuery,
    create_suite,
)
from synth import solid_image, speckled_crop, swatch_grid


class TestClassDistribution:
    def test_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ClassDistribution({"A": 0.5, "B": 0.2})

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ClassDistribution({"A": 1.2, "B": -0.2})

    def test_argmax_lexicographic_tie(self):
        d = ClassDistribution({"Zeta": 0.4, "Alpha": 0.4, "Mid": 0.2})
        assert d.argmax() == "Alpha"

    def test_point_mass(self):
        d = ClassDistribution.point_mass("Cream", ("Powder", "Cream", "Stick", "Liquid"))
        assert d.argmax() == "Cream"
        assert d.prob("Powder") == 0.0


class TestScriptedSuite:
    def test_replays_verbatim(self):
        suite = ScriptedSuite(
            preferences={("b.png", "a.png"): (True, 0.9)},
            finishes={"a.png[0]": ClassDistribution({"Glitter": 0.8, "Shimmer": 0.2,
                                                     "Matte": 0.0, "Metallic": 0.0})},
            base_colors={"a.png[0]": NormalizedRgb(0.2, 0.4, 0.6)},
        )
        cand = solid_image("#112233", name="b.png")
        ref = solid_image("#112233", name="a.png")
        pref = suite.prefer_image(cand, ref)
        assert (pref.preferred, pref.confidence) == (True, 0.9)
        crop = solid_image("#112233", name="a.png[0]")
        assert suite.classify_finish(crop).argmax() == "Glitter"
        assert suite.regress_base_color(crop) == NormalizedRgb(0.2, 0.4, 0.6)

    def test_unscripted_query_errors(self):
        suite = ScriptedSuite()
        with pytest.raises(UnscriptedQuery):
            suite.detect_shades(solid_image("#112233", name="never-scripted"))

    def test_fixture_file_round_trip(self, tmp_path):
        fixture = {
            "preferences": [
                {"candidate": "img1", "reference": "img0", "preferred": True, "confidence": 0.7}
            ],
            "detections": {"img1": [{"cx": 0.5, "cy": 0.5, "w": 0.4, "h": 0.4,
                                     "confidence": 0.9}]},
            "shade_counts": {"img1": {"Single": 0.95, "Multi": 0.05}},
            "formats": {"img1": {"Cream": 1.0, "Powder": 0.0, "Stick": 0.0, "Liquid": 0.0}},
            "base_colors": {"img1[0]": [0.2, 0.4, 0.6]},
        }
        path = tmp_path / "fixture.json"
        path.write_text(json.dumps(fixture))
        suite = create_suite("scripted", {"fixture": str(path)})
        img = solid_image("#000000", name="img1")
        assert suite.classify_shade_count(img).argmax() == "Single"
        assert suite.classify_format(img, "anything").argmax() == "Cream"
        boxes = suite.detect_shades(img)
        assert boxes == [BoundingBox(0.5, 0.5, 0.4, 0.4, 0.9)]


GRID_COLORS = ["#CC2222", "#2266CC", "#22AA44", "#AA22AA"]


class TestHeuristicDetection:
    def setup_method(self):
        self.suite = HeuristicSuite()

    def test_four_swatches_on_white(self):
        image, planted = swatch_grid(GRID_COLORS, rows=2, cols=2, name="grid4")
        boxes = self.suite.detect_shades(image)
        assert len(boxes) == 4
        for want in planted:
            best = max(iou(want, got) for got in boxes)
            assert best >= 0.7

    def test_blank_image_empty(self):
        assert self.suite.detect_shades(solid_image("#FFFFFF", name="blank")) == []

    def test_single_centered_swatch(self):
        image, planted = swatch_grid(["#884422"], rows=1, cols=1, name="grid1")
        boxes = self.suite.detect_shades(image)
        assert len(boxes) == 1
        box = boxes[0]
        want = planted[0]
        assert box.left <= want.cx <= box.right
        assert box.top <= want.cy <= box.bottom

    def test_boxes_sorted_by_confidence(self):
        image, _ = swatch_grid(GRID_COLORS, rows=2, cols=2, name="grid4b", noise=2,
                               rng=np.random.default_rng(5))
        boxes = self.suite.detect_shades(image)
        confs = [b.confidence for b in boxes]
        assert confs == sorted(confs, reverse=True)

    def test_deterministic(self):
        image, _ = swatch_grid(GRID_COLORS, rows=2, cols=2, name="same", noise=3,
                               rng=np.random.default_rng(9))
        assert self.suite.detect_shades(image) == self.suite.detect_shades(image)


class TestHeuristicPreference:
    def setup_method(self):
        self.suite = HeuristicSuite()

    def test_identical_images_not_preferred(self):
        image, _ = swatch_grid(GRID_COLORS, 2, 2, name="same")
        assert not self.suite.prefer_image(image, image).preferred

    def test_more_swatches_preferred(self):
        one, _ = swatch_grid(["#884422"], 1, 1, name="one")
        four, _ = swatch_grid(GRID_COLORS, 2, 2, name="four")
        result = self.suite.prefer_image(four, one)
        assert result.preferred
        assert 0.0 < result.confidence <= 1.0


class TestHeuristicShadeCount:
    def setup_method(self):
        self.suite = HeuristicSuite()

    def test_single_blob(self):
        image, _ = swatch_grid(["#884422"], 1, 1, name="single")
        assert self.suite.classify_shade_count(image).argmax() == "Single"

    def test_many_blobs(self):
        colors = ["#CC2222", "#2266CC", "#22AA44", "#AA22AA"] * 3
        image, _ = swatch_grid(colors, rows=3, cols=4, size=(192, 256), name="many")
        assert self.suite.classify_shade_count(image).argmax() == "Multi"


class TestHeuristicFormat:
    def setup_method(self):
        self.suite = HeuristicSuite()
        self.image = solid_image("#808080", name="any")

    def test_liquid_cue(self):
        d = self.suite.classify_format(self.image, "Vivid Liquid Eyeshadow, waterproof")
        assert d.argmax() == "Liquid"

    def test_no_cue_falls_back_to_catalog_prior(self):
        d = self.suite.classify_format(self.image, "Twilight Dreams Eyeshadow 12 colors")
        assert d.argmax() == "Powder"

    def test_stick_cue(self):
        assert self.suite.classify_format(self.image, "Shimmer stick duo").argmax() == "Stick"


class TestHeuristicFinish:
    def setup_method(self):
        self.suite = HeuristicSuite()

    def test_flat_crop_is_matte(self):
        assert self.suite.classify_finish(solid_image("#884422")).argmax() == "Matte"

    def test_speckled_crop_never_matte(self):
        crop = speckled_crop("#332211", fraction=0.05)
        got = self.suite.classify_finish(crop).argmax()
        assert got in ("Glitter", "Shimmer")

    def test_dense_speckle_leans_glitter(self):
        crop = speckled_crop("#202020", fraction=0.08, rng=np.random.default_rng(3))
        assert self.suite.classify_finish(crop).argmax() == "Glitter"


class TestHeuristicColors:
    def setup_method(self):
        self.suite = HeuristicSuite()

    def test_solid_crop_base_color(self):
        got = self.suite.regress_base_color(solid_image("#3366CC")).to_rgb()
        want = RgbColor.from_hex("#3366CC")
        assert delta_e(srgb_to_lab(got), srgb_to_lab(want)) <= 2.0

    def test_salted_crop_base_color(self):
        crop = speckled_crop("#3366CC", fraction=0.05, rng=np.random.default_rng(1))
        got = self.suite.regress_base_color(crop).to_rgb()
        want = RgbColor.from_hex("#3366CC")
        assert delta_e(srgb_to_lab(got), srgb_to_lab(want)) <= 4.0

    def test_reflective_brighter_than_base(self):
        crop = speckled_crop("#443322", speckle_hex="#FFEEDD", fraction=0.1)
        base = self.suite.regress_base_color(crop)
        reflective = self.suite.regress_reflective_color(crop)
        assert reflective.r >= base.r
        assert reflective.g >= base.g
        assert reflective.b >= base.b


ADAPTER_BACKEND = textwrap.dedent(
    """
    import json, sys

    def main():
        fixture = json.load(open(sys.argv[1]))
        line = sys.stdin.readline().strip()
        if line != "MPEPRED1":
            sys.exit(2)
        sys.stdout.write("MPEPRED1\\n")
        sys.stdout.flush()
        for line in sys.stdin:
            req = json.loads(line)
            op = req["op"]
            resp = {"id": req["id"]}
            if op == "detect_shades":
                resp["result"] = {"boxes": fixture["boxes"]}
            elif op == "prefer_image":
                resp["result"] = {"preferred": True, "confidence": 0.9}
            elif op in ("classify_shade_count", "classify_format", "classify_finish"):
                resp["result"] = {"distribution": fixture["distribution"][op]}
            elif op in ("regress_base_color", "regress_reflective_color"):
                resp["result"] = {"rgb": fixture["rgb"]}
            else:
                resp["error"] = "unknown op " + op
            sys.stdout.write(json.dumps(resp) + "\\n")
            sys.stdout.flush()

    main()
    """
)


@pytest.fixture
def adapter_backend(tmp_path):
    script = tmp_path / "backend.py"
    script.write_text(ADAPTER_BACKEND)
    fixture = {
        "boxes": [{"cx": 0.5, "cy": 0.5, "w": 0.2, "h": 0.2, "confidence": 0.8}],
        "distribution": {
            "classify_shade_count": {"Single": 0.9, "Multi": 0.1},
            "classify_format": {"Powder": 0.7, "Stick": 0.1, "Cream": 0.1, "Liquid": 0.1},
            "classify_finish": {"Matte": 0.6, "Shimmer": 0.4, "Metallic": 0.0, "Glitter": 0.0},
        },
        "rgb": [0.25, 0.5, 0.75],
    }
    fixture_path = tmp_path / "fixture.json"
    fixture_path.write_text(json.dumps(fixture))
    return [sys.executable, str(script), str(fixture_path)]


class TestAdapterSuite:
    def test_round_trip(self, adapter_backend, tmp_path):
        img_path = tmp_path / "img.png"
        from PIL import Image

        Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(img_path)
        image = ImageData.load(img_path)
        with AdapterSuite(command=adapter_backend) as suite:
            boxes = suite.detect_shades(image)
            assert boxes == [BoundingBox(0.5, 0.5, 0.2, 0.2, 0.8)]
            assert suite.classify_shade_count(image).argmax() == "Single"
            assert suite.regress_base_color(image) == NormalizedRgb(0.25, 0.5, 0.75)
            pref = suite.prefer_image(image, image)
            assert pref.preferred and pref.confidence == 0.9

    def test_in_memory_crop_goes_via_temp_file(self, adapter_backend):
        crop = solid_image("#112233", name="mem-crop")
        assert crop.path is None
        with AdapterSuite(command=adapter_backend) as suite:
            assert suite.regress_base_color(crop) == NormalizedRgb(0.25, 0.5, 0.75)

    def test_handshake_mismatch(self, tmp_path):
        script = tmp_path / "bad.py"
        script.write_text("import sys; sys.stdin.readline(); print('NOPE'); sys.stdout.flush()")
        with pytest.raises(PredictorError):
            AdapterSuite(command=[sys.executable, str(script)])


class TestRegistry:
    def test_heuristic_with_params(self):
        suite = create_suite("heuristic", {"matte_sigma_max": 5.0})
        assert suite.config.matte_sigma_max == 5.0

    def test_unknown_backend(self):
        with pytest.raises(UnknownBackend):
            create_suite("cnn-magic")

    def test_scripted_requires_fixture(self):
        with pytest.raises(UnknownBackend):
            create_suite("scripted")
