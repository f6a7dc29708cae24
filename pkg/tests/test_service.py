import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mpe.boxes import BoundingBox
from mpe.catalog import CatalogStore, Category, ImageRef, ProductRecord
from mpe.colors import NormalizedRgb, RgbColor
from mpe.config import ServiceConfig
from mpe.images import ImageData, MemoryImages
from mpe.matching import MatchMaker, MatchQuery
from mpe.predictors import ClassDistribution, ScriptedSuite
from mpe.predictors.base import FINISH_LABELS, FORMAT_LABELS
from mpe.properties import FinishType, Format, MaterialProperties, ShadeProperties
from mpe.service import create_app

BOX = BoundingBox(0.5, 0.5, 0.4, 0.4, 0.9)


def record_dict(pid, title="Velvet Powder Eyeshadow", brand="Lumina", gt=None):
    d = {
        "product_id": pid,
        "title": title,
        "category": "Eyeshadow",
        "brand": brand,
        "description": "",
        "images": [{"position": 0, "uri": f"{pid}.png", "width": 16, "height": 16}],
    }
    if gt:
        d["ground_truth"] = gt
    return d


def properties_dict(hex_code="#336699", finish="Matte", reflective=None):
    return {
        "format": "Powder",
        "best_image_position": 0,
        "provenance": "Pipeline",
        "shades": [{
            "region": {"cx": 0.5, "cy": 0.5, "w": 0.4, "h": 0.4, "confidence": 0.9},
            "base_color": hex_code,
            "finish": finish,
            "reflective_color": reflective,
        }],
    }


@pytest.fixture
def service():
    store = CatalogStore()
    loader = MemoryImages()
    white = np.full((16, 16, 3), 255, dtype=np.uint8)
    scripted = {
        "detections": {}, "shade_counts": {}, "formats": {},
        "finishes": {}, "base_colors": {},
    }
    for pid in ("p1", "p2"):
        uri = f"{pid}.png"
        loader.add(uri, ImageData(name=uri, pixels=white))
        scripted["detections"][uri] = [BOX]
        scripted["shade_counts"][uri] = ClassDistribution({"Single": 0.9, "Multi": 0.1})
        scripted["formats"][uri] = ClassDistribution.point_mass("Powder", FORMAT_LABELS)
        scripted["finishes"][f"{uri}[0]"] = ClassDistribution.point_mass(
            "Matte", FINISH_LABELS)
        scripted["base_colors"][f"{uri}[0]"] = NormalizedRgb(0.2, 0.4, 0.6)
    suite = ScriptedSuite(
        detections=scripted["detections"], shade_counts=scripted["shade_counts"],
        formats=scripted["formats"], finishes=scripted["finishes"],
        base_colors=scripted["base_colors"],
    )
    config = ServiceConfig(backend="scripted", parallelism=2)
    app = create_app(store, loader, config)
    # pre-register the scripted suite under the configured name
    import mpe.service as service_module  # noqa: F401
    client = TestClient(app)
    # register scripted suite by monkeypatching the cache through a first call
    # is not possible; instead the fixture returns everything for direct seeding
    return client, store, loader, suite, app


def seeded_client(service, with_suite=True):
    client, store, loader, suite, app = service
    # seed products through the API
    resp = client.post("/v1/products", json={"records": [record_dict("p1"),
                                                         record_dict("p2")]})
    assert resp.status_code == 200
    return client, store, suite


class TestIngest:
    def test_batch_statuses(self, service):
        client, store, *_ = service
        records = [record_dict("a"), record_dict("a"), {"title": "no id"}]
        resp = client.post("/v1/products", json={"records": records})
        assert resp.status_code == 200
        body = resp.json()
        assert body["count"] == 1
        statuses = [s["status"] for s in body["statuses"]]
        assert statuses == ["ingested", "error", "error"]
        assert body["statuses"][1]["code"] == "DuplicateId"
        assert body["statuses"][2]["code"] == "MalformedRecord"

    def test_list_products(self, service):
        client, *_ = seeded_client(service)
        resp = client.get("/v1/products")
        assert resp.json()["ids"] == ["p1", "p2"]


class TestProperties:
    def test_put_then_get_shows_override_provenance(self, service):
        client, store, _ = seeded_client(service)
        resp = client.put("/v1/products/p1/properties",
                          json={"properties": properties_dict("#AABBCC"),
                                "author": "curator"})
        assert resp.status_code == 200
        revision = resp.json()["revision"]
        assert revision >= 1

        got = client.get("/v1/products/p1/properties")
        assert got.status_code == 200
        body = got.json()
        assert body["provenance"] == "Override"
        assert body["shades"][0]["base_color"] == "#AABBCC"
        # facade transparency: equals the module result serialized
        assert body == store.effective_properties("p1").to_json_dict()

    def test_get_missing_properties_is_not_found(self, service):
        client, *_ = seeded_client(service)
        resp = client.get("/v1/products/p1/properties")
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "NotFound"

    def test_unknown_product_not_found(self, service):
        client, *_ = seeded_client(service)
        resp = client.get("/v1/products/ghost/properties")
        assert resp.status_code == 404

    def test_invalid_properties_rejected(self, service):
        client, *_ = seeded_client(service)
        bad = properties_dict(finish="Glitter", reflective=None)  # glitter needs reflective
        resp = client.put("/v1/products/p1/properties",
                          json={"properties": bad, "author": "x"})
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "Invalid"

    def test_stale_revision_conflicts(self, service):
        client, *_ = seeded_client(service)
        first = client.put("/v1/products/p1/properties",
                           json={"properties": properties_dict("#111111"), "author": "a"})
        rev = first.json()["revision"]
        stale = client.put("/v1/products/p1/properties",
                           json={"properties": properties_dict("#222222"), "author": "b",
                                 "expected_revision": rev - 1})
        assert stale.status_code == 409
        assert stale.json()["error"]["code"] == "Conflict"
        fresh = client.put("/v1/products/p1/properties",
                           json={"properties": properties_dict("#222222"), "author": "b",
                                 "expected_revision": rev})
        assert fresh.status_code == 200

    def test_revision_history_retrievable(self, service):
        client, *_ = seeded_client(service)
        client.put("/v1/products/p1/properties",
                   json={"properties": properties_dict("#111111"), "author": "a"})
        client.put("/v1/products/p1/properties",
                   json={"properties": properties_dict("#222222"), "author": "b"})
        resp = client.get("/v1/products/p1/revisions")
        revisions = resp.json()["revisions"]
        assert len(revisions) == 2
        assert revisions[0]["author"] == "a"


class TestExtract:
    def test_extract_persists_and_returns_outcome(self, service):
        client, store, suite = seeded_client(service)
        # make the configured "scripted" backend resolvable: seed the app cache
        app_suites = _suite_cache(client)
        app_suites["scripted"] = suite
        resp = client.post("/v1/products/p1/extract")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "extracted"
        assert body["properties"]["shades"][0]["base_color"] == "#336699"
        assert store.effective_properties("p1") is not None

    def test_filtered_product_is_200_with_verdict(self, service):
        client, store, suite = seeded_client(service)
        _suite_cache(client)["scripted"] = suite
        client.post("/v1/products", json={"records": [
            record_dict("kit1", title="Eyeshadow Makeup Kit 24pc")]})
        resp = client.post("/v1/products/kit1/extract")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "filtered_out"
        assert body["matched_keyword"] == "makeup kit"

    def test_unknown_backend_is_invalid(self, service):
        client, *_ = seeded_client(service)
        resp = client.post("/v1/products/p1/extract?backend=cnn-magic")
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "Invalid"


def _suite_cache(client) -> dict:
    """Reach the app's backend cache (tests pre-seed the scripted suite)."""
    app = client.app
    for route in app.routes:
        pass
    # the cache lives in the closure of suite_for; expose via app.state instead
    return app.state.suite_cache


class TestMatch:
    def seed_matches(self, service):
        client, store, suite = seeded_client(service)
        store.set_extracted("p1", MaterialProperties(
            format=Format.POWDER,
            shades=(ShadeProperties(region=BOX, base_color=RgbColor.from_hex("#336699"),
                                    finish=FinishType.MATTE),),
        ))
        store.set_extracted("p2", MaterialProperties(
            format=Format.STICK,
            shades=(ShadeProperties(region=BOX, base_color=RgbColor.from_hex("#3366A0"),
                                    finish=FinishType.MATTE),),
        ))
        return client, store

    def test_color_query_matches_module_result(self, service):
        client, store = self.seed_matches(service)
        resp = client.get("/v1/match/similar", params={"color": "#336699"})
        assert resp.status_code == 200
        body = resp.json()
        matcher = MatchMaker(store)
        module = matcher.similar_shades(MatchQuery(
            source=RgbColor.from_hex("#336699"), target_category=Category.EYESHADOW,
        ))
        assert body["results"] == [r.to_json_dict() for r in module]
        assert body["results"][0]["product_id"] == "p1"
        assert body["results"][0]["score"] == 0.0

    def test_default_max_delta_e_is_ten(self, service):
        client, store = self.seed_matches(service)
        resp = client.get("/v1/match/similar", params={"color": "#336699"})
        scores = [r["score"] for r in resp.json()["results"]]
        assert all(s <= 10.0 for s in scores)

    def test_shade_query_uses_product_category(self, service):
        client, store = self.seed_matches(service)
        resp = client.get("/v1/match/similar", params={"product": "p1", "shade": 0})
        assert resp.status_code == 200
        ids = [r["product_id"] for r in resp.json()["results"]]
        assert "p1" not in ids  # query product excluded

    def test_format_filter(self, service):
        client, store = self.seed_matches(service)
        resp = client.get("/v1/match/similar",
                          params={"color": "#336699", "format": "Stick"})
        ids = [r["product_id"] for r in resp.json()["results"]]
        assert ids == ["p2"]

    def test_needs_exactly_one_source(self, service):
        client, _ = self.seed_matches(service)
        assert client.get("/v1/match/similar").status_code == 400
        both = client.get("/v1/match/similar",
                          params={"color": "#336699", "product": "p1"})
        assert both.status_code == 400

    def test_outfit_match_with_inline_profile(self, service):
        client, store = self.seed_matches(service)
        profile = {
            "region": "UpperBody", "pixel_count": 50,
            "colors": [{"hex": "#336699", "weight": 1.0}],
        }
        resp = client.post("/v1/match/outfit", json={"profile": profile})
        assert resp.status_code == 200
        body = resp.json()
        assert body["profile"]["colors"][0]["hex"] == "#336699"
        assert body["results"][0]["product_id"] == "p1"

    def test_pin_and_list_associations(self, service):
        client, store = self.seed_matches(service)
        resp = client.post("/v1/associations", json={
            "source_key": "color:#336699", "product_id": "p2", "shade_index": 0,
            "author": "curator",
        })
        assert resp.status_code == 200
        listed = client.get("/v1/associations", params={"source_key": "color:#336699"})
        assert listed.json()["associations"][0]["product_id"] == "p2"
        # pins surface on subsequent match queries
        match = client.get("/v1/match/similar", params={"color": "#336699"})
        assert match.json()["pinned"][0]["product_id"] == "p2"


class TestAnnotationsAndJobs:
    def test_post_annotations(self, service):
        client, store, _ = seeded_client(service)
        records = [{
            "product_id": "p1", "shade_index": 0,
            "colors": {"a1": "#336699", "a2": "#336699", "a3": "#33669A"},
            "finish_labels": ["Matte", "Matte", "Matte"],
        }]
        resp = client.post("/v1/annotations", json={"records": records})
        assert resp.status_code == 200
        assert resp.json()["added"] == 1
        assert len(store.annotations()) == 1

    def _wait(self, client, job_id, timeout=10.0):
        deadline = time.time() + timeout
        while time.time() < deadline:
            body = client.get(f"/v1/jobs/{job_id}").json()
            if body["status"] in ("done", "error"):
                return body
            time.sleep(0.02)
        raise AssertionError("job did not finish")

    def test_batch_extract_job(self, service):
        client, store, suite = seeded_client(service)
        _suite_cache(client)["scripted"] = suite
        resp = client.post("/v1/extract-batch", json={"ids": "all"})
        assert resp.status_code == 200
        job = self._wait(client, resp.json()["job_id"])
        assert job["status"] == "done"
        assert job["result"]["counts"]["extracted"] == 2
        assert store.effective_properties("p1") is not None

    def test_evaluate_job(self, service):
        client, store, suite = seeded_client(service)
        _suite_cache(client)["scripted"] = suite
        gt = properties_dict("#336699")
        client.post("/v1/products", json={"records": [
            record_dict("pg", gt=gt)], "upsert": False})
        loader_img = ImageData(name="pg.png",
                               pixels=np.full((16, 16, 3), 255, dtype=np.uint8))
        # the fixture loader serves p1/p2; add pg
        service[2].add("pg.png", loader_img)
        suite._detections["pg.png"] = [BOX]
        suite._shade_counts["pg.png"] = ClassDistribution({"Single": 0.9, "Multi": 0.1})
        suite._formats["pg.png"] = ClassDistribution.point_mass("Powder", FORMAT_LABELS)
        suite._finishes["pg.png[0]"] = ClassDistribution.point_mass("Matte", FINISH_LABELS)
        suite._base_colors["pg.png[0]"] = NormalizedRgb(0.2, 0.4, 0.6)
        resp = client.post("/v1/evaluate", json={"substitute": ["m1"]})
        job = self._wait(client, resp.json()["job_id"])
        assert job["status"] == "done"
        report = job["result"]
        assert report["substituted"] == ["m1"]
        assert report["selection_accuracy"] is None
        assert report["base_color_delta_e"]["All"]["mean"] == 0.0

    def test_unknown_job_is_not_found(self, service):
        client, *_ = seeded_client(service)
        assert client.get("/v1/jobs/nope").status_code == 404


class TestAuth:
    def test_token_required_when_configured(self):
        store = CatalogStore()
        loader = MemoryImages()
        app = create_app(store, loader, ServiceConfig(token="sesame"))
        client = TestClient(app)
        assert client.get("/v1/products").status_code == 400
        ok = client.get("/v1/products", headers={"Authorization": "Bearer sesame"})
        assert ok.status_code == 200
        # health stays open
        assert client.get("/v1/health").status_code == 200
