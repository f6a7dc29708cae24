"""HTTP facade over the engine, versioned under /v1.

Every endpoint delegates 1:1 to a module operation and serializes its result;
failures map onto a single error envelope {"error": {code, message, stage?}}.
Long operations (batch extraction, evaluation) run as jobs: the POST returns
a job id and GET /v1/jobs/{id} reports status and, once done, the result.
"""

from __future__ import annotations

import enum
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .annotations import ShadeAnnotation
from .catalog import (
    CatalogStore,
    Category,
    DuplicateId,
    InvalidProperties,
    MalformedRecord,
    ProductRecord,
    UnknownProduct,
)
from .clothes import EmptyRegion, GarmentRegion, OutfitColorProfile, load_mask, outfit_colors
from .colors import RgbColor
from .config import ServiceConfig
from .evaluation import MissingGroundTruth, SubstitutionStage, evaluate_pipeline
from .images import DecodeError, DirectoryImages, ImageLoader
from .matching import (
    AttributeFilter,
    Harmony,
    MatchError,
    MatchMaker,
    MatchQuery,
    ShadeRef,
)
from .pipeline import ExtractionStatus, PipelineConfig, extract, extract_batch
from .predictors import PredictorError, PredictorSuite, UnknownBackend, create_suite
from .properties import FinishType, Format, MaterialProperties


class ErrorCode(enum.Enum):
    NOT_FOUND = "NotFound"
    INVALID = "Invalid"
    CONFLICT = "Conflict"
    BACKEND_FAILURE = "BackendFailure"


_STATUS = {
    ErrorCode.NOT_FOUND: 404,
    ErrorCode.INVALID: 400,
    ErrorCode.CONFLICT: 409,
    ErrorCode.BACKEND_FAILURE: 502,
}


class ApiException(Exception):
    def __init__(self, code: ErrorCode, message: str, stage: str | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.stage = stage

    def payload(self) -> dict:
        error: dict = {"code": self.code.value, "message": self.message}
        if self.stage is not None:
            error["stage"] = self.stage
        return {"error": error}


@dataclass
class Job:
    job_id: str
    kind: str
    status: str = "queued"  # queued | running | done | error
    result: Any = None
    error: Optional[str] = None

    def to_json_dict(self) -> dict:
        d: dict = {"job_id": self.job_id, "kind": self.kind, "status": self.status}
        if self.status == "done":
            d["result"] = self.result
        if self.status == "error":
            d["error"] = self.error
        return d


class JobRunner:
    def __init__(self, workers: int):
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, kind: str, fn: Callable[[], Any]) -> Job:
        job = Job(job_id=uuid.uuid4().hex, kind=kind)
        with self._lock:
            self._jobs[job.job_id] = job

        def run() -> None:
            job.status = "running"
            try:
                job.result = fn()
                job.status = "done"
            except Exception as exc:  # job errors surface via the job record
                job.error = str(exc)
                job.status = "error"

        self._pool.submit(run)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise ApiException(ErrorCode.NOT_FOUND, f"no job {job_id!r}")
            return self._jobs[job_id]


def _parse_enum(cls, value, what: str):
    try:
        return cls(value)
    except ValueError:
        raise ApiException(ErrorCode.INVALID, f"unknown {what} {value!r}") from None


def create_app(
    store: CatalogStore,
    loader: ImageLoader,
    config: ServiceConfig | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="mpe", version="1.0")
    keywords = config.keyword_config()
    pipeline_config = PipelineConfig(keywords=keywords)
    jobs = JobRunner(workers=config.parallelism)
    matcher = MatchMaker(store)
    suites: dict[str, PredictorSuite] = {}
    suites_lock = threading.Lock()
    app.state.suite_cache = suites  # pre-seedable by embedders and tests

    def suite_for(name: str | None) -> PredictorSuite:
        resolved = name or config.backend
        with suites_lock:
            if resolved not in suites:
                params = config.backend_params if resolved == config.backend else {}
                try:
                    suites[resolved] = create_suite(resolved, params)
                except UnknownBackend as exc:
                    raise ApiException(ErrorCode.INVALID, str(exc)) from exc
            return suites[resolved]

    # -- error envelope ---------------------------------------------------------

    @app.exception_handler(ApiException)
    async def handle_api_error(_req: Request, exc: ApiException):
        return JSONResponse(status_code=_STATUS[exc.code], content=exc.payload())

    def guard(fn: Callable[[], Any]) -> Any:
        """Run a module operation, mapping its errors onto the envelope."""
        try:
            return fn()
        except ApiException:
            raise
        except UnknownProduct as exc:
            raise ApiException(ErrorCode.NOT_FOUND, str(exc)) from exc
        except (MalformedRecord, InvalidProperties, DuplicateId, MatchError,
                MissingGroundTruth, EmptyRegion, ValueError, KeyError) as exc:
            raise ApiException(ErrorCode.INVALID, str(exc)) from exc
        except (PredictorError, DecodeError) as exc:
            raise ApiException(ErrorCode.BACKEND_FAILURE, str(exc)) from exc

    # -- auth ----------------------------------------------------------------------

    async def require_token(request: Request) -> None:
        if config.token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {config.token}":
            raise ApiException(ErrorCode.INVALID, "missing or wrong bearer token")

    dep = [Depends(require_token)]

    # -- products -----------------------------------------------------------------

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "products": len(store)}

    @app.post("/v1/products", dependencies=dep)
    def ingest_products(body: dict) -> dict:
        records = body.get("records")
        if not isinstance(records, list):
            raise ApiException(ErrorCode.INVALID, "body must carry a 'records' list")
        upsert = bool(body.get("upsert", False))
        statuses = []
        count = 0
        for raw in records:
            pid = raw.get("product_id") if isinstance(raw, dict) else None
            try:
                record = ProductRecord.from_json_dict(raw)
                report = store.ingest([record], upsert=upsert)
                if report.errors:
                    err = report.errors[0]
                    statuses.append({"product_id": pid, "status": "error",
                                     "code": err.code, "message": err.message})
                else:
                    count += 1
                    statuses.append({"product_id": record.product_id, "status": "ingested"})
            except (MalformedRecord, ValueError, TypeError) as exc:
                statuses.append({"product_id": pid, "status": "error",
                                 "code": "MalformedRecord", "message": str(exc)})
        return {"count": count, "statuses": statuses}

    @app.get("/v1/products", dependencies=dep)
    def list_products(category: str | None = None, brand: str | None = None,
                      format: str | None = None, finish: str | None = None) -> dict:
        cat = _parse_enum(Category, category, "category") if category else None
        fmt = _parse_enum(Format, format, "format") if format else None
        fin = _parse_enum(FinishType, finish, "finish") if finish else None
        ids = guard(lambda: store.query(category=cat, brand=brand, format=fmt, finish=fin))
        return {"ids": ids}

    @app.get("/v1/products/{product_id}", dependencies=dep)
    def get_product(product_id: str) -> dict:
        record = guard(lambda: store.get(product_id))
        return record.to_json_dict()

    @app.post("/v1/products/{product_id}/extract", dependencies=dep)
    def extract_product(product_id: str, backend: str | None = None) -> dict:
        record = guard(lambda: store.get(product_id))
        suite = suite_for(backend)
        outcome = guard(lambda: extract(record, suite, loader, pipeline_config))
        if outcome.status is ExtractionStatus.EXTRACTED:
            store.set_extracted(product_id, outcome.properties)
        return outcome.to_json_dict()

    @app.get("/v1/products/{product_id}/properties", dependencies=dep)
    def get_properties(product_id: str) -> dict:
        props = guard(lambda: store.effective_properties(product_id))
        if props is None:
            raise ApiException(ErrorCode.NOT_FOUND,
                               f"product {product_id!r} has no extracted properties")
        return props.to_json_dict()

    @app.put("/v1/products/{product_id}/properties", dependencies=dep)
    def put_properties(product_id: str, body: dict) -> dict:
        raw = body.get("properties")
        if raw is None:
            raise ApiException(ErrorCode.INVALID, "body must carry 'properties'")
        author = str(body.get("author", ""))
        expected = body.get("expected_revision")
        try:
            props = MaterialProperties.from_json_dict(raw)
        except (MalformedRecord, ValueError, KeyError, TypeError) as exc:
            raise ApiException(ErrorCode.INVALID, f"bad properties: {exc}") from exc
        history = guard(lambda: store.override_history(product_id))
        current = history[-1].revision if history else 0
        if expected is not None and int(expected) != current:
            raise ApiException(
                ErrorCode.CONFLICT,
                f"stale revision: expected {expected}, store is at {current}",
            )
        revision = guard(lambda: store.apply_override(product_id, props, author))
        return {"product_id": product_id, "revision": revision, "provenance": "Override"}

    @app.get("/v1/products/{product_id}/revisions", dependencies=dep)
    def get_revisions(product_id: str) -> dict:
        history = guard(lambda: store.override_history(product_id))
        return {
            "product_id": product_id,
            "revisions": [
                {"revision": h.revision, "author": h.author,
                 "properties": h.properties.to_json_dict()}
                for h in history
            ],
        }

    # -- matching -----------------------------------------------------------------------

    def _build_query(
        product: str | None, shade: int | None, color: str | None,
        category: str | None, max_delta_e: float, brand: str | None,
        format: str | None, finish: str | None, harmony: str, limit: int,
    ) -> MatchQuery:
        if (product is None) == (color is None):
            raise ApiException(ErrorCode.INVALID,
                               "pass exactly one of product(+shade) or color")
        if product is not None:
            source = ShadeRef(product, shade or 0)
            cat = (_parse_enum(Category, category, "category") if category
                   else guard(lambda: store.get(product)).category)
        else:
            try:
                source = RgbColor.from_hex(color)
            except ValueError as exc:
                raise ApiException(ErrorCode.INVALID, str(exc)) from exc
            cat = _parse_enum(Category, category, "category") if category \
                else Category.EYESHADOW
        return MatchQuery(
            source=source,
            target_category=cat,
            max_delta_e=max_delta_e,
            attribute_filter=AttributeFilter(
                brand=brand,
                format=_parse_enum(Format, format, "format") if format else None,
                finish=_parse_enum(FinishType, finish, "finish") if finish else None,
            ),
            harmony=_parse_enum(Harmony, harmony, "harmony"),
            limit=limit,
        )

    @app.get("/v1/match/similar", dependencies=dep)
    def match_similar(
        product: str | None = None, shade: int | None = None, color: str | None = None,
        category: str | None = None, max_delta_e: float = 10.0,
        brand: str | None = None, format: str | None = None, finish: str | None = None,
        harmony: str = "Exact", limit: int = 10,
    ) -> dict:
        query = _build_query(product, shade, color, category, max_delta_e,
                             brand, format, finish, harmony, limit)
        results = guard(lambda: matcher.similar_shades(query))
        pins = guard(lambda: matcher.pinned(query.source))
        return {
            "results": [r.to_json_dict() for r in results],
            "pinned": [
                {"product_id": p.product_id, "shade_index": p.shade_index,
                 "author": p.author, "revision": p.revision}
                for p in pins
            ],
        }

    @app.post("/v1/match/outfit", dependencies=dep)
    def match_outfit(body: dict) -> dict:
        if "profile" in body:
            profile = guard(lambda: OutfitColorProfile.from_json_dict(body["profile"]))
        else:
            for key in ("image", "mask", "region"):
                if key not in body:
                    raise ApiException(ErrorCode.INVALID,
                                       "body needs 'profile' or image+mask+region")
            region = _parse_enum(GarmentRegion, body["region"], "region")
            image = guard(lambda: loader.load(body["image"]))
            mask = guard(lambda: load_mask(body["mask"]))
            profile = guard(lambda: outfit_colors(
                image, mask, region, k=int(body.get("k", 4)),
                threshold=float(body.get("threshold", 0.5)),
            ))
        query = MatchQuery(
            source=profile,
            target_category=_parse_enum(Category, body.get("category", "Eyeshadow"),
                                        "category"),
            max_delta_e=float(body.get("max_delta_e", 10.0)),
            attribute_filter=AttributeFilter(
                brand=body.get("brand"),
                format=_parse_enum(Format, body["format"], "format")
                if body.get("format") else None,
                finish=_parse_enum(FinishType, body["finish"], "finish")
                if body.get("finish") else None,
            ),
            harmony=_parse_enum(Harmony, body.get("harmony", "Exact"), "harmony"),
            limit=int(body.get("limit", 10)),
        )
        results = guard(lambda: matcher.outfit_match(profile, query))
        pins = guard(lambda: matcher.pinned(profile))
        return {
            "profile": profile.to_json_dict(),
            "results": [r.to_json_dict() for r in results],
            "pinned": [
                {"product_id": p.product_id, "shade_index": p.shade_index,
                 "author": p.author, "revision": p.revision}
                for p in pins
            ],
        }

    @app.post("/v1/associations", dependencies=dep)
    def pin_association(body: dict) -> dict:
        for key in ("source_key", "product_id"):
            if key not in body:
                raise ApiException(ErrorCode.INVALID, f"body needs {key!r}")
        revision = guard(lambda: store.pin_association(
            str(body["source_key"]), str(body["product_id"]),
            int(body.get("shade_index", 0)), str(body.get("author", "")),
        ))
        return {"revision": revision}

    @app.get("/v1/associations", dependencies=dep)
    def list_associations(source_key: str) -> dict:
        pins = guard(lambda: store.associations(source_key))
        return {
            "associations": [
                {"source_key": p.source_key, "product_id": p.product_id,
                 "shade_index": p.shade_index, "author": p.author, "revision": p.revision}
                for p in pins
            ],
        }

    # -- annotations -----------------------------------------------------------------

    @app.post("/v1/annotations", dependencies=dep)
    def post_annotations(body: dict) -> dict:
        records = body.get("records")
        if not isinstance(records, list):
            raise ApiException(ErrorCode.INVALID, "body must carry a 'records' list")
        parsed = guard(lambda: [ShadeAnnotation.from_json_dict(r) for r in records])
        added = store.add_annotations(parsed)
        return {"added": added}

    # -- jobs: batch extraction and evaluation -------------------------------------------

    @app.post("/v1/extract-batch", dependencies=dep)
    def extract_batch_job(body: dict) -> dict:
        ids = body.get("ids", "all")
        id_list = store.ids() if ids == "all" else [str(i) for i in ids]
        suite = suite_for(body.get("backend"))
        parallelism = int(body.get("parallelism", config.parallelism))

        def run() -> dict:
            results = extract_batch(store, id_list, suite, loader,
                                    pipeline_config, parallelism=parallelism)
            for pid, outcome in results.items():
                if outcome.status is ExtractionStatus.EXTRACTED:
                    store.set_extracted(pid, outcome.properties)
            counts: dict[str, int] = {}
            for outcome in results.values():
                counts[outcome.status.value] = counts.get(outcome.status.value, 0) + 1
            return {
                "counts": counts,
                "results": {pid: out.to_json_dict() for pid, out in results.items()},
            }

        job = jobs.submit("extract-batch", run)
        return {"job_id": job.job_id, "status": job.status}

    @app.post("/v1/evaluate", dependencies=dep)
    def evaluate_job(body: dict) -> dict:
        try:
            substitution = [SubstitutionStage.parse(s) for s in body.get("substitute", [])]
        except ValueError as exc:
            raise ApiException(ErrorCode.INVALID, str(exc)) from exc
        suite = suite_for(body.get("backend"))
        group = bool(body.get("group_by_brand", False))

        def run() -> dict:
            report = evaluate_pipeline(
                store, suite, loader,
                substitution=substitution,
                annotations=store.annotations() or None,
                group_by_brand=group,
                config=pipeline_config,
            )
            return report.to_json_dict()

        job = jobs.submit("evaluate", run)
        return {"job_id": job.job_id, "status": job.status}

    @app.get("/v1/jobs/{job_id}", dependencies=dep)
    def get_job(job_id: str) -> dict:
        return jobs.get(job_id).to_json_dict()

    # -- static UI ------------------------------------------------------------------------

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig, store: CatalogStore | None = None) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    store = store or CatalogStore(log_path=config.catalog_log)
    loader = DirectoryImages(config.images_dir)
    app = create_app(store, loader, config)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
