"""Command line interface.

Subcommands: ingest, extract, match, evaluate, snapshot, serve. Catalog
arguments accept either a snapshot file (magic header MPECAT1) or a JSON-lines
record file; the distinction is sniffed from the first line.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .catalog import SNAPSHOT_MAGIC, CatalogStore, Category
from .clothes import OutfitColorProfile
from .colors import RgbColor
from .config import ServiceConfig
from .evaluation import SubstitutionStage, evaluate_pipeline
from .images import DirectoryImages
from .keywords import KeywordConfig
from .matching import AttributeFilter, Harmony, MatchMaker, MatchQuery, ShadeRef
from .pipeline import PipelineConfig, extract_batch
from .predictors import create_suite
from .properties import FinishType, Format
from .report import format_text, write_report


def load_catalog(path: str, log_path: str | None = None) -> CatalogStore:
    """Open a snapshot or ingest a JSONL record file."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first == SNAPSHOT_MAGIC:
        return CatalogStore.from_snapshot(path, log_path=log_path)
    store = CatalogStore(log_path=log_path)
    report = store.ingest_jsonl(path)
    for err in report.errors:
        click.echo(f"ingest error [{err.code}] {err.message}", err=True)
    return store


def parse_backend_params(params: tuple[str, ...]) -> dict:
    out = {}
    for item in params:
        if "=" not in item:
            raise click.BadParameter(f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


@click.group()
def main() -> None:
    """Material property extraction engine."""


@main.command()
@click.argument("records", type=click.Path(exists=True))
@click.option("--catalog", "log_path", type=click.Path(), default=None,
              help="Append-only store log to build or extend.")
@click.option("--snapshot", "snapshot_path", type=click.Path(), default=None,
              help="Write a snapshot after ingesting.")
@click.option("--upsert", is_flag=True, help="Replace records with duplicate ids.")
def ingest(records: str, log_path: str | None, snapshot_path: str | None,
           upsert: bool) -> None:
    """Ingest a JSON-lines catalog file."""
    store = CatalogStore(log_path=log_path)
    report = store.ingest_jsonl(records, upsert=upsert)
    for err in report.errors:
        click.echo(f"error [{err.code}] {err.message}", err=True)
    if snapshot_path:
        store.snapshot(snapshot_path)
    click.echo(f"ingested {report.count} records, {len(report.errors)} errors")
    if report.errors:
        sys.exit(1)


@main.command()
@click.option("--catalog", required=True, type=click.Path(exists=True))
@click.option("--backend", default="heuristic", show_default=True)
@click.option("--backend-param", "backend_params", multiple=True,
              help="Backend parameter key=value; repeatable.")
@click.option("--ids", "ids_spec", default="all", show_default=True,
              help="'all' or a file with one product id per line.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--parallel", default=1, show_default=True)
@click.option("--trace", is_flag=True, help="Write a trace sidecar per product.")
@click.option("--images-dir", default=None,
              help="Base directory for image paths (default: catalog directory).")
@click.option("--keywords", "keywords_path", type=click.Path(exists=True), default=None)
@click.option("--snapshot", "snapshot_path", type=click.Path(), default=None,
              help="Also write a catalog snapshot carrying the extracted properties.")
def extract(catalog: str, backend: str, backend_params: tuple[str, ...], ids_spec: str,
            out_dir: str, parallel: int, trace: bool, images_dir: str | None,
            keywords_path: str | None, snapshot_path: str | None) -> None:
    """Extract material properties for catalog products."""
    store = load_catalog(catalog)
    suite = create_suite(backend, parse_backend_params(backend_params))
    loader = DirectoryImages(images_dir or Path(catalog).resolve().parent)
    keywords = KeywordConfig.load(keywords_path) if keywords_path \
        else KeywordConfig.default()
    config = PipelineConfig(keywords=keywords)

    if ids_spec == "all":
        ids = store.ids()
    else:
        ids = [line.strip() for line in Path(ids_spec).read_text().splitlines()
               if line.strip()]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def progress(done: int, total: int, pid: str) -> None:
        if done % 10 == 0 or done == total:
            click.echo(f"[{done}/{total}] {pid}", err=True)

    results = extract_batch(store, ids, suite, loader, config,
                            parallelism=parallel, progress=progress)
    counts: dict[str, int] = {}
    for pid, outcome in results.items():
        counts[outcome.status.value] = counts.get(outcome.status.value, 0) + 1
        (out / f"{pid}.json").write_text(outcome.to_json() + "\n")
        if trace:
            sidecar = json.dumps(outcome.trace.to_json_dict(include_timing=True),
                                 sort_keys=True)
            (out / f"{pid}.trace.json").write_text(sidecar + "\n")
        if outcome.properties is not None:
            store.set_extracted(pid, outcome.properties)
    if snapshot_path:
        store.snapshot(snapshot_path)
    click.echo(json.dumps(counts, sort_keys=True))


@main.command()
@click.option("--catalog", required=True, type=click.Path(exists=True))
@click.option("--from", "source_spec", required=True,
              help="Query source: 'product_id:shade', '#RRGGBB', or a profile file.")
@click.option("--category", default="Eyeshadow", show_default=True)
@click.option("--max-delta-e", default=10.0, show_default=True)
@click.option("--format", "format_name", default=None)
@click.option("--brand", default=None)
@click.option("--finish", "finish_name", default=None)
@click.option("--harmony", type=click.Choice(["exact", "complementary"]),
              default="exact", show_default=True)
@click.option("--limit", default=10, show_default=True)
def match(catalog: str, source_spec: str, category: str, max_delta_e: float,
          format_name: str | None, brand: str | None, finish_name: str | None,
          harmony: str, limit: int) -> None:
    """Rank catalog shades against a color, shade, or outfit profile."""
    store = load_catalog(catalog)
    matcher = MatchMaker(store)

    profile = None
    if source_spec.startswith("#"):
        source = RgbColor.from_hex(source_spec)
    elif Path(source_spec).is_file():
        profile = OutfitColorProfile.load(source_spec)
        source = profile
    elif ":" in source_spec:
        pid, _, idx = source_spec.rpartition(":")
        source = ShadeRef(pid, int(idx))
    else:
        raise click.BadParameter(
            f"--from {source_spec!r} is not a hex color, product:shade, or profile file"
        )

    query = MatchQuery(
        source=source,
        target_category=Category(category),
        max_delta_e=max_delta_e,
        attribute_filter=AttributeFilter(
            brand=brand,
            format=Format(format_name) if format_name else None,
            finish=FinishType(finish_name) if finish_name else None,
        ),
        harmony=Harmony.COMPLEMENTARY if harmony == "complementary" else Harmony.EXACT,
        limit=limit,
    )
    if profile is not None:
        results = matcher.outfit_match(profile, query)
    else:
        results = matcher.similar_shades(query)
    for rec in results:
        click.echo(json.dumps(rec.to_json_dict(), sort_keys=True))


@main.command()
@click.option("--catalog", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", type=click.Path(exists=True),
              default=None)
@click.option("--backend", default="heuristic", show_default=True)
@click.option("--backend-param", "backend_params", multiple=True)
@click.option("--substitute", default="",
              help="Comma-separated stages consumed from ground truth (m1,m3,m5).")
@click.option("--group-by", "group_by", type=click.Choice(["brand"]), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--images-dir", default=None)
def evaluate(catalog: str, annotations_path: str | None, backend: str,
             backend_params: tuple[str, ...], substitute: str, group_by: str | None,
             out_dir: str, images_dir: str | None) -> None:
    """Score the pipeline against ground truth; write records and figures."""
    from .annotations import load_annotations

    store = load_catalog(catalog)
    suite = create_suite(backend, parse_backend_params(backend_params))
    loader = DirectoryImages(images_dir or Path(catalog).resolve().parent)
    substitution = [SubstitutionStage.parse(tok)
                    for tok in substitute.split(",") if tok.strip()]
    annotations = load_annotations(annotations_path) if annotations_path else None

    report = evaluate_pipeline(
        store, suite, loader,
        substitution=substitution,
        annotations=annotations,
        group_by_brand=group_by == "brand",
    )
    paths = write_report(report, out_dir)
    click.echo(format_text(report))
    click.echo(f"\nwrote {paths['json']}, {paths['csv']} and "
               f"{len(paths['figures'])} figures", err=True)


@main.command()
@click.option("--catalog", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def snapshot(catalog: str, out_path: str) -> None:
    """Write a snapshot of a catalog source."""
    store = load_catalog(catalog)
    store.snapshot(out_path)
    click.echo(f"snapshot of {len(store)} products written to {out_path}")


@main.command()
@click.option("--catalog", type=click.Path(exists=True), default=None)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Append-only store log for persistence.")
@click.option("--port", default=None, type=int)
@click.option("--backend", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--images-dir", default=None)
@click.option("--ui-dir", default=None)
def serve(catalog: str | None, log_path: str | None, port: int | None,
          backend: str | None, config_path: str | None, images_dir: str | None,
          ui_dir: str | None) -> None:
    """Run the HTTP service."""
    from .service import serve as run_service

    config = ServiceConfig.load(config_path)
    if port is not None:
        config.port = port
    if backend is not None:
        config.backend = backend
    if images_dir is not None:
        config.images_dir = images_dir
    if ui_dir is not None:
        config.ui_dir = ui_dir
    if log_path is not None:
        config.catalog_log = log_path

    store = None
    if catalog is not None:
        store = load_catalog(catalog, log_path=config.catalog_log)
        if images_dir is None and config.images_dir == ".":
            config.images_dir = str(Path(catalog).resolve().parent)
    click.echo(f"serving on 127.0.0.1:{config.port} with backend {config.backend}",
               err=True)
    run_service(config, store=store)


if __name__ == "__main__":
    main()
