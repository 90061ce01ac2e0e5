"""`sentinel` command line: serve the API, and thin-client/offline tools.

serve    run the HTTP/WebSocket service from a JSON config file
replay   POST a CSV through the running service's ingest endpoint
train    fit a forest on a labeled CSV; writes model + background (+ schema)
prepare  assemble a per-class balanced training CSV from raw per-class files
explain  request an LLM explanation for a logged event
"""

from __future__ import annotations

import csv
import json
import random
import sys
import time
from pathlib import Path

import click
import httpx

from .forest import TrainConfig, fit_forest, serialize_model
from .schema import FlowRecord, define_schema, transform, validate
from .streams import LABEL_COLUMN


@click.group()
def main():
    """Network intrusion detection and response service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--host", default=None, help="Override the config host.")
@click.option("--port", default=None, type=int, help="Override the config port.")
def serve(config_path, host, port):
    """Run the detection service."""
    import uvicorn

    from .runtime import SentinelRuntime, ServiceConfig
    from .service import create_app

    config = ServiceConfig.from_file(config_path)
    if host:
        config.host = host
    if port:
        config.port = port
    runtime = SentinelRuntime(config)
    runtime.start_broker_pipeline()
    app = create_app(runtime)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    finally:
        runtime.close()


def _parse_rate(rate: str) -> float | None:
    if rate.lower() == "max":
        return None
    value = float(rate)
    if value <= 0:
        raise click.BadParameter("rate must be positive or 'max'")
    return value


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--rate", default="max", help="Records per second, or 'max'.")
@click.option("--api", default="http://127.0.0.1:8000", help="Service base URL.")
@click.option("--token", default=None, help="API token, if the service requires one.")
def replay(input_path, rate, api, token):
    """Send a CSV record-by-record to the service's ingest endpoint."""
    per_second = _parse_rate(rate)
    headers = {"x-api-token": token} if token else {}
    accepted = rejected = 0
    started = time.monotonic()
    with httpx.Client(base_url=api, headers=headers, timeout=30.0) as client:
        with open(input_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for i, row in enumerate(reader):
                if per_second is not None:
                    due = started + i / per_second
                    delay = due - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
                row.pop(LABEL_COLUMN, None)
                resp = client.post("/api/v1/ingest", json=row)
                if resp.status_code == 200:
                    accepted += 1
                else:
                    rejected += 1
                    click.echo(f"row {i}: {resp.status_code} {resp.text}", err=True)
    elapsed = time.monotonic() - started
    click.echo(
        f"replayed {accepted + rejected} records in {elapsed:.2f}s "
        f"({accepted} accepted, {rejected} rejected)"
    )


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--trees", default=100, show_default=True)
@click.option("--depth", default=12, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--min-leaf", default=1, show_default=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None,
              help="Schema file; inferred (all numeric) when omitted.")
@click.option("--background-size", default=100, show_default=True)
def train(data_path, out_path, trees, depth, seed, min_leaf, schema_path, background_size):
    """Fit a forest on a labeled CSV (label column: 'label')."""
    import numpy as np

    from .attribution import reservoir_background

    with open(data_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or LABEL_COLUMN not in reader.fieldnames:
            raise click.ClickException(f"training CSV needs a '{LABEL_COLUMN}' column")
        rows = list(reader)
    if not rows:
        raise click.ClickException("training CSV has no rows")

    if schema_path:
        schema = define_schema(Path(schema_path).read_text(encoding="utf-8"))
    else:
        feature_names = [c for c in rows[0].keys() if c != LABEL_COLUMN]
        labels_seen = sorted({r[LABEL_COLUMN] for r in rows})
        schema = define_schema(
            {
                "features": [{"name": n, "kind": "numeric"} for n in feature_names],
                "class_labels": labels_seen,
            }
        )
        schema_out = Path(out_path).with_suffix(".schema.json")
        schema_out.write_text(json.dumps(schema.to_document(), indent=2), encoding="utf-8")
        click.echo(f"inferred schema -> {schema_out}")

    X = np.empty((len(rows), len(schema.features)), dtype=np.float64)
    labels = []
    for i, row in enumerate(rows):
        labels.append(row.pop(LABEL_COLUMN))
        record = FlowRecord(fields=row, received_at=0.0, source_id=f"train:{i}")
        verdict = validate(record, schema)
        if not verdict.valid:
            raise click.ClickException(f"row {i} invalid: {'; '.join(verdict.reasons)}")
        X[i] = transform(record, schema).values

    config = TrainConfig(
        n_trees=trees, max_depth=depth, min_leaf=min_leaf, seed=seed
    )
    model = fit_forest(
        X, labels, config, class_labels=schema.class_labels, schema_version=schema.version
    )
    Path(out_path).write_bytes(serialize_model(model))
    click.echo(f"model {model.model_id[:12]} ({len(model.trees)} trees) -> {out_path}")

    background = reservoir_background(X, schema.version, size=background_size, seed=seed)
    background_out = Path(out_path).with_suffix(".background.json")
    background_out.write_text(background.to_json(), encoding="utf-8")
    click.echo(f"background ({len(background.vectors)} vectors) -> {background_out}")


@main.command()
@click.option("--raw-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--classes", required=True, help="Comma-separated class labels to keep.")
@click.option("--min-per-class", default=20000, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--seed", default=0, show_default=True)
def prepare(raw_dir, classes, min_per_class, out_path, seed):
    """Build a training CSV with at least min-per-class rows per category."""
    wanted = [c.strip() for c in classes.split(",") if c.strip()]
    if not wanted:
        raise click.ClickException("--classes must name at least one class")
    files = sorted(Path(raw_dir).glob("*.csv"))
    if not files:
        raise click.ClickException(f"no .csv files in {raw_dir}")

    header: list[str] | None = None
    by_class: dict[str, list[dict]] = {c: [] for c in wanted}
    for path in files:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or LABEL_COLUMN not in reader.fieldnames:
                raise click.ClickException(f"{path} lacks a '{LABEL_COLUMN}' column")
            if header is None:
                header = list(reader.fieldnames)
            elif list(reader.fieldnames) != header:
                raise click.ClickException(f"{path} header differs from {files[0]}")
            for row in reader:
                label = row[LABEL_COLUMN]
                if label in by_class:
                    by_class[label].append(row)

    short = {c: len(rows) for c, rows in by_class.items() if len(rows) < min_per_class}
    if short:
        detail = ", ".join(f"{c}: {n}/{min_per_class}" for c, n in sorted(short.items()))
        raise click.ClickException(f"not enough data points: {detail}")

    merged = [row for rows in by_class.values() for row in rows]
    random.Random(seed).shuffle(merged)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(merged)
    counts = {c: len(rows) for c, rows in by_class.items()}
    click.echo(f"wrote {len(merged)} rows -> {out_path} ({counts})")


@main.command()
@click.option("--event", "event_id", required=True)
@click.option("--level", type=click.Choice(["novice", "intermediate", "expert"]), required=True)
@click.option("--style", type=click.Choice(["concise", "detailed"]), required=True)
@click.option("--api", default="http://127.0.0.1:8000")
@click.option("--token", default=None)
def explain(event_id, level, style, api, token):
    """Ask the service for an LLM explanation of a logged event."""
    headers = {"x-api-token": token} if token else {}
    with httpx.Client(base_url=api, headers=headers, timeout=120.0) as client:
        resp = client.post(
            f"/api/v1/events/{event_id}/explain",
            json={"experience_level": level, "descriptiveness": style},
        )
    if resp.status_code != 200:
        click.echo(f"{resp.status_code}: {resp.text}", err=True)
        sys.exit(1)
    body = resp.json()
    if body.get("error"):
        click.echo(f"[{body['error']}] prompt_hash={body['prompt_hash']}")
    else:
        click.echo(body["text"])


if __name__ == "__main__":
    main()
