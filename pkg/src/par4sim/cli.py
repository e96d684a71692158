"""Thin HTTP client CLI plus the `serve` entry point.

Everything except `serve` talks to a running service over REST; the CLI
holds no state of its own.
"""

from __future__ import annotations

import json
import sys

import click
import httpx


@click.group()
@click.option("--base-url", default="http://127.0.0.1:8000", show_default=True)
@click.pass_context
def main(ctx: click.Context, base_url: str) -> None:
    ctx.obj = base_url


def _client(ctx: click.Context) -> httpx.Client:
    return httpx.Client(base_url=ctx.obj, timeout=60.0)


def _show(response: httpx.Response) -> None:
    if response.is_error:
        click.echo(f"error {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    content_type = response.headers.get("content-type", "")
    if "json" in content_type:
        click.echo(json.dumps(response.json(), indent=2))
    else:
        click.echo(response.text.rstrip("\n"))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory of built frontend assets to serve at /")
def serve(config_path: str, host: str, port: int, static_dir: str | None) -> None:
    """Start the service."""
    import uvicorn

    from .config import AppConfig
    from .service.app import create_app

    app = create_app(AppConfig.from_file(config_path), static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.group()
def hits() -> None:
    """Create and inspect HITs."""


@hits.command("create")
@click.option("--file", "path", type=click.Path(exists=True), required=True,
              help="JSON document: {iteration, sentences, cp_spans, assigned_workers}")
@click.pass_context
def hits_create(ctx: click.Context, path: str) -> None:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    with _client(ctx) as client:
        _show(client.post("/api/hits", json=payload))


@hits.command("show")
@click.argument("hit_id")
@click.option("--worker", default=None)
@click.pass_context
def hits_show(ctx: click.Context, hit_id: str, worker: str | None) -> None:
    params = {"worker": worker} if worker else {}
    with _client(ctx) as client:
        _show(client.get(f"/api/hits/{hit_id}", params=params))


@main.command()
@click.argument("hit_id")
@click.option("--sentence", required=True)
@click.option("--start", type=int, required=True)
@click.option("--end", type=int, required=True)
@click.option("--worker", default=None)
@click.pass_context
def candidates(ctx: click.Context, hit_id: str, sentence: str, start: int, end: int, worker: str | None) -> None:
    """Ranked candidates for one CP span."""
    params = {"sentence": sentence, "start": start, "end": end}
    if worker:
        params["worker"] = worker
    with _client(ctx) as client:
        _show(client.get(f"/api/hits/{hit_id}/candidates", params=params))


@main.group()
def events() -> None:
    """Post usage events."""


@events.command("post")
@click.option("--file", "path", type=click.Path(exists=True), required=True,
              help="JSON usage event payload")
@click.pass_context
def events_post(ctx: click.Context, path: str) -> None:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    with _client(ctx) as client:
        _show(client.post("/api/events", json=payload))


@main.group()
def iterations() -> None:
    """Iteration lifecycle."""


@iterations.command("close")
@click.argument("t", type=int)
@click.pass_context
def iterations_close(ctx: click.Context, t: int) -> None:
    with _client(ctx) as client:
        _show(client.post(f"/api/iterations/{t}/close"))


@main.command()
@click.option("--csv", "as_csv", is_flag=True, default=False)
@click.pass_context
def metrics(ctx: click.Context, as_csv: bool) -> None:
    """Learning-curve records."""
    params = {"format": "csv"} if as_csv else {}
    with _client(ctx) as client:
        _show(client.get("/api/metrics", params=params))


if __name__ == "__main__":
    main()
