"""Command-line client for the HTTP API.

Every command posts to the service: by default an in-process ASGI transport
(no server needed), or a remote base URL via --server. Exit codes: 0 on
success, 1 for configuration problems (bad files, rejected requests), 2 for
runtime failures (server errors, unreachable host).
"""

from __future__ import annotations

import json
import sys

import click
import httpx

from .errors import ConfigError
from .experiments import env_seed_override, load_config_data


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # In-process transport against the ASGI app; behaves like a live server.
    # The installed starlette prefers an httpx2 client that this environment
    # does not ship; the httpx fallback works, so silence that one warning.
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app, raise_server_exceptions=False)


def _post(server: str | None, path: str, payload: dict) -> dict:
    try:
        with _client(server) as client:
            resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        _fail(2, f"request to {path} failed: {exc}")
    if resp.status_code >= 500:
        _fail(2, _detail(resp))
    if resp.status_code >= 400:
        _fail(1, _detail(resp))
    return resp.json()


def _detail(resp) -> str:
    try:
        body = resp.json()
    except ValueError:
        return resp.text
    detail = body.get("detail", body)
    if isinstance(detail, str):
        return detail
    return json.dumps(detail)


def _load(path: str, seed_key: str) -> dict:
    try:
        return load_config_data(path, seed_key=seed_key)
    except ConfigError as exc:
        _fail(1, str(exc))


def _emit(data: dict) -> None:
    click.echo(json.dumps(data, indent=2))


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default executes in-process.")
@click.version_option(package_name="pauliprop")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Low-weight Pauli propagation toolkit client."""
    ctx.obj = {"server": server}


@main.command("eval")
@click.option("--config", "config_path", required=True, type=click.Path(), metavar="FILE")
@click.pass_context
def eval_cmd(ctx: click.Context, config_path: str) -> None:
    """Evaluate an energy (exact, or weight-truncated when `k` is set)."""
    payload = _load(config_path, "seed")
    _emit(_post(ctx.obj["server"], "/eval", payload))


@main.command("optimize")
@click.option("--config", "config_path", required=True, type=click.Path(), metavar="FILE")
@click.pass_context
def optimize_cmd(ctx: click.Context, config_path: str) -> None:
    """Run a direct or two-stage Adam optimization."""
    payload = _load(config_path, "seed")
    _emit(_post(ctx.obj["server"], "/optimize", payload))


@main.command("gs")
@click.option("--config", "config_path", required=True, type=click.Path(), metavar="FILE")
@click.pass_context
def gs_cmd(ctx: click.Context, config_path: str) -> None:
    """Compute the exact ground-state energy of the configured model."""
    payload = _load(config_path, "seed")
    _emit(_post(ctx.obj["server"], "/gs", payload))


@main.command("experiment")
@click.option("--config", "config_path", default=None, type=click.Path(), metavar="FILE",
              help="Experiment config; overlays the preset when both are given.")
@click.option("--preset", default=None, metavar="NAME",
              help="Named experiment configuration.")
@click.option("--out-dir", default=None, type=click.Path(), metavar="DIR")
@click.option("--threads", default=1, type=int, show_default=True)
@click.pass_context
def experiment_cmd(ctx: click.Context, config_path: str | None, preset: str | None,
                   out_dir: str | None, threads: int) -> None:
    """Run a seeded multi-run experiment and write its CSV artifacts."""
    if config_path is None and preset is None:
        _fail(1, "provide --config, --preset, or both")
    config = None
    if config_path is not None:
        config = _load(config_path, "master_seed")
    elif preset is not None:
        try:
            seed = env_seed_override()
        except ConfigError as exc:
            _fail(1, str(exc))
        if seed is not None:
            config = {"master_seed": seed}
    payload = {"preset": preset, "config": config, "out_dir": out_dir, "threads": threads}
    result = _post(ctx.obj["server"], "/experiment", payload)
    _emit(result)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve_cmd(host: str, port: int) -> None:
    """Serve the HTTP API."""
    import uvicorn

    uvicorn.run("pauliprop.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
