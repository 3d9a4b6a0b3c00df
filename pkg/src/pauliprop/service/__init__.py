"""HTTP service exposing the toolkit; the CLI is a client of this API."""

from .app import app, create_app

__all__ = ["app", "create_app"]
