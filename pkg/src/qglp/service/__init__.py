"""FastAPI service wrapping the analysis package."""

from .app import create_app

__all__ = ["create_app"]
