"""
Shared Jinja2 environment for text artifacts.

Exporters render templates from here so every script sees the same globals.
"""

from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.settings import settings

TEMPLATE_DIR = Path(__file__).parent / "templates"


def g17_filter(value: float | None) -> str:
    """Round-trippable float text; empty for missing values."""
    if value is None:
        return ""
    return f"{value:.17g}"


templates = Environment(
    loader=FileSystemLoader(TEMPLATE_DIR),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    autoescape=False,
)

templates.globals["settings"] = settings
templates.filters["g17"] = g17_filter
