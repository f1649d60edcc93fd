"""Figures from diskwalk CSV outputs."""

__version__ = "0.1.0"

from .figures import KINDS, FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "KINDS", "SchemaError", "render", "__version__"]
