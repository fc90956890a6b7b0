"""Figures from assimilation run outputs.

Consumes only the two documented on-disk formats (diagnostics CSV and
ENSF1 field snapshots) and renders the four standard figure kinds:
contour pairs, 3-D surfaces, diagnostic time series, and run-vs-run
overlays.
"""

from .figures import KINDS, FigureSpec, render
from .readers import FieldSnapshot, ParseError, read_ensf1, read_series_csv

__all__ = [
    "KINDS",
    "FigureSpec",
    "FieldSnapshot",
    "ParseError",
    "read_ensf1",
    "read_series_csv",
    "render",
]
