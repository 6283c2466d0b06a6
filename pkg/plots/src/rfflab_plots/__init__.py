"""Batch figure rendering for the laboratory's result CSVs."""

__version__ = "0.1.0"

from .figures import FIGURE_IDS, FigureSpec, SchemaError, build_figure, render
