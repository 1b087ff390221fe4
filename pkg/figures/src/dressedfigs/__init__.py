"""Publication-style figure renderer for dressedspin sweep CSVs."""

from .render import FigureSpec, SchemaError, build_figure, load_table, render

__version__ = "0.1.0"
