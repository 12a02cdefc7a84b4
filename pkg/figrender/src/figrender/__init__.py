"""Figure rendering for mclab sweep results."""

from .render import PlotSpec, SchemaError, build_figures, load_aggregates, render

__version__ = "0.1.0"
