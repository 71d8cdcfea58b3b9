"""Figure rendering over simulation result CSVs."""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, render
