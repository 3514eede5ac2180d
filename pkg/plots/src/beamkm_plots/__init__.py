"""Figure rendering for beamkm benchmark CSVs."""

from .render import KINDS, PlotSpec, SchemaError, build_figure, render

__version__ = "0.1.0"
