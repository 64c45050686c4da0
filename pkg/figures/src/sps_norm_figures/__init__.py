"""Figure rendering for sps-norm CSV outputs.

This package never computes physics: every pixel traces back to a CSV
cell written by the solver CLI.
"""
from .csvio import CsvTable, HeaderMismatchError, read_table
from .plots import PlotSpec, plot_norm_curves, plot_probability_maps

__version__ = "0.1.0"

__all__ = [
    "CsvTable",
    "HeaderMismatchError",
    "PlotSpec",
    "plot_norm_curves",
    "plot_probability_maps",
    "read_table",
]
