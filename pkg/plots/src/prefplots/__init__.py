"""Figure rendering for benchmark result CSVs (the CSV schema is the contract)."""

from .csvio import PlotInputError, read_histogram, read_margin, read_results
from .figures import FigureKind, FigureSpec, margin_loglog_fit, median_by_cell, render

__version__ = "0.1.0"
