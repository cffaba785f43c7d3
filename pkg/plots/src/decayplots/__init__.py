"""Pure-view rendering of decay time series.

Consumes the CSV/JSON artifacts written by the numerical suite (columns
t, pair_id, re, im, abs, err_est, multiplier, classification) and renders
compensated decay curves; nothing here recomputes physics.
"""

from .render import COMPENSATIONS, PlotSpec, SchemaError, render

__all__ = ["COMPENSATIONS", "PlotSpec", "SchemaError", "render"]

__version__ = "0.1.0"
