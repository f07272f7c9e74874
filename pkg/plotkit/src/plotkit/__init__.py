"""Figure reproduction for flockform run directories."""

from .figures import FIGURE_KINDS, PlotJob, render
from .runs import RunData, SchemaError, load_run

__version__ = "0.1.0"

__all__ = ["FIGURE_KINDS", "PlotJob", "render", "RunData", "SchemaError", "load_run"]
