"""credofig: renders credosim result CSVs into publication-style figures."""

__version__ = "0.1.0"

from .render import RenderResult, render, render_labor_panels, render_simplex, render_timeseries
from .spec import FigureSpec, SpecError, load_spec

__all__ = [
    "__version__",
    "FigureSpec",
    "SpecError",
    "load_spec",
    "render",
    "render_simplex",
    "render_timeseries",
    "render_labor_panels",
    "RenderResult",
]
