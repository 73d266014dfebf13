"""Figure rendering for simulator experiment CSVs."""

from .render import (
    FIGURE_KINDS,
    REQUIRED_COLUMNS,
    CurveLayer,
    PlotSpec,
    RenderResult,
    render,
)

__all__ = [
    "FIGURE_KINDS",
    "REQUIRED_COLUMNS",
    "CurveLayer",
    "PlotSpec",
    "RenderResult",
    "render",
]
