"""Static figures from soliton trajectory CSV exports."""

from .csvio import FormatError, TrajectoryData, read_trajectory
from .figures import RenderResult, count_interior_minima, render

__all__ = [
    "FormatError",
    "TrajectoryData",
    "read_trajectory",
    "RenderResult",
    "count_interior_minima",
    "render",
]
