"""Calibration, gap repair and seasonality reduction of mobility series."""
from .loess import LoessError, loess_fit, loess_smooth, tricube
from .series import (
    VARIANTS,
    CalibrationError,
    Decomposition,
    GapError,
    IrreparableGapError,
    ProcessedSeries,
    as_processed,
    calibrate,
    moving_average,
    repair_gaps,
    stl_decompose,
    stl_trend,
)
from .stl import StlLengthError, StlParams, StlResult, stl

__all__ = [
    "VARIANTS", "CalibrationError", "Decomposition", "GapError", "IrreparableGapError",
    "LoessError", "ProcessedSeries", "StlLengthError", "StlParams", "StlResult",
    "as_processed", "calibrate", "loess_fit", "loess_smooth", "moving_average",
    "repair_gaps", "stl", "stl_decompose", "stl_trend", "tricube",
]
