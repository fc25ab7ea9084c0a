"""LPPL bubble detection: GA calibration of the JLS model over sliding windows."""

from .calibrate import (
    FitResult,
    GaConfig,
    GaRunInfo,
    SearchBounds,
    calibrate_window,
    local_polish,
    run_ga,
)
from .errors import ConfigError, DataError, DomainError, LpplScanError, UsageError
from .io import ingest_csv
from .model import LpplParams, TimeSeries, Window, lppl_curve, lppl_value, rmse, sse
from .scan import (
    FilterConfig,
    ScanReport,
    VerdictConfig,
    WindowConfig,
    accept_signal,
    derive_window_seed,
    generate_windows,
    histogram_and_verdict,
    scan,
)
from .synth import SynthSpec, generate_lppl_series, generate_null_series

__version__ = "0.1.0"

__all__ = [
    "LpplParams",
    "TimeSeries",
    "Window",
    "lppl_value",
    "lppl_curve",
    "sse",
    "rmse",
    "GaConfig",
    "SearchBounds",
    "FitResult",
    "GaRunInfo",
    "run_ga",
    "calibrate_window",
    "local_polish",
    "WindowConfig",
    "FilterConfig",
    "VerdictConfig",
    "ScanReport",
    "generate_windows",
    "accept_signal",
    "histogram_and_verdict",
    "scan",
    "derive_window_seed",
    "SynthSpec",
    "generate_lppl_series",
    "generate_null_series",
    "ingest_csv",
    "LpplScanError",
    "DomainError",
    "ConfigError",
    "DataError",
    "UsageError",
    "__version__",
]
