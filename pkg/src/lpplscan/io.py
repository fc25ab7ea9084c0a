"""CSV ingestion and report serialization.

Input series are UTF-8 CSV files with header ``date,value``, ISO-8601
dates and plain decimal values.  Reports are JSON with floats written at
full round-trip precision (every number re-parses to the exact double
that produced it), and plot-ready data goes to CSV.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from datetime import date as Date
from pathlib import Path

import numpy as np

from .calibrate import FitResult, GaConfig, SearchBounds
from .dates import date_for_index
from .errors import DataError
from .model import PARAM_NAMES, TimeSeries, lppl_curve
from .scan import FilterConfig, ScanReport, VerdictConfig, WindowConfig

__all__ = [
    "ingest_csv",
    "write_series_csv",
    "write_fit_json",
    "write_curve_csv",
    "write_report_json",
    "write_histogram_csv",
    "fit_to_dict",
    "report_to_dict",
]


def ingest_csv(path, log_transform: bool = True) -> TimeSeries:
    """Parse a ``date,value`` CSV into a TimeSeries on index time 0..N-1.

    Dates must be ISO-8601 and strictly increasing.  With ``log_transform``
    the values are natural-logged (the model fits log prices), which
    requires them to be strictly positive.  Errors name the offending line.
    """
    path = Path(path)
    dates: list[Date] = []
    values: list[float] = []
    try:
        fh = path.open(newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["date", "value"]:
            raise DataError(f"{path}: expected header 'date,value', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DataError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
            raw_date, raw_value = row[0].strip(), row[1].strip()
            try:
                d = Date.fromisoformat(raw_date)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: bad date {raw_date!r}") from exc
            try:
                v = float(raw_value)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: bad value {raw_value!r}") from exc
            if not math.isfinite(v):
                raise DataError(f"{path}: line {lineno}: value must be finite")
            if dates and d <= dates[-1]:
                raise DataError(
                    f"{path}: line {lineno}: date {d.isoformat()} not after "
                    f"{dates[-1].isoformat()}"
                )
            if log_transform and v <= 0:
                raise DataError(
                    f"{path}: line {lineno}: non-positive value {raw_value} "
                    f"cannot be log-transformed"
                )
            dates.append(d)
            values.append(v)
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 data rows, got {len(values)}")
    data = np.log(values) if log_transform else np.asarray(values, dtype=float)
    return TimeSeries.from_values(data, dates=dates, log_transformed=log_transform)


def write_series_csv(path, dates, values) -> None:
    """Write a ``date,value`` CSV consumable by :func:`ingest_csv`."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "value"])
        for d, v in zip(dates, values):
            writer.writerow([d.isoformat(), repr(float(v))])


def _window_json(window) -> list[int]:
    return [int(window.start), int(window.end)]


def fit_to_dict(fit: FitResult, series: TimeSeries) -> dict:
    """JSON-ready record of one fit, with the t_c calendar date if known."""
    record = {
        "params": {name: getattr(fit.params, name) for name in PARAM_NAMES},
        "sse": fit.sse,
        "rmse": fit.rmse,
        "generations_run": fit.generations_run,
        "objective_evaluations": fit.objective_evaluations,
        "converged": fit.converged,
        "window": _window_json(fit.window),
        "accepted": fit.accepted,
        "rejection_reasons": list(fit.rejection_reasons),
        "t_c_date": None,
    }
    if series.dates is not None and fit.params.t_c >= 0:
        record["t_c_date"] = date_for_index(series.dates, round(fit.params.t_c)).isoformat()
    return record


def _config_echo(
    window_config: WindowConfig,
    bounds: SearchBounds,
    ga_config: GaConfig,
    filter_config: FilterConfig,
    verdict_config: VerdictConfig,
    log_transform: bool,
    seed: int,
    polish: bool,
    linear_solve: bool,
) -> dict:
    # deliberately excludes execution-environment settings (threads, paths):
    # reports must be byte-identical across parallelism levels and locations
    return {
        "log_transform": log_transform,
        "seed": seed,
        "polish": polish,
        "linear_solve": linear_solve,
        "window": asdict(window_config),
        "bounds": {k: list(v) if v is not None else None for k, v in asdict(bounds).items()},
        "ga": asdict(ga_config),
        "filter": asdict(filter_config),
        "verdict": asdict(verdict_config),
    }


def report_to_dict(
    report: ScanReport,
    series: TimeSeries,
    *,
    seed: int,
    window_config: WindowConfig,
    bounds: SearchBounds,
    ga_config: GaConfig,
    filter_config: FilterConfig,
    log_transform: bool = True,
    polish: bool = True,
    linear_solve: bool = False,
) -> dict:
    histogram = []
    for bin_index, count in report.histogram:
        entry = {"t_c_index": bin_index, "count": count, "date": None}
        if series.dates is not None and bin_index >= 0:
            entry["date"] = date_for_index(series.dates, bin_index).isoformat()
        histogram.append(entry)
    return {
        "verdict": report.verdict_label,
        "n_windows": report.n_windows,
        "n_accepted": report.n_accepted,
        "mode": {
            "t_c_index": report.mode_bin,
            "date": report.mode_date.isoformat() if report.mode_date else None,
            "count": report.mode_count,
            "cluster_count": report.cluster_count,
            "cluster_radius": report.verdict_config.cluster_radius,
        },
        "histogram": histogram,
        "fits": [fit_to_dict(f, series) for f in report.fits],
        "failures": [
            {"window": _window_json(w), "error": msg} for w, msg in report.failures
        ],
        "config": _config_echo(
            window_config, bounds, ga_config, filter_config, report.verdict_config,
            log_transform, seed, polish, linear_solve,
        ),
    }


def write_json(path, payload: dict) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_fit_json(path, payload: dict) -> None:
    write_json(path, payload)


def write_report_json(path, payload: dict) -> None:
    write_json(path, payload)


def write_histogram_csv(path, report: ScanReport, series: TimeSeries) -> None:
    """``date,t_c_index,count`` rows, ascending by bin index."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "t_c_index", "count"])
        for bin_index, count in report.histogram:
            label = ""
            if series.dates is not None and bin_index >= 0:
                label = date_for_index(series.dates, bin_index).isoformat()
            writer.writerow([label, bin_index, count])


def write_curve_csv(path, fit: FitResult, series: TimeSeries) -> None:
    """``t,date,observed,fitted`` over the fit's window."""
    path = Path(path)
    t_w, v_w = series.window(fit.window)
    fitted = lppl_curve(fit.params, t_w)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "date", "observed", "fitted"])
        for t, obs, model in zip(t_w, v_w, fitted):
            label = ""
            if series.dates is not None:
                label = series.dates[int(t)].isoformat()
            writer.writerow([int(t), label, repr(float(obs)), repr(float(model))])
