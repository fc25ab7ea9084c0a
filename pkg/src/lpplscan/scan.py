"""Multi-window scan: calibrate, filter, aggregate critical times.

A scan fits the model on many calibration windows that share their end
(the as-of date) and differ in start, applies the acceptance constraints
to each fit, and pools the accepted critical times into a histogram.
The bubble verdict is YES when enough signals exist and they cluster.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import date as Date

import numpy as np

from .calibrate import FitResult, GaConfig, SearchBounds, calibrate_window
from .dates import date_for_index
from .errors import ConfigError, DataError, LpplScanError
from .model import TimeSeries, Window

__all__ = [
    "WindowConfig",
    "FilterConfig",
    "VerdictConfig",
    "ScanReport",
    "generate_windows",
    "accept_signal",
    "histogram_and_verdict",
    "scan",
    "derive_window_seed",
]


@dataclass(frozen=True)
class WindowConfig:
    """Geometry of the calibration windows.

    All windows end at ``end_index`` (default: the last observation) and
    their start indices step by ``stride``; lengths range from
    ``min_length`` up to ``max_length`` (default: everything available).
    """

    min_length: int = 60
    max_length: int | None = None
    stride: int = 5
    end_index: int | None = None

    def validate(self) -> None:
        if self.min_length < 2:
            raise ConfigError(f"min_length must be >= 2, got {self.min_length}")
        if self.max_length is not None and self.max_length < self.min_length:
            raise ConfigError(
                f"max_length ({self.max_length}) must be >= min_length ({self.min_length})"
            )
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.end_index is not None and self.end_index < 0:
            raise ConfigError(f"end_index must be >= 0, got {self.end_index}")


@dataclass(frozen=True)
class FilterConfig:
    """Acceptance constraints a fit must satisfy to count as a bubble signal.

    Defaults are the stringent constraints identified by backtesting the
    model on historical bubbles: 0.1 < m < 0.9, 6 < omega < 13, |C| < 1,
    B < 0, with the critical time inside a horizon past the window end.
    ``require_positive_B`` flips the sign convention to probe sharp-rise
    (negative bubble) scenarios; that flip is always an explicit choice.
    """

    m_min: float = 0.1
    m_max: float = 0.9
    omega_min: float = 6.0
    omega_max: float = 13.0
    c_abs_max: float = 1.0
    require_negative_B: bool = True
    require_positive_B: bool = False
    tc_min_offset: float = 0.0
    tc_max_offset: float | None = None  # None -> half the window length
    max_rmse: float | None = None

    def validate(self) -> None:
        if not self.m_min < self.m_max:
            raise ConfigError(f"need m_min < m_max, got ({self.m_min}, {self.m_max})")
        if not self.omega_min < self.omega_max:
            raise ConfigError(
                f"need omega_min < omega_max, got ({self.omega_min}, {self.omega_max})"
            )
        if self.c_abs_max <= 0:
            raise ConfigError(f"c_abs_max must be > 0, got {self.c_abs_max}")
        if self.tc_min_offset < 0:
            raise ConfigError(f"tc_min_offset must be >= 0, got {self.tc_min_offset}")
        if self.tc_max_offset is not None and self.tc_max_offset <= self.tc_min_offset:
            raise ConfigError(
                f"tc_max_offset ({self.tc_max_offset}) must exceed tc_min_offset "
                f"({self.tc_min_offset})"
            )
        if self.max_rmse is not None and self.max_rmse <= 0:
            raise ConfigError(f"max_rmse must be > 0, got {self.max_rmse}")
        if self.require_negative_B and self.require_positive_B:
            raise ConfigError("require_negative_B and require_positive_B are exclusive")


@dataclass(frozen=True)
class VerdictConfig:
    """Decision rule turning accepted signals into a YES/NO verdict."""

    min_signals: int = 5
    cluster_radius: int = 5
    cluster_fraction: float = 0.5

    def validate(self) -> None:
        if self.min_signals < 1:
            raise ConfigError(f"min_signals must be >= 1, got {self.min_signals}")
        if self.cluster_radius < 0:
            raise ConfigError(f"cluster_radius must be >= 0, got {self.cluster_radius}")
        if not 0.0 < self.cluster_fraction <= 1.0:
            raise ConfigError(
                f"cluster_fraction must be in (0, 1], got {self.cluster_fraction}"
            )


@dataclass(frozen=True)
class ScanReport:
    """Everything a scan produced: fits, histogram, verdict."""

    fits: tuple[FitResult, ...]
    failures: tuple[tuple[Window, str], ...]
    histogram: tuple[tuple[int, int], ...]  # (t_c bin, count), ascending bins
    n_windows: int
    n_accepted: int
    verdict: bool
    mode_bin: int | None
    mode_count: int
    cluster_count: int
    mode_date: Date | None
    verdict_config: VerdictConfig

    @property
    def verdict_label(self) -> str:
        return "YES" if self.verdict else "NO"


def generate_windows(series_length: int, config: WindowConfig | None = None) -> list[Window]:
    """Enumerate calibration windows for a series of the given length."""
    config = config or WindowConfig()
    config.validate()
    end = config.end_index if config.end_index is not None else series_length - 1
    if end >= series_length:
        raise ConfigError(f"end_index {end} out of series bounds [0, {series_length - 1}]")
    available = end + 1
    max_length = min(config.max_length or available, available)
    if config.min_length > max_length:
        raise DataError(
            f"no window fits: min_length {config.min_length} exceeds the "
            f"{max_length} observations available up to index {end}"
        )
    first_start = available - max_length
    last_start = available - config.min_length
    return [Window(start, end) for start in range(first_start, last_start + 1, config.stride)]


def accept_signal(fit: FitResult, filter_config: FilterConfig | None = None) -> tuple[bool, list[str]]:
    """Check one fit against the acceptance constraints.

    Returns (accepted, violated-predicate names).  All parameter bounds are
    strict inequalities; the critical-time horizon is open at the lower
    offset and closed at the upper.
    """
    cfg = filter_config or FilterConfig()
    cfg.validate()
    p = fit.params
    reasons = []
    if not cfg.m_min < p.m < cfg.m_max:
        reasons.append("m out of range")
    if not cfg.omega_min < p.omega < cfg.omega_max:
        reasons.append("omega out of range")
    if not abs(p.C) < cfg.c_abs_max:
        reasons.append("oscillation amplitude")
    if cfg.require_negative_B and not p.B < 0:
        reasons.append("B sign")
    if cfg.require_positive_B and not p.B > 0:
        reasons.append("B sign")
    tc_max = cfg.tc_max_offset if cfg.tc_max_offset is not None else 0.5 * fit.window.length
    offset = p.t_c - fit.window.end
    if not cfg.tc_min_offset < offset <= tc_max:
        reasons.append("t_c horizon")
    if cfg.max_rmse is not None and not fit.rmse <= cfg.max_rmse:
        reasons.append("rmse too large")
    return (not reasons, reasons)


def derive_window_seed(master_seed: int, window: Window) -> int:
    """Stable per-window GA seed; depends only on the window identity."""
    ss = np.random.SeedSequence([int(master_seed), int(window.start), int(window.length)])
    return int(ss.generate_state(1, np.uint64)[0])


def _tc_bin(t_c: float) -> int:
    # round half up so bins are stable under tiny perturbations around .5
    return int(math.floor(t_c + 0.5))


def histogram_and_verdict(
    tc_values, verdict_config: VerdictConfig | None = None
) -> tuple[tuple[tuple[int, int], ...], int | None, int, int, bool]:
    """Bin accepted critical times (one bin per index unit) and decide.

    Returns (histogram, mode_bin, mode_count, cluster_count, verdict).
    Verdict is YES when at least ``min_signals`` signals exist and the
    bins within ``cluster_radius`` of the mode hold at least
    ``cluster_fraction`` of them.  Ties on the mode pick the earliest bin.
    """
    cfg = verdict_config or VerdictConfig()
    cfg.validate()
    counts: dict[int, int] = {}
    for t_c in tc_values:
        b = _tc_bin(float(t_c))
        counts[b] = counts.get(b, 0) + 1
    histogram = tuple(sorted(counts.items()))
    n_accepted = sum(counts.values())
    if not counts:
        return histogram, None, 0, 0, False
    mode_bin = min(counts, key=lambda b: (-counts[b], b))
    mode_count = counts[mode_bin]
    cluster_count = sum(
        c for b, c in counts.items()
        if mode_bin - cfg.cluster_radius <= b <= mode_bin + cfg.cluster_radius
    )
    verdict = (
        n_accepted >= cfg.min_signals
        and cluster_count >= cfg.cluster_fraction * n_accepted
    )
    return histogram, mode_bin, mode_count, cluster_count, verdict


def scan(
    series: TimeSeries,
    window_config: WindowConfig | None = None,
    bounds: SearchBounds | None = None,
    ga_config: GaConfig | None = None,
    filter_config: FilterConfig | None = None,
    verdict_config: VerdictConfig | None = None,
    *,
    master_seed: int = 0,
    threads: int = 1,
    polish: bool = False,
    linear_solve: bool = False,
) -> ScanReport:
    """Calibrate every window, filter the fits, histogram accepted t_c.

    Window calibrations are independent; with ``threads`` > 1 they run on a
    thread pool.  Each window's GA seed derives from (master_seed, window),
    and aggregation happens in window order, so the report is identical
    for any thread count.
    """
    window_config = window_config or WindowConfig()
    ga_config = ga_config or GaConfig()
    filter_config = filter_config or FilterConfig()
    verdict_config = verdict_config or VerdictConfig()
    filter_config.validate()
    verdict_config.validate()
    windows = generate_windows(len(series), window_config)

    def fit_one(window: Window):
        cfg = replace(ga_config, seed=derive_window_seed(master_seed, window))
        try:
            fit = calibrate_window(series, window, bounds, cfg,
                                   polish=polish, linear_solve=linear_solve)
            return window, fit, None
        except LpplScanError as exc:
            return window, None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(fit_one, windows))
    else:
        outcomes = [fit_one(w) for w in windows]

    fits: list[FitResult] = []
    failures: list[tuple[Window, str]] = []
    for window, fit, error in outcomes:
        if fit is None:
            failures.append((window, error))
            continue
        ok, reasons = accept_signal(fit, filter_config)
        fits.append(replace(fit, accepted=ok, rejection_reasons=tuple(reasons)))

    histogram, mode_bin, mode_count, cluster_count, verdict = histogram_and_verdict(
        (f.params.t_c for f in fits if f.accepted), verdict_config
    )
    n_accepted = sum(c for _, c in histogram)
    mode_date = None
    if mode_bin is not None and series.dates is not None and mode_bin >= 0:
        mode_date = date_for_index(series.dates, mode_bin)

    return ScanReport(
        fits=tuple(fits),
        failures=tuple(failures),
        histogram=histogram,
        n_windows=len(windows),
        n_accepted=n_accepted,
        verdict=verdict,
        mode_bin=mode_bin,
        mode_count=mode_count,
        cluster_count=cluster_count,
        mode_date=mode_date,
        verdict_config=verdict_config,
    )
