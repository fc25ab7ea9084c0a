"""Figure rendering for fit and scan reports.

The scan chart follows the usual presentation for this kind of analysis:
the historical series and one representative fit on the left scale, and
the histogram of accepted critical times on the right scale.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .calibrate import FitResult
from .model import TimeSeries, lppl_curve
from .scan import ScanReport

__all__ = ["save_fit_figure", "save_scan_figure"]


def _value_label(series: TimeSeries) -> str:
    return "ln(price)" if series.log_transformed else "value"


def save_fit_figure(series: TimeSeries, fit: FitResult, path) -> None:
    """Observed series, fitted curve over the window, and the t_c marker."""
    fig, ax = plt.subplots(figsize=(10, 5))
    ax.plot(series.times, series.values, color="tab:blue", lw=1.0, label="series")
    t_w, _ = series.window(fit.window)
    ax.plot(t_w, lppl_curve(fit.params, t_w), color="tab:red", lw=1.5, label="LPPL fit")
    ax.axvline(fit.params.t_c, color="tab:red", ls="--", lw=1.0,
               label=f"$t_c$ = {fit.params.t_c:.1f}")
    ax.set_xlabel("observation index")
    ax.set_ylabel(_value_label(series))
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scan_figure(series: TimeSeries, report: ScanReport,
                     best_fit: FitResult | None, path) -> None:
    """Series + representative fit on the left scale, signal counts on the right."""
    fig, ax = plt.subplots(figsize=(10, 5))
    ax.plot(series.times, series.values, color="tab:blue", lw=1.0, label="series")
    if best_fit is not None:
        t_w, _ = series.window(best_fit.window)
        ax.plot(t_w, lppl_curve(best_fit.params, t_w), color="tab:red", lw=1.5,
                label="representative fit")
    ax.set_xlabel("observation index")
    ax.set_ylabel(_value_label(series))
    ax.set_title(f"bubble signals: {report.verdict_label} "
                 f"({report.n_accepted}/{report.n_windows} windows accepted)")

    if report.histogram:
        bins = np.array([b for b, _ in report.histogram])
        counts = np.array([c for _, c in report.histogram])
        ax2 = ax.twinx()
        ax2.bar(bins, counts, width=1.0, color="tab:green", alpha=0.5,
                label="accepted $t_c$ count")
        ax2.set_ylabel("bubble signals")
        ax2.set_ylim(0, max(counts.max() * 1.5, 1))
        handles1, labels1 = ax.get_legend_handles_labels()
        handles2, labels2 = ax2.get_legend_handles_labels()
        ax.legend(handles1 + handles2, labels1 + labels2, loc="upper left")
    else:
        ax.legend(loc="upper left")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
