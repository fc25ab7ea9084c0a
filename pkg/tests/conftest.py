"""Shared fixtures and scan-invariant bookkeeping."""

from __future__ import annotations

import numpy as np
import pytest

from lpplscan import (
    GaConfig,
    LpplParams,
    ScanReport,
    SynthSpec,
    WindowConfig,
    accept_signal,
    generate_lppl_series,
)

# Canonical synthetic bubble used across the suite: N=250 observations,
# singularity 10 index units past the sample end.
TRUTH = LpplParams(A=2.0, B=-0.6, C=0.3, m=0.5, omega=8.0, phi=1.0, t_c=260.0)

# Every scan the suite runs is checked against the structural invariants
# below; the acceptance module asserts that no scan ever violated them.
SCAN_INVARIANT_LOG: list[tuple[str, int]] = []


@pytest.fixture(scope="session")
def truth() -> LpplParams:
    return TRUTH


@pytest.fixture(scope="session")
def clean_series():
    return generate_lppl_series(SynthSpec(truth=TRUTH, n_points=250, noise_sigma=0.0, seed=7))


@pytest.fixture(scope="session")
def noisy_series():
    return generate_lppl_series(SynthSpec(truth=TRUTH, n_points=250, noise_sigma=0.01, seed=7))


@pytest.fixture
def fast_ga() -> GaConfig:
    """Small GA budget for unit tests that only need plausibility."""
    return GaConfig(population_size=50, max_generations=80, stall_generations=25)


def check_scan_invariants(report: ScanReport, window_config: WindowConfig,
                          series_length: int, filter_config=None, label: str = "scan") -> None:
    """Structural invariants every scan must satisfy; logged for acceptance."""
    violations = 0
    if sum(count for _, count in report.histogram) != report.n_accepted:
        violations += 1
    if report.n_accepted > report.n_windows:
        violations += 1
    if sum(1 for f in report.fits if f.accepted) != report.n_accepted:
        violations += 1
    end = window_config.end_index if window_config.end_index is not None else series_length - 1
    max_length = min(window_config.max_length or end + 1, end + 1)
    for fit in report.fits:
        if fit.window.end != end:
            violations += 1
        if not window_config.min_length <= fit.window.length <= max_length:
            violations += 1
        ok, reasons = accept_signal(fit, filter_config)
        if fit.accepted and not ok:
            violations += 1
        if not fit.accepted and not reasons:
            violations += 1
        if sorted(reasons) != sorted(fit.rejection_reasons):
            violations += 1
        if not (fit.sse >= 0 and np.isfinite(fit.sse)):
            violations += 1
    SCAN_INVARIANT_LOG.append((label, violations))
    assert violations == 0, f"{label}: {violations} scan invariant violation(s)"
