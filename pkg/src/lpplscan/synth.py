"""Synthetic series generators with known ground truth.

Two generators: an LPPL mean path plus i.i.d. Gaussian noise on the
(log-)value scale, and a log random walk that serves as the no-bubble
control when measuring false-positive behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import LpplParams, TimeSeries, lppl_curve

__all__ = ["SynthSpec", "generate_lppl_series", "generate_null_series"]


@dataclass(frozen=True)
class SynthSpec:
    """Ground truth plus noise model for a synthetic bubble series."""

    truth: LpplParams
    n_points: int
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 2:
            raise ConfigError(f"n_points must be >= 2, got {self.n_points}")
        if self.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        # every sample time must stay strictly before the singularity
        if not self.truth.t_c > self.n_points - 1:
            raise ConfigError(
                f"truth t_c ({self.truth.t_c}) must exceed the last sample time "
                f"({self.n_points - 1})"
            )


def generate_lppl_series(spec: SynthSpec) -> TimeSeries:
    """Sample the LPPL mean path at times 0..n-1 and add Gaussian noise."""
    times = np.arange(spec.n_points, dtype=float)
    values = lppl_curve(spec.truth, times)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        values = values + spec.noise_sigma * rng.standard_normal(spec.n_points)
    return TimeSeries(times=times, values=values, log_transformed=True)


def generate_null_series(n_points: int, drift: float, vol: float, seed: int = 0) -> TimeSeries:
    """Log-value random walk: v[0] = 0, v[i] = v[i-1] + drift + vol * z_i."""
    if n_points < 2:
        raise ConfigError(f"n_points must be >= 2, got {n_points}")
    if vol < 0:
        raise ConfigError(f"vol must be >= 0, got {vol}")
    rng = np.random.default_rng(seed)
    increments = drift + vol * rng.standard_normal(n_points - 1)
    values = np.concatenate([[0.0], np.cumsum(increments)])
    times = np.arange(n_points, dtype=float)
    return TimeSeries(times=times, values=values, log_transformed=True)
