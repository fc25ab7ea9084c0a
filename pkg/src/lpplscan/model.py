"""Log-periodic power law (LPPL) model core.

The model describes the mean log-price of an asset in a bubble regime as a
power-law growth toward a finite-time singularity at the critical time t_c,
decorated with oscillations that are periodic in log(t_c - t):

    lppl(t) = A + B * (t_c - t)^m + C * (t_c - t)^m * cos(omega * ln(t_c - t) + phi)

This module holds the parameter container, the time-series container, the
model evaluation and the sum-of-squares calibration objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError, DomainError

__all__ = [
    "PARAM_NAMES",
    "LpplParams",
    "TimeSeries",
    "Window",
    "lppl_value",
    "lppl_curve",
    "sse",
    "rmse",
]

# Canonical gene/field order used everywhere a parameter vector appears.
PARAM_NAMES = ("A", "B", "C", "m", "omega", "phi", "t_c")


@dataclass(frozen=True)
class LpplParams:
    """The seven free parameters of the LPPL function.

    Attributes
    ----------
    A : float
        Log-price level at the critical time.
    B : float
        Power-law amplitude; B < 0 in a positive (crash-bound) bubble.
    C : float
        Oscillation amplitude relative to the power-law term.
    m : float
        Power-law exponent; 0 < m < 1 keeps the price finite at t_c while
        still accelerating super-exponentially.
    omega : float
        Angular frequency of the log-periodic oscillations.
    phi : float
        Phase, in radians.
    t_c : float
        Critical time, on the same (index) axis as the observation times.
        The model is only defined for t < t_c.
    """

    A: float
    B: float
    C: float
    m: float
    omega: float
    phi: float
    t_c: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"parameter {name} must be finite, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.m, self.omega, self.phi, self.t_c])

    @classmethod
    def from_array(cls, x) -> "LpplParams":
        a = np.asarray(x, dtype=float)
        if a.shape != (7,):
            raise DomainError(f"parameter vector must have 7 entries, got shape {a.shape}")
        return cls(*(float(v) for v in a))


class Window(NamedTuple):
    """Inclusive index range [start, end] of a calibration window."""

    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    @property
    def slice(self) -> slice:
        return slice(self.start, self.end + 1)


@dataclass(frozen=True)
class TimeSeries:
    """An ordered series of observations on an integer index time axis.

    ``values`` holds the fitted quantity: natural-log prices when
    ``log_transformed`` is set, raw values otherwise (for series such as
    rate spreads that may be near zero or negative).
    """

    times: np.ndarray
    values: np.ndarray
    dates: tuple[Date, ...] | None = None
    log_transformed: bool = False

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).copy()
        values = np.asarray(self.values, dtype=float).copy()
        if times.ndim != 1 or values.ndim != 1:
            raise DataError("times and values must be one-dimensional")
        if len(times) != len(values):
            raise DataError(f"length mismatch: {len(times)} times vs {len(values)} values")
        if len(times) < 2:
            raise DataError("a series needs at least 2 observations")
        if np.any(np.diff(times) <= 0):
            raise DataError("times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DataError("values must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.dates is not None:
            dates = tuple(self.dates)
            if len(dates) != len(times):
                raise DataError("dates must parallel times")
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise DataError("dates must be strictly increasing")
            object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def from_values(
        cls,
        values: Sequence[float],
        dates: Sequence[Date] | None = None,
        log_transformed: bool = False,
    ) -> "TimeSeries":
        """Build a series on the default index time axis 0..N-1."""
        values = np.asarray(values, dtype=float)
        times = np.arange(len(values), dtype=float)
        return cls(times=times, values=values, dates=tuple(dates) if dates else None,
                   log_transformed=log_transformed)

    def window(self, window: Window) -> tuple[np.ndarray, np.ndarray]:
        """Return the (times, values) slice for ``window``, bounds-checked."""
        if window.start < 0 or window.end >= len(self) or window.start > window.end:
            raise DataError(f"window {window} out of series bounds [0, {len(self) - 1}]")
        return self.times[window.slice], self.values[window.slice]


def lppl_curve(params: LpplParams, times) -> np.ndarray:
    """Evaluate the LPPL function on an array of times.

    All times must lie strictly before ``params.t_c``; tau = t_c - t would
    otherwise leave the domain of the power and the logarithm.
    """
    t = np.asarray(times, dtype=float)
    tau = params.t_c - t
    if np.any(tau <= 0):
        raise DomainError(
            f"model undefined at t >= t_c (t_c = {params.t_c}, max t = {t.max()})"
        )
    lntau = np.log(tau)
    power = np.exp(params.m * lntau)
    return params.A + power * (params.B + params.C * np.cos(params.omega * lntau + params.phi))


def lppl_value(params: LpplParams, t: float) -> float:
    """Evaluate the LPPL function at a single time t < t_c."""
    return float(lppl_curve(params, np.array([t]))[0])


def sse(params: LpplParams, series: TimeSeries, window: Window | None = None) -> float:
    """Sum of squared residuals between the series and the LPPL curve.

    This is the calibration objective; its square root divided by the window
    length (see :func:`rmse`) is reported alongside for readability.  The
    minimizer of either is the same parameter set.
    """
    if window is None:
        window = Window(0, len(series) - 1)
    t_w, v_w = series.window(window)
    residuals = v_w - lppl_curve(params, t_w)
    return float(residuals @ residuals)


def rmse(sse_value: float, n: int) -> float:
    """Root mean square error from a residual sum of squares over n points."""
    if n < 1:
        raise DomainError(f"rmse needs n >= 1, got {n}")
    if sse_value < 0:
        raise DomainError(f"sse must be non-negative, got {sse_value}")
    return math.sqrt(sse_value / n)
