import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpplscan import (
    DataError,
    DomainError,
    LpplParams,
    TimeSeries,
    Window,
    lppl_curve,
    lppl_value,
    rmse,
    sse,
)


# ---------------------------------------------------------------------------
# lppl_value
# ---------------------------------------------------------------------------

def test_constant_when_b_and_c_vanish():
    p = LpplParams(A=1.0, B=0.0, C=0.0, m=0.5, omega=8.0, phi=0.0, t_c=10.0)
    assert lppl_value(p, 5.0) == pytest.approx(1.0, abs=1e-12)


def test_pure_power_law():
    # -1 * (10-6)^0.5 = -2 with the oscillation switched off
    p = LpplParams(A=0.0, B=-1.0, C=0.0, m=0.5, omega=8.0, phi=0.0, t_c=10.0)
    assert lppl_value(p, 6.0) == pytest.approx(-2.0, abs=1e-12)


def test_unit_tau_kills_the_phase_log():
    # tau = 1 makes ln(tau) = 0, so the cosine contributes cos(phi) = 1
    p = LpplParams(A=2.0, B=-1.0, C=0.5, m=0.5, omega=8.0, phi=0.0, t_c=10.0)
    assert lppl_value(p, 9.0) == pytest.approx(1.5, abs=1e-12)


def test_value_against_high_precision_evaluation():
    # frozen from a 60-digit term-by-term evaluation (mpmath):
    # A + B*tau^m + C*tau^m*cos(omega*ln(tau) + phi) at tau = 83
    p = LpplParams(A=0.3, B=-0.6, C=0.2, m=0.4, omega=7.0, phi=1.0, t_c=120.0)
    assert lppl_value(p, 37.0) == pytest.approx(-2.1950394130991024, rel=1e-12)


def test_evaluation_at_or_past_critical_time_rejected():
    p = LpplParams(A=1.0, B=-1.0, C=0.1, m=0.5, omega=8.0, phi=0.0, t_c=10.0)
    with pytest.raises(DomainError):
        lppl_value(p, 10.0)
    with pytest.raises(DomainError):
        lppl_value(p, 11.0)
    with pytest.raises(DomainError):
        lppl_curve(p, np.array([1.0, 9.0, 10.5]))


def test_non_finite_parameters_rejected():
    with pytest.raises(DomainError):
        LpplParams(A=math.nan, B=0.0, C=0.0, m=0.5, omega=8.0, phi=0.0, t_c=10.0)
    with pytest.raises(DomainError):
        LpplParams(A=0.0, B=math.inf, C=0.0, m=0.5, omega=8.0, phi=0.0, t_c=10.0)


def test_monotone_increasing_for_pure_bubble_shape():
    # C = 0, B < 0, 0 < m < 1: strictly increasing toward the singularity
    p = LpplParams(A=1.0, B=-0.8, C=0.0, m=0.4, omega=8.0, phi=0.0, t_c=100.0)
    values = lppl_curve(p, np.arange(99))
    assert np.all(np.diff(values) > 0)


@settings(max_examples=50, deadline=None)
@given(
    phi=st.floats(0.0, 2 * math.pi),
    m=st.floats(0.1, 0.9),
    omega=st.floats(4.0, 16.0),
    c=st.floats(-1.0, 1.0),
)
def test_phase_periodicity(phi, m, omega, c):
    base = dict(A=1.2, B=-0.7, C=c, m=m, omega=omega, t_c=120.0)
    p1 = LpplParams(phi=phi, **base)
    p2 = LpplParams(phi=phi + 2 * math.pi, **base)
    t = np.linspace(0.0, 119.0, 40)
    np.testing.assert_allclose(lppl_curve(p1, t), lppl_curve(p2, t), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    m=st.floats(0.05, 0.95),
    omega=st.floats(4.0, 16.0),
    phi=st.floats(0.0, 2 * math.pi),
    b=st.floats(-5.0, 5.0),
    c=st.floats(-2.0, 2.0),
)
def test_oscillation_bounded_by_c_envelope(m, omega, phi, b, c):
    p = LpplParams(A=0.5, B=b, C=c, m=m, omega=omega, phi=phi, t_c=130.0)
    t = np.linspace(0.0, 129.0, 60)
    tau = p.t_c - t
    envelope = abs(c) * tau**m
    deviation = np.abs(lppl_curve(p, t) - (p.A + p.B * tau**m))
    assert np.all(deviation <= envelope + 1e-9)


def test_param_array_round_trip():
    p = LpplParams(A=1.0, B=-2.0, C=0.3, m=0.5, omega=9.0, phi=2.0, t_c=50.0)
    assert LpplParams.from_array(p.as_array()) == p
    with pytest.raises(DomainError):
        LpplParams.from_array(np.zeros(6))


# ---------------------------------------------------------------------------
# sse / rmse
# ---------------------------------------------------------------------------

@pytest.fixture
def exact_series():
    p = LpplParams(A=1.5, B=-0.9, C=0.25, m=0.45, omega=7.5, phi=0.8, t_c=80.0)
    values = lppl_curve(p, np.arange(60.0))
    return p, TimeSeries.from_values(values, log_transformed=True)


def test_sse_zero_on_exact_series(exact_series):
    p, series = exact_series
    assert sse(p, series) <= 1e-20


def test_sse_single_point_window(exact_series):
    p, series = exact_series
    shifted = TimeSeries.from_values(series.values + 0.5, log_transformed=True)
    w = Window(10, 10)
    assert sse(p, shifted, w) == pytest.approx(0.25, rel=1e-12)


def test_sse_matches_independent_loop():
    rng = np.random.default_rng(42)
    p = LpplParams(A=0.7, B=-0.4, C=0.6, m=0.3, omega=11.0, phi=2.5, t_c=70.0)
    series = TimeSeries.from_values(rng.normal(size=50))
    w = Window(0, 49)
    expected = 0.0
    for i in range(50):
        r = series.values[i] - lppl_value(p, series.times[i])
        expected += r * r
    assert sse(p, series, w) == pytest.approx(expected, rel=1e-12)


def test_sse_invariant_under_window_point_permutation():
    # the sum over residuals cannot depend on the order points are visited
    rng = np.random.default_rng(3)
    p = LpplParams(A=0.2, B=-0.1, C=0.05, m=0.6, omega=9.0, phi=0.1, t_c=45.0)
    series = TimeSeries.from_values(rng.normal(size=40))
    w = Window(5, 30)
    residuals = [series.values[i] - lppl_value(p, series.times[i]) for i in range(5, 31)]
    rng.shuffle(residuals)
    assert sse(p, series, w) == pytest.approx(sum(r * r for r in residuals), rel=1e-9)


def test_sse_rejects_window_beyond_critical_time():
    p = LpplParams(A=0.0, B=-1.0, C=0.0, m=0.5, omega=8.0, phi=0.0, t_c=20.0)
    series = TimeSeries.from_values(np.zeros(30))
    with pytest.raises(DomainError):
        sse(p, series, Window(0, 29))


def test_sse_zero_implies_exact_reproduction(exact_series):
    p, series = exact_series
    assert sse(p, series) == 0.0
    np.testing.assert_array_equal(lppl_curve(p, series.times), series.values)


def test_rmse_values():
    assert rmse(0.0, 10) == 0.0
    assert rmse(4.0, 4) == pytest.approx(1.0, abs=1e-15)
    # sqrt(2.5 / 7), frozen from independent arithmetic
    assert rmse(2.5, 7) == pytest.approx(0.5976143046671968, rel=1e-15)
    with pytest.raises(DomainError):
        rmse(1.0, 0)
    with pytest.raises(DomainError):
        rmse(-1.0, 5)


# ---------------------------------------------------------------------------
# TimeSeries / Window
# ---------------------------------------------------------------------------

def test_time_series_validation():
    with pytest.raises(DataError):
        TimeSeries(times=np.array([0.0, 0.0]), values=np.array([1.0, 2.0]))
    with pytest.raises(DataError):
        TimeSeries(times=np.array([0.0, 1.0]), values=np.array([1.0]))
    with pytest.raises(DataError):
        TimeSeries.from_values([1.0])
    with pytest.raises(DataError):
        TimeSeries.from_values([1.0, np.nan, 2.0])


def test_time_series_is_read_only():
    series = TimeSeries.from_values([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        series.values[0] = 99.0


def test_time_series_date_validation():
    import datetime as dt

    d0 = dt.date(2016, 1, 4)
    good = [d0, dt.date(2016, 1, 5)]
    series = TimeSeries.from_values([1.0, 2.0], dates=good)
    assert series.dates == tuple(good)
    with pytest.raises(DataError):
        TimeSeries.from_values([1.0, 2.0], dates=[good[1], good[0]])
    with pytest.raises(DataError):
        TimeSeries.from_values([1.0, 2.0, 3.0], dates=good)


def test_window_geometry():
    w = Window(20, 99)
    assert w.length == 80
    assert w.slice == slice(20, 100)
    series = TimeSeries.from_values(np.arange(50.0))
    with pytest.raises(DataError):
        series.window(Window(0, 50))
    with pytest.raises(DataError):
        series.window(Window(-1, 10))
