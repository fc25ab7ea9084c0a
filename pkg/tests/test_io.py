import datetime as dt
import json
import math

import numpy as np
import pytest

from lpplscan import DataError, LpplParams, TimeSeries, Window, ingest_csv
from lpplscan.calibrate import FitResult
from lpplscan.dates import business_day_ladder, date_for_index, next_business_day
from lpplscan.io import fit_to_dict, write_curve_csv, write_json, write_series_csv


def write(tmp_path, text, name="series.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_ingest_two_rows_with_log_transform(tmp_path):
    path = write(tmp_path, "date,value\n2016-01-04,100.0\n2016-01-05,101.0\n")
    series = ingest_csv(path)
    assert list(series.times) == [0.0, 1.0]
    assert series.values[0] == math.log(100.0)
    assert series.values[1] == math.log(101.0)
    assert series.log_transformed
    assert series.dates == (dt.date(2016, 1, 4), dt.date(2016, 1, 5))


def test_ingest_without_log_transform(tmp_path):
    path = write(tmp_path, "date,value\n2016-01-04,-0.5\n2016-01-05,0.25\n")
    series = ingest_csv(path, log_transform=False)
    assert list(series.values) == [-0.5, 0.25]
    assert not series.log_transformed


def test_ingest_rejects_unordered_dates_naming_the_line(tmp_path):
    path = write(tmp_path, "date,value\n2016-01-05,100.0\n2016-01-04,101.0\n")
    with pytest.raises(DataError, match="line 3"):
        ingest_csv(path)


def test_ingest_rejects_malformed_header(tmp_path):
    path = write(tmp_path, "time,price\n2016-01-04,100.0\n2016-01-05,101.0\n")
    with pytest.raises(DataError, match="header"):
        ingest_csv(path)


def test_ingest_rejects_bad_value_and_date(tmp_path):
    path = write(tmp_path, "date,value\n2016-01-04,abc\n")
    with pytest.raises(DataError, match="line 2"):
        ingest_csv(path)
    path = write(tmp_path, "date,value\n04/01/2016,10.0\n")
    with pytest.raises(DataError, match="bad date"):
        ingest_csv(path)


def test_ingest_rejects_nonpositive_under_log(tmp_path):
    path = write(tmp_path, "date,value\n2016-01-04,100.0\n2016-01-05,0.0\n")
    with pytest.raises(DataError, match="line 3"):
        ingest_csv(path)
    # fine when fitting raw values
    series = ingest_csv(path, log_transform=False)
    assert series.values[1] == 0.0


def test_ingest_requires_two_rows(tmp_path):
    path = write(tmp_path, "date,value\n2016-01-04,100.0\n")
    with pytest.raises(DataError, match="at least 2"):
        ingest_csv(path)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(tmp_path / "absent.csv")


def test_series_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(12)
    values = np.exp(rng.normal(size=250))
    dates = business_day_ladder(dt.date(2015, 3, 2), 250)
    path = tmp_path / "rt.csv"
    write_series_csv(path, dates, values)
    series = ingest_csv(path, log_transform=False)
    np.testing.assert_array_equal(series.values, values)
    assert series.dates == tuple(dates)


def test_json_floats_reparse_to_identical_doubles(tmp_path):
    fit = FitResult(
        params=LpplParams(A=0.1 + 0.2, B=-1.0 / 3.0, C=math.pi / 10, m=0.5,
                          omega=8.000000000000002, phi=1e-17 + 1.0, t_c=260.0000001),
        sse=1.2345678901234567e-05, rmse=3.3333333333333333e-04,
        generations_run=10, objective_evaluations=100, converged=True,
        window=Window(0, 9),
    )
    series = TimeSeries.from_values(np.ones(10) + np.arange(10) * 0.1,
                                    dates=business_day_ladder(dt.date(2016, 1, 4), 10))
    payload = fit_to_dict(fit, series)
    path = tmp_path / "fit.json"
    write_json(path, payload)
    back = json.loads(path.read_text())
    for name in ("A", "B", "C", "m", "omega", "phi", "t_c"):
        assert back["params"][name] == getattr(fit.params, name)
    assert back["sse"] == fit.sse
    assert back["rmse"] == fit.rmse


def test_curve_csv_has_one_row_per_window_point(tmp_path):
    params = LpplParams(A=1.0, B=-0.5, C=0.1, m=0.5, omega=8.0, phi=0.0, t_c=30.0)
    series = TimeSeries.from_values(np.linspace(1.0, 2.0, 25),
                                    dates=business_day_ladder(dt.date(2016, 1, 4), 25))
    fit = FitResult(params=params, sse=0.0, rmse=0.0, generations_run=1,
                    objective_evaluations=1, converged=True, window=Window(5, 20))
    path = tmp_path / "curve.csv"
    write_curve_csv(path, fit, series)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,date,observed,fitted"
    assert len(lines) - 1 == 16
    t, date, observed, fitted = lines[1].split(",")
    assert t == "5"
    assert float(observed) == series.values[5]


# ---------------------------------------------------------------------------
# business-day calendar
# ---------------------------------------------------------------------------

def test_next_business_day_skips_weekends():
    assert next_business_day(dt.date(2016, 6, 17)) == dt.date(2016, 6, 20)  # Fri -> Mon
    assert next_business_day(dt.date(2016, 6, 20)) == dt.date(2016, 6, 21)


def test_business_day_ladder_starts_on_weekday():
    ladder = business_day_ladder(dt.date(2016, 1, 2), 3)  # a Saturday
    assert ladder == [dt.date(2016, 1, 4), dt.date(2016, 1, 5), dt.date(2016, 1, 6)]
    assert all(d.weekday() < 5 for d in business_day_ladder(dt.date(2016, 2, 1), 30))


def test_date_for_index_extends_past_series_end():
    dates = [dt.date(2016, 6, 15), dt.date(2016, 6, 16), dt.date(2016, 6, 17)]  # Wed-Fri
    assert date_for_index(dates, 1) == dt.date(2016, 6, 16)
    assert date_for_index(dates, 3) == dt.date(2016, 6, 20)  # skips the weekend
    assert date_for_index(dates, 7) == dt.date(2016, 6, 24)
    with pytest.raises(ValueError):
        date_for_index(dates, -1)
