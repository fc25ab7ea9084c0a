"""Business-day calendar helpers.

Observation indices map to calendar dates through the input date ladder;
indices past the last observation extend the ladder with weekdays only
(Mon-Fri, no holiday calendar).  This keeps forecast critical times on a
calendar without weekend gaps distorting the time axis.
"""

from __future__ import annotations

from datetime import date as Date
from datetime import timedelta
from typing import Sequence

__all__ = ["next_business_day", "business_day_ladder", "date_for_index"]

_ONE_DAY = timedelta(days=1)


def next_business_day(d: Date) -> Date:
    d = d + _ONE_DAY
    while d.weekday() >= 5:
        d = d + _ONE_DAY
    return d


def business_day_ladder(start: Date, n: int) -> list[Date]:
    """First n weekdays starting at ``start`` (advanced to Monday if needed)."""
    d = start
    while d.weekday() >= 5:
        d = d + _ONE_DAY
    out = [d]
    while len(out) < n:
        d = next_business_day(d)
        out.append(d)
    return out[:n]


def date_for_index(dates: Sequence[Date], index: int) -> Date:
    """Calendar date for an observation index, extrapolating past the end."""
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    if index < len(dates):
        return dates[index]
    d = dates[-1]
    for _ in range(index - len(dates) + 1):
        d = next_business_day(d)
    return d
