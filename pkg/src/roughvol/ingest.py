"""Reading and cleaning daily realized-variance CSV files.

Input files carry one row per trading day with a configurable value
column. Rows with missing or nonpositive values are dropped and counted;
surviving rows are treated as consecutive business days (the volatility
clock stops while markets are closed, so calendar gaps do not enter).
The intraday return count m is derived from market session hours.
"""

from __future__ import annotations

import csv
import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .fracsim import CSV_FLOAT_FORMAT
from .proxy import RvSeries

DEFAULT_DELTA = 1.0 / 250.0  # one business day in years

_TIME_PATTERN = re.compile(r"^(\d{1,2}):(\d{2})$")


class IngestError(ValueError):
    """Malformed input file; the message names the offending line."""


def _parse_clock(value) -> int:
    """Clock time as minutes since midnight; accepts 'HH:MM' or minutes."""
    if isinstance(value, int):
        minutes = value
    else:
        match = _TIME_PATTERN.match(str(value).strip())
        if not match:
            raise ValueError(f"cannot parse clock time {value!r}; use 'HH:MM'")
        minutes = int(match.group(1)) * 60 + int(match.group(2))
    if not 0 <= minutes <= 24 * 60:
        raise ValueError(f"clock time {value!r} outside a single day")
    return minutes


@dataclass(frozen=True)
class MarketCalendar:
    """Daily trading sessions as (open, close) clock intervals plus the
    sampling frequency of the published realized variance."""

    sessions: tuple
    rv_frequency_minutes: int = 5

    def __post_init__(self):
        if self.rv_frequency_minutes < 1:
            raise ValueError("rv_frequency_minutes must be >= 1")
        parsed = []
        for open_t, close_t in self.sessions:
            start = _parse_clock(open_t)
            end = _parse_clock(close_t)
            if end <= start:
                raise ValueError(f"session ({open_t}, {close_t}) has nonpositive length")
            parsed.append((start, end))
        parsed.sort()
        for (_, prev_end), (next_start, _) in zip(parsed, parsed[1:]):
            if next_start < prev_end:
                raise ValueError("sessions overlap")
        object.__setattr__(self, "sessions", tuple(parsed))

    def total_minutes(self) -> int:
        return sum(end - start for start, end in self.sessions)


@dataclass(frozen=True)
class IngestReport:
    """Bookkeeping from one file read."""

    rows_read: int
    rows_kept: int
    rows_dropped: int
    reasons: Counter = field(default_factory=Counter)
    date_span: tuple[str, str] | None = None
    kept_dates: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rows_read != self.rows_kept + self.rows_dropped:
            raise ValueError("rows_read must equal kept + dropped")


def compute_m(calendar: MarketCalendar) -> int:
    """Intraday return count: total session minutes over the sampling
    frequency, floored. Splitting a session into back-to-back pieces does
    not change the result."""
    total = calendar.total_minutes()
    if total <= 0:
        raise ValueError("calendar has no trading minutes")
    m = total // calendar.rv_frequency_minutes
    if m < 1:
        raise ValueError(
            f"sessions of {total} minutes are shorter than one "
            f"{calendar.rv_frequency_minutes}-minute sampling interval"
        )
    return int(m)


def read_rv_csv(
    path,
    m: int,
    delta: float = DEFAULT_DELTA,
    column: str = "rv",
    date_column: str = "date",
    strict: bool = False,
) -> tuple[RvSeries, IngestReport]:
    """Parse a daily realized-variance file into a clean series.

    Rows with empty or non-finite values are dropped with reason
    ``missing``/``non_finite``; nonpositive values with reason
    ``nonpositive``. Non-numeric cells are a hard parse error naming the
    line. With ``strict`` any dropped row is an error, for runs that must
    not silently close gaps.
    """
    values: list[float] = []
    dates: list[str] = []
    reasons: Counter = Counter()
    rows_read = 0

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path}: empty file")
        names = [cell.strip() for cell in header]
        try:
            value_index = names.index(column)
        except ValueError:
            raise IngestError(
                f"{path}: no column named {column!r} (found {names})"
            ) from None
        date_index = names.index(date_column) if date_column in names else None

        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            rows_read += 1
            if value_index >= len(row):
                raise IngestError(f"{path}: line {lineno}: too few columns")
            cell = row[value_index].strip()
            date = row[date_index].strip() if date_index is not None else str(rows_read)
            if cell == "":
                reasons["missing"] += 1
                continue
            try:
                value = float(cell)
            except ValueError:
                raise IngestError(
                    f"{path}: line {lineno}: non-numeric value {cell!r} in "
                    f"column {column!r}"
                ) from None
            if math.isnan(value) or math.isinf(value):
                reasons["non_finite"] += 1
                continue
            if value <= 0.0:
                reasons["nonpositive"] += 1
                continue
            values.append(value)
            dates.append(date)

    dropped = sum(reasons.values())
    if not values:
        raise IngestError(
            f"{path}: all {rows_read} rows dropped ({dict(reasons)}); nothing to analyze"
        )
    if strict and dropped:
        raise IngestError(
            f"{path}: {dropped} row(s) dropped ({dict(reasons)}) but strict "
            "mode forbids closing gaps"
        )

    report = IngestReport(
        rows_read=rows_read,
        rows_kept=len(values),
        rows_dropped=dropped,
        reasons=reasons,
        date_span=(dates[0], dates[-1]),
        kept_dates=tuple(dates),
    )
    return RvSeries(values, delta=delta, m=m), report


def write_rv_csv(path, rv: RvSeries, dates=None) -> None:
    """Write the canonical two-column file; a re-read reproduces the series
    bit-exactly."""
    if dates is None:
        dates = [str(i) for i in range(1, len(rv) + 1)]
    if len(dates) != len(rv):
        raise ValueError("dates length must match the series")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "rv"])
        for date, value in zip(dates, rv.values):
            writer.writerow([date, CSV_FLOAT_FORMAT % value])
