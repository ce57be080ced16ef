"""Daily series ingestion, calendar alignment, transforms, and panel assembly.

All series live on a pure calendar-date grid (no time zones, no intraday).
Raw CSV observations may skip days (weekends, holidays); ``align_daily`` puts
them on a continuous daily calendar by carrying the last observation forward.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, DomainError, ParseError

ONE_DAY = dt.timedelta(days=1)


def _parse_iso_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text)


@dataclass(frozen=True)
class RawSeries:
    """Observed (date, value) pairs for one variable, possibly with gaps."""

    name: str
    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values length mismatch")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValueError(f"dates not strictly increasing at {b}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class TimeSeries:
    """A named series on a continuous daily calendar.

    ``filled_mask[i]`` is True where the value was carried forward rather than
    observed. Values are always finite.
    """

    name: str
    start: dt.date
    values: np.ndarray
    filled_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.filled_mask is None:
            object.__setattr__(self, "filled_mask", np.zeros(len(values), dtype=bool))
        else:
            mask = np.asarray(self.filled_mask, dtype=bool)
            if len(mask) != len(values):
                raise ValueError("filled_mask and values length mismatch")
            object.__setattr__(self, "filled_mask", mask)
        if len(values) == 0:
            raise ValueError(f"series {self.name!r} is empty")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"series {self.name!r} has non-finite value at {self.date_at(bad)}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> dt.date:
        return self.start + dt.timedelta(days=len(self) - 1)

    @property
    def dates(self) -> list[dt.date]:
        return [self.start + dt.timedelta(days=i) for i in range(len(self))]

    def date_at(self, i: int) -> dt.date:
        return self.start + dt.timedelta(days=i)

    def index_of(self, day: dt.date) -> int:
        i = (day - self.start).days
        if not 0 <= i < len(self):
            raise KeyError(f"{day} outside series {self.name!r} range {self.start}..{self.end}")
        return i

    def slice(self, start: dt.date, end: dt.date) -> "TimeSeries":
        """Restrict to [start, end]; both endpoints must be covered."""
        i, j = self.index_of(start), self.index_of(end)
        if j < i:
            raise ValueError(f"slice end {end} before start {start}")
        return TimeSeries(self.name, start, self.values[i : j + 1], self.filled_mask[i : j + 1])

    def rename(self, name: str) -> "TimeSeries":
        return TimeSeries(name, self.start, self.values, self.filled_mask)


def parse_csv(text: str | bytes, date_column: str = "date",
              value_columns: list[str] | None = None) -> dict[str, RawSeries]:
    """Parse one CSV document into raw series, one per value column.

    The header row is required; the date column must be ISO-8601; value cells
    must be decimal or empty (empty = missing, not zero). Accepts LF or CRLF.
    Returns a dict keyed by column name, in header order.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty document, header row required") from None
    header = [h.strip() for h in header]
    if date_column not in header:
        raise ParseError(f"missing date column {date_column!r} in header {header}", row=1)
    date_idx = header.index(date_column)
    if value_columns is None:
        value_columns = [h for h in header if h != date_column]
    missing = [c for c in value_columns if c not in header]
    if missing:
        raise ParseError(f"declared value columns not in header: {missing}", row=1)
    col_idx = {c: header.index(c) for c in value_columns}

    rows: list[tuple[dt.date, list[float]]] = []
    seen: set[dt.date] = set()
    for rownum, row in enumerate(reader, start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, got {len(row)}", row=rownum)
        try:
            day = _parse_iso_date(row[date_idx].strip())
        except ValueError:
            raise ParseError(f"malformed date {row[date_idx]!r}", row=rownum) from None
        if day in seen:
            raise ParseError(f"duplicate date {day}", row=rownum)
        seen.add(day)
        vals = []
        for c in value_columns:
            cell = row[col_idx[c]].strip()
            if cell == "":
                vals.append(math.nan)  # missing marker, dropped below
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"malformed numeric cell {cell!r} in column {c!r}", row=rownum) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value in column {c!r}", row=rownum)
            vals.append(v)
        rows.append((day, vals))

    rows.sort(key=lambda r: r[0])
    out: dict[str, RawSeries] = {}
    for j, c in enumerate(value_columns):
        ds = [d for d, vals in rows if not math.isnan(vals[j])]
        vs = np.array([vals[j] for _, vals in rows if not math.isnan(vals[j])], dtype=float)
        out[c] = RawSeries(c, tuple(ds), vs)
    return out


def align_daily(raw: RawSeries, start: dt.date, end: dt.date) -> TimeSeries:
    """Align observations onto every calendar day in [start, end].

    Days without an observation take the most recent observed value and are
    flagged in ``filled_mask``. There must be an observation at or before
    ``start``; head gaps are never back-filled.
    """
    if end < start:
        raise ValueError(f"range end {end} before start {start}")
    if len(raw) == 0:
        raise AlignmentError(f"series {raw.name!r} has no observations")
    if raw.dates[0] > start:
        raise AlignmentError(
            f"series {raw.name!r}: no observation at or before {start} "
            f"(first observation {raw.dates[0]})"
        )
    n = (end - start).days + 1
    values = np.empty(n, dtype=float)
    filled = np.ones(n, dtype=bool)
    obs = {d: v for d, v in zip(raw.dates, raw.values)}
    # seed the carry with the newest observation at or before start
    last = None
    for d, v in zip(raw.dates, raw.values):
        if d > start:
            break
        last = v
    day = start
    for i in range(n):
        if day in obs:
            last = obs[day]
            filled[i] = False
        values[i] = last
        day += ONE_DAY
    return TimeSeries(raw.name, start, values, filled)


def log_transform(ts: TimeSeries) -> TimeSeries:
    """Elementwise natural log; requires strictly positive values."""
    if np.any(ts.values <= 0.0):
        bad = int(np.flatnonzero(ts.values <= 0.0)[0])
        raise DomainError(
            f"series {ts.name!r}: non-positive value {ts.values[bad]} at {ts.date_at(bad)}, cannot log"
        )
    return TimeSeries(ts.name, ts.start, np.log(ts.values), ts.filled_mask)


def first_difference(ts: TimeSeries) -> TimeSeries:
    """Day-over-day difference; output starts one day later, length shrinks by 1."""
    if len(ts) < 2:
        raise ValueError(f"series {ts.name!r}: need at least 2 observations to difference")
    return TimeSeries(ts.name, ts.start + ONE_DAY, np.diff(ts.values), ts.filled_mask[1:])


def make_dummy(start: dt.date, end: dt.date, event_dates, name: str = "D") -> TimeSeries:
    """Indicator series: 1.0 exactly on the event dates, 0.0 elsewhere."""
    if end < start:
        raise ValueError(f"range end {end} before start {start}")
    n = (end - start).days + 1
    values = np.zeros(n, dtype=float)
    for day in sorted(set(event_dates)):
        i = (day - start).days
        if not 0 <= i < n:
            raise ValueError(f"event date {day} outside range {start}..{end}")
        values[i] = 1.0
    return TimeSeries(name, start, values)


ENDOGENOUS = "endogenous"
EXOGENOUS = "exogenous"


@dataclass(frozen=True)
class Dataset:
    """Aligned multi-series panel over one date range.

    Endogenous column order is the identification ordering. Exogenous columns
    follow the endogenous block.
    """

    start: dt.date
    end: dt.date
    columns: tuple[tuple[str, str, TimeSeries], ...]  # (name, role, series)
    transform_log: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        names = [name for name, _, _ in self.columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column names in dataset: {names}")
        n = (self.end - self.start).days + 1
        for name, role, ts in self.columns:
            if role not in (ENDOGENOUS, EXOGENOUS):
                raise ValueError(f"column {name!r}: unknown role {role!r}")
            if ts.start != self.start or len(ts) != n:
                raise ValueError(
                    f"column {name!r} spans {ts.start}..{ts.end}, dataset needs {self.start}..{self.end}"
                )

    @property
    def n_days(self) -> int:
        return (self.end - self.start).days + 1

    @property
    def endog_names(self) -> list[str]:
        return [name for name, role, _ in self.columns if role == ENDOGENOUS]

    @property
    def exog_names(self) -> list[str]:
        return [name for name, role, _ in self.columns if role == EXOGENOUS]

    def series(self, name: str) -> TimeSeries:
        for cname, _, ts in self.columns:
            if cname == name:
                return ts
        raise KeyError(f"no column {name!r} in dataset")

    def endog_matrix(self) -> np.ndarray:
        return np.column_stack([self.series(n).values for n in self.endog_names])

    def exog_matrix(self) -> np.ndarray | None:
        names = self.exog_names
        if not names:
            return None
        return np.column_stack([self.series(n).values for n in names])


def assemble_dataset(columns: dict[str, TimeSeries], ordering: list[str],
                     start: dt.date, end: dt.date,
                     exog: list[str] | None = None,
                     transform_log: dict[str, bool] | None = None) -> Dataset:
    """Build a panel with endogenous columns in ``ordering`` and exogenous after.

    Every named column must cover [start, end]; series are sliced to the range.
    """
    exog = list(exog or [])
    if len(set(ordering)) != len(ordering):
        raise ValueError(f"duplicate names in ordering: {ordering}")
    dup = set(ordering) & set(exog)
    if dup:
        raise ValueError(f"columns listed both endogenous and exogenous: {sorted(dup)}")
    cols = []
    for name in ordering:
        if name not in columns:
            raise KeyError(f"ordering references unknown column {name!r}")
        cols.append((name, ENDOGENOUS, columns[name].slice(start, end)))
    for name in exog:
        if name not in columns:
            raise KeyError(f"exogenous list references unknown column {name!r}")
        cols.append((name, EXOGENOUS, columns[name].slice(start, end)))
    return Dataset(start, end, tuple(cols), dict(transform_log or {}))
