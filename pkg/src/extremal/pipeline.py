"""Time-series container, CSV ingestion and trend/season removal."""

from __future__ import annotations

import datetime as dt
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, EmptyDataError, InsufficientDataError, OrderingError, ParseError

DAYS_PER_YEAR = 365
MIN_DAYS = 2 * DAYS_PER_YEAR


@dataclass
class Path:
    """A simulated or observed series.

    ``timestamps`` is an optional ``datetime64[D]`` array of the same length
    as ``values``; ``meta`` is a free-text source label.
    """

    values: np.ndarray
    timestamps: np.ndarray | None = None
    meta: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) == 0:
            raise EmptyDataError("a path needs a non-empty one-dimensional value array")
        if not np.all(np.isfinite(self.values)):
            raise DataError("path values must be finite")
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype="datetime64[D]")
            if len(ts) != len(self.values):
                raise DataError("timestamps and values differ in length")
            if len(ts) > 1 and np.any(np.diff(ts) <= np.timedelta64(0, "D")):
                raise OrderingError("timestamps must be strictly increasing")
            self.timestamps = ts

    def __len__(self):
        return len(self.values)


def as_values(series) -> np.ndarray:
    """Value array of a :class:`Path` or any array-like."""
    if isinstance(series, Path):
        return series.values
    return np.asarray(series, dtype=float)


# ---------------------------------------------------------------------------
# CSV

_HEADERS = {("date", "value"): "date", ("t", "value"): "t"}


def load_csv(source) -> Path:
    """Read a ``date,value`` (or ``t,value``) CSV file.

    ``source`` is a filesystem path or an open text stream. Lines starting
    with ``#`` are ignored except that their text is kept, joined by
    newlines, in ``Path.meta``. Rows with an empty or non-finite value are
    collected and reported together.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
        label = os.fspath(source)
    else:
        text = source.read()
        label = getattr(source, "name", "<stream>")

    comments = []
    kind = None
    keys, values, missing = [], [], []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        fields = [f.strip() for f in line.split(",")]
        if kind is None:
            kind = _HEADERS.get(tuple(f.lower() for f in fields))
            if kind is None:
                raise ParseError(f"expected header 'date,value', got {line!r}", lineno)
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields, got {len(fields)}", lineno)
        key, val = fields
        try:
            keys.append(dt.date.fromisoformat(key) if kind == "date" else int(key))
        except ValueError:
            raise ParseError(f"bad {kind} field {key!r}", lineno) from None
        if val == "":
            missing.append(lineno)
            values.append(math.nan)
            continue
        try:
            x = float(val)
        except ValueError:
            raise ParseError(f"bad value field {val!r}", lineno) from None
        if not math.isfinite(x):
            missing.append(lineno)
        values.append(x)
        if len(keys) > 1 and keys[-1] <= keys[-2]:
            raise OrderingError(f"line {lineno}: {kind} {key} does not increase")

    if kind is None:
        raise EmptyDataError(f"{label}: no header found")
    if missing:
        raise ParseError(f"missing values on lines {', '.join(map(str, missing))}")
    if not values:
        raise EmptyDataError(f"{label}: header but no data rows")
    timestamps = np.array(keys, dtype="datetime64[D]") if kind == "date" else None
    meta = "\n".join(comments) if comments else label
    return Path(np.array(values), timestamps, meta)


# ---------------------------------------------------------------------------
# detrending and deseasonalization


def day_of_year_index(timestamps) -> np.ndarray:
    """Zero-based day of a 365-day year; 29 February shares 28 February's slot."""
    ts = np.asarray(timestamps, dtype="datetime64[D]")
    year_start = ts.astype("datetime64[Y]").astype("datetime64[D]")
    doy = (ts - year_start).astype(np.int64)
    year = ts.astype("datetime64[Y]").astype(np.int64) + 1970
    leap = (year % 4 == 0) & ((year % 100 != 0) | (year % 400 == 0))
    # in leap years doy 59 is 29 Feb
    return np.where(leap & (doy >= 59), np.where(doy == 59, 58, doy - 1), doy)


@dataclass
class TrendSeasonModel:
    """Additive decomposition ``x = intercept + slope * t + seasonal[day] + r``.

    ``t`` counts days from ``origin``; ``seasonal`` holds the 365
    day-of-year effects, which average to zero.
    """

    origin: np.datetime64
    slope: float
    intercept: float
    seasonal: np.ndarray = field(repr=False)

    def _components(self, timestamps):
        t = (np.asarray(timestamps, dtype="datetime64[D]") - self.origin).astype(np.int64)
        return self.intercept + self.slope * t + self.seasonal[day_of_year_index(timestamps)]

    def remove(self, series: Path) -> Path:
        _require_timestamps(series)
        return Path(series.values - self._components(series.timestamps), series.timestamps, series.meta)

    def retransform(self, residuals: Path) -> Path:
        """Map a residual series back to the original scale."""
        _require_timestamps(residuals)
        return Path(residuals.values + self._components(residuals.timestamps), residuals.timestamps, residuals.meta)


def _require_timestamps(series):
    if not isinstance(series, Path) or series.timestamps is None:
        raise DataError("operation needs a dated series")


def detrend_deseasonalize(series: Path) -> tuple[Path, TrendSeasonModel]:
    """Remove a linear trend and day-of-year means from a daily series.

    Trend and seasonal effects are estimated jointly by least squares
    (slope from the within-day-of-year regression), so the residuals have
    zero slope in time and zero mean on every calendar day.
    """
    _require_timestamps(series)
    ts = series.timestamps
    if len(ts) < MIN_DAYS:
        raise InsufficientDataError(f"need at least {MIN_DAYS} daily values, got {len(ts)}")
    if np.any(np.diff(ts) != np.timedelta64(1, "D")):
        raise DataError("series has missing or irregular days; gap filling is not supported")

    x = series.values
    t = (ts - ts[0]).astype(np.int64).astype(float)
    k = day_of_year_index(ts)
    counts = np.bincount(k, minlength=DAYS_PER_YEAR)
    tbar = np.bincount(k, weights=t, minlength=DAYS_PER_YEAR) / counts
    xbar = np.bincount(k, weights=x, minlength=DAYS_PER_YEAR) / counts
    tw = t - tbar[k]
    slope = float(np.dot(tw, x - xbar[k]) / np.dot(tw, tw))
    effects = xbar - slope * tbar
    intercept = float(effects.mean())
    model = TrendSeasonModel(ts[0], slope, intercept, effects - intercept)
    return model.remove(series), model
