"""Multivariate time-series container and its CSV on-disk schema.

CSV files are UTF-8, comma-separated, RFC-4180 quoted, one header row, one
time column (ISO-8601 dates or integer steps) plus one numeric column per
variable. Rows with any missing or unparseable selected value are dropped
(listwise deletion) and each drop is logged with its row number;
interpolation would fabricate dynamics that state-space reconstruction
assumes are real.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["TimeSeries", "MultivariateDataset", "load_csv", "write_csv"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeSeries:
    """A named series of real values over a strictly increasing time index."""

    name: str
    values: np.ndarray
    time_index: tuple

    def __init__(self, name: str, values, time_index):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"series {name!r}: values must be 1-d")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"series {name!r}: values contain NaN/inf")
        ti = tuple(time_index)
        if len(ti) != arr.size:
            raise ValueError(
                f"series {name!r}: {arr.size} values vs {len(ti)} time stamps"
            )
        if any(b <= a for a, b in zip(ti, ti[1:])):
            raise ValueError(f"series {name!r}: time index not strictly increasing")
        arr.flags.writeable = False
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "time_index", ti)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class MultivariateDataset:
    """Aligned named series sharing one time index.

    Immutable after construction; safe to share across threads.
    """

    series: tuple[TimeSeries, ...]
    provenance: str = ""
    time_name: str = "time"

    def __post_init__(self):
        series = tuple(self.series)
        if not series:
            raise ValueError("dataset needs at least one series")
        names = [s.name for s in series]
        if len(set(names)) != len(names):
            raise ValueError(f"series names must be unique, got {names}")
        ti = series[0].time_index
        for s in series[1:]:
            if s.time_index != ti:
                raise ValueError(
                    f"series {s.name!r} not aligned to the shared time index"
                )
        object.__setattr__(self, "series", series)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.series)

    @property
    def time_index(self) -> tuple:
        return self.series[0].time_index

    def __len__(self) -> int:
        return len(self.series[0])

    def column(self, name: str) -> TimeSeries:
        """The series with exactly this name (case-sensitive)."""
        for s in self.series:
            if s.name == name:
                return s
        raise KeyError(
            f"unknown column {name!r}; available: {', '.join(self.names)}"
        )


def column(dataset: MultivariateDataset, name: str) -> TimeSeries:
    """Free-function alias of MultivariateDataset.column."""
    return dataset.column(name)


def _parse_time(token: str):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return date.fromisoformat(token)
    except ValueError:
        raise ValueError(
            f"time value {token!r} is neither an integer nor an ISO-8601 date"
        ) from None


def _check_uniform_spacing(times: Sequence, path) -> None:
    if len(times) < 3:
        return
    if isinstance(times[0], date):
        # Calendar-aware: monthly/annual sampling counts as uniform.
        month_steps = {(b.year - a.year) * 12 + (b.month - a.month)
                       for a, b in zip(times, times[1:])}
        if len(month_steps) == 1 and len({t.day for t in times}) == 1:
            return
        steps = [(b - a).days for a, b in zip(times, times[1:])]
    else:
        steps = [b - a for a, b in zip(times, times[1:])]
    if len(set(steps)) > 1:
        warnings.warn(
            f"{path}: time index is not uniformly spaced; state-space "
            "reconstruction assumes uniform sampling",
            stacklevel=3,
        )


def load_csv(path, time_column: str,
             select: Sequence[str] | None = None) -> MultivariateDataset:
    """Load a multivariate dataset from CSV.

    `select` restricts which value columns are kept (default: all except the
    time column). Rows with a missing or unparseable selected value are
    dropped and logged with their 1-based data-row number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing header row") from None
        rows = list(reader)

    if time_column not in header:
        raise ValueError(
            f"{path}: time column {time_column!r} not in header "
            f"{header}"
        )
    t_pos = header.index(time_column)
    value_names = [h for h in header if h != time_column]
    if select is not None:
        missing = [n for n in select if n not in value_names]
        if missing:
            raise ValueError(
                f"{path}: selected columns {missing} not in header; "
                f"available: {value_names}"
            )
        value_names = list(select)
    positions = [header.index(n) for n in value_names]

    times = []
    columns: list[list[float]] = [[] for _ in value_names]
    dropped = 0
    for row_no, row in enumerate(rows, start=1):
        if len(row) == 0 or all(not cell.strip() for cell in row):
            continue
        try:
            t = _parse_time(row[t_pos])
            parsed = [float(row[p]) for p in positions]
        except (ValueError, IndexError) as exc:
            dropped += 1
            logger.warning("%s: dropping data row %d (%s)", path, row_no, exc)
            continue
        if any(not np.isfinite(v) for v in parsed):
            dropped += 1
            logger.warning("%s: dropping data row %d (non-finite value)",
                           path, row_no)
            continue
        times.append(t)
        for col, v in zip(columns, parsed):
            col.append(v)

    if not times:
        raise ValueError(f"{path}: zero usable rows")
    _check_uniform_spacing(times, path)

    series = tuple(
        TimeSeries(name=n, values=vals, time_index=times)
        for n, vals in zip(value_names, columns)
    )
    provenance = f"loaded from {path} ({len(times)} rows, {dropped} dropped)"
    return MultivariateDataset(series=series, provenance=provenance,
                               time_name=time_column)


def _format_time(t) -> str:
    return t.isoformat() if isinstance(t, date) else str(t)


def write_csv(dataset: MultivariateDataset, path) -> None:
    """Write a dataset to CSV; values use shortest round-trip formatting so
    load_csv(write_csv(d)) reproduces d exactly."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([dataset.time_name, *dataset.names])
        cols = [s.values for s in dataset.series]
        for i, t in enumerate(dataset.time_index):
            writer.writerow([_format_time(t)] + [repr(float(c[i])) for c in cols])
