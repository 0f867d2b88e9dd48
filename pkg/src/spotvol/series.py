"""Equispaced tick series, spot-variance paths and their CSV round trip."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GridMismatchError, InsufficientDataError, SpotVolError


class DataError(SpotVolError):
    """Malformed input file."""


def fmt(x: float) -> str:
    """Round-trip-safe float formatting (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TickSeries:
    """Observations ``values[i]`` at times ``t0 + i * delta_n``, ``i = 0..n``."""

    t0: float
    delta_n: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not self.delta_n > 0:
            raise ValueError("delta_n must be positive")
        if len(vals) < 2:
            raise InsufficientDataError("a tick series needs at least two observations")
        object.__setattr__(self, "values", vals)

    @classmethod
    def on_unit_interval(cls, values, T: float = 1.0) -> "TickSeries":
        values = np.asarray(values, dtype=float)
        return cls(0.0, T / (len(values) - 1), values)

    @property
    def n(self) -> int:
        return len(self.values) - 1

    @property
    def T(self) -> float:
        return self.n * self.delta_n

    @property
    def t_end(self) -> float:
        return self.t0 + self.T

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.delta_n * np.arange(self.n + 1)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


@dataclass(frozen=True, eq=False)
class VolPath:
    """Spot-variance values on a time grid (true or estimated)."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def check_aligned(self, other: "VolPath", rtol: float = 1e-9) -> None:
        if len(self) != len(other) or not np.allclose(self.times, other.times, rtol=0,
                                                      atol=rtol * max(1.0, abs(self.times[-1]))):
            raise GridMismatchError("volatility paths are on different grids")


def read_columns(path, required: Sequence[str]) -> dict[str, np.ndarray]:
    """Read named float columns from a headed CSV file.

    Raises :class:`DataError` naming the offending line on malformed rows.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    missing = [c for c in required if c not in header]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    idx = {c: header.index(c) for c in header}
    cols: dict[str, list[float]] = {c: [] for c in header}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not x.strip() for x in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
        for c in header:
            try:
                cols[c].append(float(row[idx[c]]))
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad number {row[idx[c]]!r} in column {c}") from None
    return {c: np.asarray(v) for c, v in cols.items()}


def series_from_csv(path, column: str = "y") -> TickSeries:
    """Load an equispaced tick series from a CSV with a ``t`` column."""
    cols = read_columns(path, ["t", column])
    t = cols["t"]
    if len(t) < 2:
        raise DataError(f"{path}: need at least two rows")
    dt = np.diff(t)
    step = (t[-1] - t[0]) / (len(t) - 1)
    if not step > 0 or np.max(np.abs(dt - step)) > 1e-6 * step:
        raise DataError(f"{path}: column t is not equispaced and increasing")
    return TickSeries(float(t[0]), float(step), cols[column])


def write_csv(path, header: Sequence[str], columns: Sequence[Sequence[float]]) -> None:
    """Write float columns with LF line endings and 17 significant digits."""
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_table(path, header: Sequence[str], rows: Sequence[Sequence], stream: Optional[io.TextIOBase] = None):
    """Write mixed-type rows; floats use :func:`fmt`, cells containing commas
    or quotes are quoted."""
    def cell(x):
        if isinstance(x, (float, np.floating)):
            return fmt(x)
        return str(x)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([cell(x) for x in r] for r in rows)
    data = buf.getvalue()
    if path is None:
        (stream or io.StringIO()).write(data)
        return data
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    return data
