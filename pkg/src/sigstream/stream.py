"""Ingestion of tabular streams and tick data, and their piecewise-linear embeddings."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class StreamFormatError(ValueError):
    """Malformed input table; ``row`` is 1-based over the data rows."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


class NonIncreasingTimeError(StreamFormatError):
    pass


class NonNumericCellError(StreamFormatError):
    pass


class RaggedRowError(StreamFormatError):
    pass


class EmptyChannelError(StreamFormatError):
    pass


class UnknownCategoryError(StreamFormatError):
    pass


def _frozen(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Stream:
    """Timestamps plus per-channel values; NaN marks a missing observation."""

    times: np.ndarray
    values: np.ndarray
    channels: tuple[str, ...] = ()

    def __post_init__(self):
        t = _frozen(self.times).reshape(-1)
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if t.size < 1:
            raise StreamFormatError("a stream needs at least one record")
        if v.shape[0] != t.size:
            raise StreamFormatError(f"{t.size} timestamps but {v.shape[0]} value rows")
        if not np.all(np.isfinite(t)):
            raise NonNumericCellError("timestamps must be finite")
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise NonIncreasingTimeError(
                f"timestamp {t[bad[0] + 1]!r} does not increase on {t[bad[0]]!r}", row=int(bad[0]) + 2
            )
        if np.any(np.isinf(v)):
            raise NonNumericCellError("infinite value in stream")
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if not self.channels:
            object.__setattr__(self, "channels", tuple(f"x{i + 1}" for i in range(v.shape[1])))

    @property
    def length(self) -> int:
        return self.times.size

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class PiecewiseLinearPath:
    """Vertices (u_j, p_j); linear in between.  A single vertex is a constant path."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = _frozen(self.times).reshape(-1)
        p = np.array(self.points, dtype=np.float64, copy=True)
        if p.ndim == 1:
            p = p.reshape(-1, 1)
        if t.size < 1 or p.shape[0] != t.size:
            raise ValueError(f"need matching, nonempty times/points, got {t.size} and {p.shape[0]}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("path parameter must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise ValueError("path coordinates must be finite")
        p.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @classmethod
    def from_points(cls, points, t0: float = 0.0, t1: float | None = None) -> "PiecewiseLinearPath":
        """Uniformly parameterized path through ``points`` (default step 1)."""
        points = np.asarray(points, dtype=np.float64)
        m = points.shape[0]
        if t1 is None:
            times = t0 + np.arange(m, dtype=np.float64)
        else:
            times = np.linspace(t0, t1, m) if m > 1 else np.array([t0])
        return cls(times, points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.times.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    def reversed(self) -> "PiecewiseLinearPath":
        t0, t1 = self.span
        return PiecewiseLinearPath(t0 + t1 - self.times[::-1], self.points[::-1])

    def translated(self, shift) -> "PiecewiseLinearPath":
        return PiecewiseLinearPath(self.times, self.points + np.asarray(shift, dtype=np.float64))

    def __call__(self, u):
        """Evaluate the path at parameter value(s) inside the span."""
        u = np.asarray(u, dtype=np.float64)
        cols = [np.interp(u, self.times, self.points[:, i]) for i in range(self.dim)]
        return np.stack(cols, axis=-1)


@dataclass(frozen=True, eq=False)
class TickTable:
    times: np.ndarray
    categories: np.ndarray  # 1..n_categories
    n_categories: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        t = _frozen(self.times).reshape(-1)
        c = _frozen(self.categories, dtype=np.int64).reshape(-1)
        if t.size != c.size:
            raise StreamFormatError(f"{t.size} timestamps but {c.size} categories")
        if self.n_categories < 1:
            raise StreamFormatError("need at least one category")
        bad = np.flatnonzero(np.diff(t) < 0)
        if bad.size:
            raise NonIncreasingTimeError("tick timestamps decrease", row=int(bad[0]) + 2)
        out = np.flatnonzero((c < 1) | (c > self.n_categories))
        if out.size:
            raise UnknownCategoryError(
                f"category id {c[out[0]]} outside 1..{self.n_categories}", row=int(out[0]) + 1
            )
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "categories", c)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i + 1) for i in range(self.n_categories)))


def _read_rows(data, delimiter: str, header: bool):
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise StreamFormatError(f"input is not UTF-8 text ({e.reason} at byte {e.start})") from None
    try:
        rows = list(csv.reader(io.StringIO(data), delimiter=delimiter))
    except csv.Error as e:
        raise StreamFormatError(f"unreadable delimited text: {e}") from None
    # tolerate trailing blank lines only
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    names = None
    if header and rows:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    return names, rows


def parse_table(data, delimiter: str = ",", header: bool = False) -> Stream:
    """Parse delimited text: first column time, the rest channels, empty cell = missing."""
    names, rows = _read_rows(data, delimiter, header)
    if not rows:
        raise StreamFormatError("no data rows")
    width = len(rows[0])
    if width < 2:
        raise RaggedRowError("need a time column and at least one channel", row=1)
    times = np.empty(len(rows))
    values = np.full((len(rows), width - 1), np.nan)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRowError(f"expected {width} cells, found {len(row)}", row=r + 1)
        cell = row[0].strip()
        try:
            times[r] = float(cell)
        except ValueError:
            raise NonNumericCellError(f"time {cell!r} is not numeric", row=r + 1) from None
        if not np.isfinite(times[r]):
            raise NonNumericCellError(f"time {cell!r} is not finite", row=r + 1)
        if r > 0 and times[r] <= times[r - 1]:
            kind = "duplicate" if times[r] == times[r - 1] else "decreasing"
            raise NonIncreasingTimeError(f"{kind} timestamp {cell!r}", row=r + 1)
        for c, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                continue
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise NonNumericCellError(
                    f"value {cell!r} in column {c + 2} is not numeric", row=r + 1
                ) from None
            if not np.isfinite(values[r, c]):
                raise NonNumericCellError(f"value {cell!r} in column {c + 2} is not finite", row=r + 1)
    channels = tuple(names[1:]) if names and len(names) == width else ()
    return Stream(times, values, channels)


def parse_ticks(data, labels: Sequence[str] | None = None, delimiter: str = ",", header: bool = False) -> TickTable:
    """Two-column (time, category-label) text.

    With ``labels`` given, ids follow that order and other labels are rejected;
    otherwise ids are assigned in order of first appearance.
    """
    _, rows = _read_rows(data, delimiter, header)
    fixed = labels is not None
    lookup = {lab: i + 1 for i, lab in enumerate(labels or ())}
    times, cats = [], []
    for r, row in enumerate(rows):
        if len(row) != 2:
            raise RaggedRowError(f"expected 2 cells, found {len(row)}", row=r + 1)
        try:
            t = float(row[0].strip())
        except ValueError:
            raise NonNumericCellError(f"time {row[0]!r} is not numeric", row=r + 1) from None
        lab = row[1].strip()
        if lab not in lookup:
            if fixed:
                raise UnknownCategoryError(
                    f"unknown category {lab!r}; expected one of {sorted(lookup)}", row=r + 1
                )
            lookup[lab] = len(lookup) + 1
        if times and t < times[-1]:
            raise NonIncreasingTimeError(f"tick time {t!r} decreases", row=r + 1)
        times.append(t)
        cats.append(lookup[lab])
    names = tuple(sorted(lookup, key=lookup.get))
    return TickTable(np.array(times), np.array(cats, dtype=np.int64), max(len(names), 1), names or ("1",))


def embed_linear(stream: Stream, missing: str = "ffill", time_augment: bool = False) -> PiecewiseLinearPath:
    """Vertex at each timestamp; missing cells forward-filled, leading gaps back-filled."""
    if missing != "ffill":
        raise ValueError(f"unsupported missing-data policy {missing!r}")
    v = np.array(stream.values, copy=True)
    for c in range(v.shape[1]):
        col = v[:, c]
        seen = np.flatnonzero(~np.isnan(col))
        if seen.size == 0:
            raise EmptyChannelError(f"channel {stream.channels[c]!r} has no observations")
        # index of the latest observation at or before each row, first one for leading gaps
        last = np.maximum.accumulate(np.where(np.isnan(col), -1, np.arange(col.size)))
        last[last < 0] = seen[0]
        v[:, c] = col[last]
    if time_augment:
        v = np.column_stack([stream.times, v])
    return PiecewiseLinearPath(stream.times, v)


def embed_counting(ticks: TickTable) -> PiecewiseLinearPath:
    """Cumulative per-category counts as a monotone ramp path from the origin.

    Vertex j sits at parameter j (the tick ordinal), which keeps the parameter
    strictly increasing when ticks share a timestamp; signatures do not see the
    parameterization.
    """
    C = ticks.n_categories
    n = ticks.categories.size
    pts = np.zeros((n + 1, C))
    if n:
        steps = np.zeros((n, C))
        steps[np.arange(n), ticks.categories - 1] = 1.0
        pts[1:] = np.cumsum(steps, axis=0)
    return PiecewiseLinearPath(np.arange(n + 1, dtype=np.float64), pts)


def insert_points(path: PiecewiseLinearPath, extra_times) -> PiecewiseLinearPath:
    """Add vertices on the existing segments; the geometric image is unchanged."""
    extra = np.atleast_1d(np.asarray(extra_times, dtype=np.float64))
    t0, t1 = path.span
    out = extra[(extra < t0) | (extra > t1) | ~np.isfinite(extra)]
    if out.size:
        raise ValueError(f"times {out[:3].tolist()} fall outside the path span [{t0}, {t1}]")
    new = np.setdiff1d(extra, path.times)
    if new.size == 0:
        return path
    times = np.union1d(path.times, new)
    pts = path(times)
    # keep original vertices bit-exact
    pts[np.searchsorted(times, path.times)] = path.points
    return PiecewiseLinearPath(times, pts)


def restrict(path: PiecewiseLinearPath, a: float, b: float) -> PiecewiseLinearPath:
    """Sub-path on [a, b] with vertices at a, b and every original vertex between."""
    t0, t1 = path.span
    if not (t0 <= a <= b <= t1):
        raise ValueError(f"[{a}, {b}] is not inside the path span [{t0}, {t1}]")
    if a == b:
        return PiecewiseLinearPath([a], path(np.array([a])))
    inner_t = path.times[(path.times > a) & (path.times < b)]
    times = np.concatenate([[a], inner_t, [b]])
    return PiecewiseLinearPath(times, path(times))


def total_variation(path: PiecewiseLinearPath) -> float:
    return float(np.sum(np.linalg.norm(path.increments(), axis=1)))
