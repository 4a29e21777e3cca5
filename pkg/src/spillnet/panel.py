"""Panel ingestion: load, validate, align and slice multi-node daily series.

A panel is a T x N matrix of daily observations for N named nodes over a
strictly increasing daily date index. Input is delimiter-separated text
(comma, tab or semicolon, auto-detected) with one ISO-8601 date column.
Missing days are a hard error by default; the "linear" gap-fill policy
interpolates interior gaps of at most MAX_GAP_DAYS consecutive days.
"""

from __future__ import annotations

import datetime as dt
import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DuplicateDate,
    EmptySlice,
    MissingDate,
    NonNumericCell,
)

MAX_GAP_DAYS = 3
_DELIMITERS = (",", "\t", ";")


@dataclass(frozen=True, eq=False)
class SeriesPanel:
    """Aligned daily series for N nodes: immutable after construction."""

    node_ids: tuple[str, ...]
    dates: tuple[dt.date, ...]
    values: np.ndarray  # T x N, float64

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", values)
        if len(self.node_ids) < 2:
            raise DataError("panel needs at least 2 node columns")
        if values.ndim != 2 or values.shape != (len(self.dates), len(self.node_ids)):
            raise DataError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.node_ids)} nodes"
            )
        if len(self.dates) == 0:
            raise DataError("panel has no rows")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur == prev:
                raise DuplicateDate(f"duplicate date {cur}")
            if cur < prev:
                raise DataError("dates not increasing after sort; corrupt input")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise NonNumericCell(
                f"non-finite value at date {self.dates[bad[0]]}, node {self.node_ids[bad[1]]}"
            )
        values.setflags(write=False)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]

    def column(self, node_id: str) -> np.ndarray:
        return self.values[:, self.node_ids.index(node_id)]


@dataclass(frozen=True)
class PeriodSpec:
    """Named inclusive date window used to slice a panel."""

    name: str
    start: dt.date
    end: dt.date

    def __post_init__(self):
        if self.start > self.end:
            raise DataError(f"period {self.name!r}: start {self.start} after end {self.end}")


def full_range(panel: SeriesPanel, name: str = "full") -> PeriodSpec:
    return PeriodSpec(name, panel.dates[0], panel.dates[-1])


def _parse_date(token: str, line_no: int) -> dt.date:
    try:
        return dt.date.fromisoformat(token.strip())
    except ValueError as exc:
        raise DataError(f"line {line_no}: bad ISO date {token!r}") from exc


def _sniff_delimiter(header: str) -> str:
    counts = {d: header.count(d) for d in _DELIMITERS}
    best = max(counts, key=counts.get)
    if counts[best] == 0:
        raise DataError("could not detect delimiter: header has no comma, tab or semicolon")
    return best


def _fill_gaps(dates, rows, gap_fill: str):
    """Expand to a contiguous daily index, interpolating short interior gaps."""
    out_dates = [dates[0]]
    out_rows = [rows[0]]
    for date, row in zip(dates[1:], rows[1:]):
        gap = (date - out_dates[-1]).days - 1
        if gap > 0:
            if gap_fill != "linear":
                raise MissingDate(
                    f"missing {gap} day(s) after {out_dates[-1]}; "
                    'no gap-fill policy configured (use "linear")'
                )
            if gap > MAX_GAP_DAYS:
                raise MissingDate(
                    f"gap of {gap} days after {out_dates[-1]} exceeds "
                    f"the {MAX_GAP_DAYS}-day linear fill limit"
                )
            lo, hi = out_rows[-1], row
            for k in range(1, gap + 1):
                frac = k / (gap + 1)
                out_dates.append(out_dates[-1] + dt.timedelta(days=1))
                out_rows.append(lo + frac * (hi - lo))
        out_dates.append(date)
        out_rows.append(row)
    return out_dates, out_rows


def load_panel(
    source,
    date_column: str | None = None,
    node_columns: list[str] | None = None,
    gap_fill: str = "none",
) -> SeriesPanel:
    """Parse delimiter-separated text into a validated SeriesPanel.

    ``source`` is a path or an open text stream. The first column is the
    date unless ``date_column`` names another one; ``node_columns`` keeps a
    subset (default: every non-date column). Rows are sorted by date.

    Raises DuplicateDate, MissingDate, NonNumericCell or DataError.
    """
    if gap_fill not in ("none", "linear"):
        raise DataError(f"unknown gap-fill policy {gap_fill!r}")
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise DataError("input needs a header and at least one data row")

    delim = _sniff_delimiter(lines[0])
    header = [h.strip() for h in lines[0].split(delim)]
    if date_column is None:
        date_idx = 0
        date_column = header[0]
    else:
        if date_column not in header:
            raise DataError(f"date column {date_column!r} not in header {header}")
        date_idx = header.index(date_column)
    value_names = [h for i, h in enumerate(header) if i != date_idx]
    if node_columns is not None:
        missing = [c for c in node_columns if c not in value_names]
        if missing:
            raise DataError(f"node columns not in input: {missing}")
        value_names = list(node_columns)
    if len(value_names) < 2:
        raise DataError("need at least 2 numeric node columns")
    col_idx = [header.index(c) for c in value_names]

    parsed: list[tuple[dt.date, np.ndarray]] = []
    seen: set[dt.date] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(delim)]
        if len(cells) != len(header):
            raise DataError(
                f"line {line_no}: expected {len(header)} cells, found {len(cells)}"
            )
        date = _parse_date(cells[date_idx], line_no)
        if date in seen:
            raise DuplicateDate(f"line {line_no}: duplicate date {date}")
        seen.add(date)
        row = np.empty(len(col_idx))
        for k, ci in enumerate(col_idx):
            token = cells[ci]
            if token == "" or token.lower() in ("nan", "na"):
                row[k] = np.nan
            else:
                try:
                    row[k] = float(token)
                except ValueError as exc:
                    raise NonNumericCell(
                        f"line {line_no}, column {header[ci]!r}: {token!r}"
                    ) from exc
        parsed.append((date, row))

    parsed.sort(key=lambda item: item[0])
    dates = [d for d, _ in parsed]
    rows = [r for _, r in parsed]
    rows = _fill_missing_cells(dates, rows, value_names, gap_fill)
    dates, rows = _fill_gaps(dates, rows, gap_fill)
    return SeriesPanel(tuple(value_names), tuple(dates), np.vstack(rows))


def _fill_missing_cells(dates, rows, names, gap_fill):
    """Apply the gap-fill policy to in-row NaN cells, column by column."""
    mat = np.vstack(rows)
    for j in range(mat.shape[1]):
        col = mat[:, j]
        nan_idx = np.flatnonzero(np.isnan(col))
        if nan_idx.size == 0:
            continue
        if gap_fill != "linear":
            raise NonNumericCell(
                f"empty value at date {dates[nan_idx[0]]}, column {names[j]!r}; "
                'no gap-fill policy configured (use "linear")'
            )
        runs = np.split(nan_idx, np.flatnonzero(np.diff(nan_idx) > 1) + 1)
        for run in runs:
            lo, hi = run[0] - 1, run[-1] + 1
            if lo < 0 or hi >= mat.shape[0]:
                raise NonNumericCell(
                    f"column {names[j]!r}: missing values at the series edge cannot be interpolated"
                )
            if len(run) > MAX_GAP_DAYS:
                raise NonNumericCell(
                    f"column {names[j]!r}: {len(run)} consecutive missing values exceed "
                    f"the {MAX_GAP_DAYS}-day linear fill limit"
                )
            for k, idx in enumerate(run, start=1):
                frac = k / (len(run) + 1)
                col[idx] = col[lo] + frac * (col[hi] - col[lo])
    return [mat[i] for i in range(mat.shape[0])]


def slice_period(panel: SeriesPanel, spec: PeriodSpec) -> SeriesPanel:
    """Rows of ``panel`` with date in [spec.start, spec.end] (inclusive)."""
    keep = [i for i, d in enumerate(panel.dates) if spec.start <= d <= spec.end]
    if not keep:
        raise EmptySlice(
            f"period {spec.name!r} ({spec.start}..{spec.end}) selects no rows "
            f"from panel range {panel.dates[0]}..{panel.dates[-1]}"
        )
    dates = tuple(panel.dates[i] for i in keep)
    return SeriesPanel(panel.node_ids, dates, panel.values[keep, :].copy())


def first_difference(panel: SeriesPanel) -> SeriesPanel:
    """Day-over-day differences; drops the first row (T-1 rows remain)."""
    if panel.n_obs < 2:
        raise DataError("need at least 2 rows to difference")
    return SeriesPanel(
        panel.node_ids, panel.dates[1:], np.diff(panel.values, axis=0)
    )


def panel_to_csv(panel: SeriesPanel, path) -> None:
    """Write the panel as a load_panel-compatible CSV (date column first)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(("date",) + panel.node_ids) + "\n")
        for i, date in enumerate(panel.dates):
            cells = [date.isoformat()]
            cells += [f"{v:.12g}" for v in panel.values[i]]
            fh.write(",".join(cells) + "\n")
