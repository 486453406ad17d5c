"""Delimited-text readers and writers.

Files are UTF-8, comma separated, one row per time step, with an optional
single header row.  Labels and scores are single-column.  Numbers are
written with 9 significant digits.  Writes go through a temporary file and
an atomic rename so a failed run never leaves a partial output behind.
"""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import TimeSeries


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_table(path) -> tuple[list[str] | None, np.ndarray, list[int]]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from None
    header = None
    rows: list[list[float]] = []
    linenos: list[int] = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        cells = [c.strip() for c in row]
        if lineno == 1 and not all(_is_number(c) for c in cells):
            header = cells
            width = len(cells)
            continue
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(f"{path}: line {lineno}: expected {width} columns, found {len(cells)}")
        values = []
        for c in cells:
            try:
                v = float(c)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric cell {c!r}") from None
            if not np.isfinite(v):
                raise DataError(f"{path}: line {lineno}: non-finite value {c!r}")
            values.append(v)
        rows.append(values)
        linenos.append(lineno)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=np.float64), linenos


def _single_column(path, data: np.ndarray) -> np.ndarray:
    if data.shape[1] != 1:
        raise DataError(f"{path}: expected a single column, found {data.shape[1]}")
    return data[:, 0]


def load_series(path) -> TimeSeries:
    header, data, _ = _read_table(path)
    return TimeSeries(data, tuple(header) if header else None)


def load_labels(path) -> np.ndarray:
    _, data, linenos = _read_table(path)
    col = _single_column(path, data)
    bad = np.flatnonzero((col != 0) & (col != 1))
    if bad.size:
        raise DataError(f"{path}: line {linenos[bad[0]]}: label {col[bad[0]]:g} is not 0 or 1")
    return col.astype(np.int8)


def load_scores(path) -> np.ndarray:
    _, data, _ = _read_table(path)
    return _single_column(path, data)


def load_table(path) -> np.ndarray:
    """All numeric columns of a delimited file as a ``rows x columns`` array."""
    return _read_table(path)[1]


def format_number(x: float) -> str:
    return f"{x:.9g}"


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_table(columns: dict[str, np.ndarray | list]) -> str:
    """CSV text for equally long named columns."""
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    if len({c.shape[0] for c in cols}) > 1:
        raise ValueError("columns differ in length")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow(
            [format_number(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row]
        )
    return buf.getvalue()


def write_text(path, text: str):
    _atomic_write(path, text)


def write_table(path, columns: dict):
    _atomic_write(path, render_table(columns))


def save_series(path, series: TimeSeries):
    names = series.channel_names or tuple(f"ch{i}" for i in range(series.N))
    write_table(path, {n: series.values[:, i] for i, n in enumerate(names)})


def save_labels(path, labels, name: str = "label"):
    write_table(path, {name: np.asarray(labels).astype(np.int64)})


def save_scores(path, scores, name: str = "score"):
    write_table(path, {name: np.asarray(scores, dtype=np.float64)})
