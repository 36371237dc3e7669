"""CSV ingestion and export.

Files have a header row and one sample per row.  An optional final column
named ``label`` holds class ids 1 or 2.  Floats are written with 17
significant digits so that a write/read cycle reproduces every value.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lda import LabeledDataset

LABEL_COLUMN = "label"


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending row and column."""


def fmt_float(x) -> str:
    """17 significant digits; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def ingest_csv(path, *, require_label: bool = False):
    """Read a numeric CSV.

    Returns a :class:`LabeledDataset` when the last header field is
    ``label`` and a plain ``(n, p)`` array otherwise.  Rows and columns in
    error messages are 1-based and count the header as row 1.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read file ({exc.strerror})") from exc
    rows = list(csv.reader(text.splitlines()))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(rows) < 2:
        raise DataFormatError(f"{path}: header but no data rows")
    width = len(header)
    has_label = header[-1].lower() == LABEL_COLUMN
    if require_label and not has_label:
        raise DataFormatError(f"{path}: last column must be named '{LABEL_COLUMN}'")

    values = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataFormatError(f"{path}: row {r} has {len(row)} fields, expected {width}")
        for c, cell in enumerate(row, start=1):
            try:
                val = float(cell)
            except ValueError:
                raise DataFormatError(f"{path}: non-numeric value {cell.strip()!r} at row {r}, column {c}") from None
            if not math.isfinite(val):
                raise DataFormatError(f"{path}: non-finite value at row {r}, column {c}")
            if has_label and c == width and val not in (1.0, 2.0):
                raise DataFormatError(f"{path}: label must be 1 or 2, got {cell.strip()!r} at row {r}, column {c}")
            values[r - 2, c - 1] = val

    if not has_label:
        return values
    labels = values[:, -1].astype(int)
    try:
        return LabeledDataset(values[:, :-1], labels, header[:-1])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def export_csv(path, data, feature_names: Sequence[str] | None = None) -> None:
    """Write a matrix or a :class:`LabeledDataset` in the format read by :func:`ingest_csv`."""
    if isinstance(data, LabeledDataset):
        X, labels = data.X, data.labels
        names = list(data.feature_names or [f"x{j + 1}" for j in range(data.p)])
    else:
        X, labels = np.atleast_2d(np.asarray(data, dtype=float)), None
        names = list(feature_names or [f"x{j + 1}" for j in range(X.shape[1])])
    header = names + ([LABEL_COLUMN] if labels is not None else [])
    rows = []
    for i in range(X.shape[0]):
        row = [fmt_float(v) for v in X[i]]
        if labels is not None:
            row.append(str(int(labels[i])))
        rows.append(row)
    write_rows(path, header, rows)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a CSV with ``\\n`` line endings; floats formatted by :func:`fmt_float`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell if isinstance(cell, str) else fmt_float(cell) for cell in row])
