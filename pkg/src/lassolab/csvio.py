"""Numeric CSV input and output.

Rows are observations and columns are variables. A first row that does not
parse as numbers is taken as a header. Parsing uses ``float`` and is therefore
independent of the process locale (the decimal separator is always ".").
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import DesignMatrix, as_array
from .errors import ParseError


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_table(path) -> tuple[np.ndarray, tuple[str, ...] | None]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise ParseError(f"{path} is empty")
    names = None
    first = 1
    if not all(_is_number(c.strip()) for c in rows[0]):
        names = tuple(c.strip() for c in rows[0])
        rows = rows[1:]
        first = 2
        if not rows:
            raise ParseError(f"{path} has a header but no data rows")
    width = len(names) if names is not None else len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = i + first
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=line)
        for j, cell in enumerate(row):
            try:
                v = float(cell.strip())
            except ValueError:
                raise ParseError(f"non-numeric value {cell.strip()!r}", row=line, column=j + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {cell.strip()!r}", row=line, column=j + 1)
            out[i, j] = v
    return out, names


def ingest_matrix(path) -> DesignMatrix:
    values, names = read_table(path)
    return DesignMatrix(values, names)


def ingest_vector(path) -> np.ndarray:
    """A vector stored as one column or as one row."""
    values, _ = read_table(path)
    if values.shape[1] == 1:
        return values[:, 0].copy()
    if values.shape[0] == 1:
        return values[0].copy()
    raise ParseError(f"expected a single row or column, got shape {values.shape[0]}x{values.shape[1]}")


def emit_matrix(path, X, names=None) -> None:
    A = as_array(X)
    if names is None and isinstance(X, DesignMatrix):
        names = X.names
    if names is None:
        names = [f"x{j + 1}" for j in range(A.shape[1])]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        w.writerows([[repr(float(v)) for v in row] for row in A])


def emit_vector(path, v, name: str = "value") -> None:
    emit_matrix(path, np.asarray(v, dtype=float).reshape(-1, 1), [name])
