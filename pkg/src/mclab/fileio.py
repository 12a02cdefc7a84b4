"""Plain-text matrix and mask files.

Matrix format: a header line "m n" followed by m lines of n decimal numbers.
Mask format: one "i j value" triple per line, zero-indexed. Floats are
written with shortest round-trip repr, so write/read is bit-exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import ObservationSet, as_matrix


class ParseError(ValueError):
    """Malformed matrix or mask file; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def write_matrix(path, X):
    X = as_matrix(X)
    m, n = X.shape
    lines = [f"{m} {n}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in X)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(path, 1, f"expected header 'm n', got {lines[0]!r}")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(path, 1, f"non-integer dimensions in header {lines[0]!r}") from None
    if m < 1 or n < 1:
        raise ParseError(path, 1, f"dimensions must be positive, got {m} {n}")
    if len(lines) < 1 + m:
        raise ParseError(path, len(lines), f"expected {m} data rows, found {len(lines) - 1}")
    rows = []
    for i in range(m):
        parts = lines[1 + i].split()
        if len(parts) != n:
            raise ParseError(path, 2 + i, f"expected {n} values, found {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(path, 2 + i, "non-numeric value") from None
    try:
        return as_matrix(np.array(rows))
    except ValueError as exc:
        raise ParseError(path, 2, str(exc)) from None


def write_mask(path, omega: ObservationSet):
    lines = [
        f"{i} {j} {repr(float(v))}"
        for i, j, v in zip(omega.rows, omega.cols, omega.values)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mask(path, shape: tuple[int, int]) -> ObservationSet:
    """Parse an "i j value" file into an observation set on the given shape."""
    m, n = shape
    lines = Path(path).read_text().splitlines()
    rows, cols, values = [], [], []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(path, line_no, f"expected 'i j value', got {line!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(path, line_no, f"malformed triple {line!r}") from None
        if not (0 <= i < m and 0 <= j < n):
            raise ParseError(path, line_no, f"index ({i}, {j}) outside {m} x {n}")
        rows.append(i)
        cols.append(j)
        values.append(v)
    if not rows:
        raise ParseError(path, 1, "mask file contains no observations")
    order = np.argsort(np.array(rows, dtype=np.int64) * n + np.array(cols, dtype=np.int64))
    rows = np.array(rows, dtype=np.int64)[order]
    cols = np.array(cols, dtype=np.int64)[order]
    values = np.array(values, dtype=np.float64)[order]
    flat = rows * n + cols
    if np.any(np.diff(flat) == 0):
        dup = int(np.nonzero(np.diff(flat) == 0)[0][0])
        raise ParseError(path, 1, f"duplicate index ({rows[dup]}, {cols[dup]})")
    return ObservationSet((m, n), rows, cols, values)
