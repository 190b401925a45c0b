"""Plain-text matrix files.

Line 1 holds the shape ``n m``; the next ``n*m`` lines hold one entry each
as ``re im``, row-major, 17 significant digits.  The format is shared by
every subcommand that reads or writes a matrix, and round-trips
float64 exactly.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ParseError


def write_matrix(path: str | os.PathLike, matrix) -> None:
    m = np.ascontiguousarray(matrix, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ParseError(f"can only write 2-D matrices, got shape {m.shape}")
    rows, cols = m.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{rows} {cols}\n")
        for v in m.ravel():
            fh.write(f"{v.real:.17g} {v.imag:.17g}\n")


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError(f"{path}: first line must be 'rows cols', got {header!r}")
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ParseError(f"{path}: bad shape header {header!r}") from exc
        if rows < 1 or cols < 1:
            raise ParseError(f"{path}: shape must be positive, got {rows}x{cols}")
        out = np.empty(rows * cols, dtype=np.complex128)
        for k in range(rows * cols):
            line = fh.readline()
            if not line:
                raise ParseError(f"{path}: expected {rows * cols} entries, got {k}")
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}: line {k + 2} must be 're im', got {line!r}")
            try:
                out[k] = complex(float(parts[0]), float(parts[1]))
            except ValueError as exc:
                raise ParseError(f"{path}: line {k + 2}: {line!r}") from exc
        trailing = fh.read().strip()
        if trailing:
            raise ParseError(f"{path}: trailing data after {rows * cols} entries")
    if not np.isfinite(out.view(np.float64)).all():
        raise ParseError(f"{path}: non-finite entries")
    return out.reshape(rows, cols)
