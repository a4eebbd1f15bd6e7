"""Text formats for matrices, kernels and tabular output.

Floats are written with 17 significant digits so every value round-trips
bit-exactly through ``float()``.
"""
from __future__ import annotations

import csv
import io
import json
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .givens import SparseOrthoMatrix

__all__ = [
    "dumps_matrix",
    "loads_matrix",
    "write_matrix",
    "read_matrix",
    "dumps_kernel",
    "loads_kernel",
    "format_float",
    "rows_to_csv",
    "rows_to_json",
]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def dumps_matrix(a: SparseOrthoMatrix) -> str:
    """``rows cols nnz`` header, then ``row col value`` per structural nonzero."""
    r, c = np.nonzero(a.support)  # C order: ascending (row, col)
    lines = [f"{a.rows} {a.cols} {len(r)}"]
    vals = a.values[r, c]
    lines.extend(f"{i} {j} {format_float(v)}" for i, j, v in zip(r, c, vals))
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> SparseOrthoMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        rows, cols, nnz = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad matrix header: {lines[0]!r}") from exc
    if len(lines) - 1 != nnz:
        raise ValueError(f"header announces {nnz} entries, found {len(lines) - 1}")
    values = np.zeros((rows, cols), order="F")
    support = np.zeros((rows, cols), dtype=bool, order="F")
    for ln in lines[1:]:
        i, j, v = ln.split()
        values[int(i), int(j)] = float(v)
        support[int(i), int(j)] = True
    return SparseOrthoMatrix(values, support, nnz)


def write_matrix(a: SparseOrthoMatrix, fh: IO[str]) -> None:
    fh.write(dumps_matrix(a))


def read_matrix(fh: IO[str]) -> SparseOrthoMatrix:
    return loads_matrix(fh.read())


def dumps_kernel(kernel) -> str:
    """Header ``c_out c_in k nnz_mask``; mask lines ``i j p q``; center weights ``i j value``."""
    mask = kernel.mask
    c_out, c_in = mask.shape[:2]
    idx = np.argwhere(mask)
    lines = [f"{c_out} {c_in} {kernel.k} {len(idx)}"]
    lines.extend(f"{i} {j} {p} {q}" for i, j, p, q in idx)
    center = kernel.weights[:, :, kernel.k, kernel.k]
    for i, j in np.argwhere(kernel.center_support):
        lines.append(f"{i} {j} {format_float(center[i, j])}")
    return "\n".join(lines) + "\n"


def loads_kernel(text: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Parse a kernel file into ``(weights, mask, k)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty kernel file")
    c_out, c_in, k, nnz = (int(t) for t in lines[0].split())
    w = 2 * k + 1
    mask = np.zeros((c_out, c_in, w, w), dtype=bool)
    weights = np.zeros((c_out, c_in, w, w))
    body = lines[1:]
    if len(body) < nnz:
        raise ValueError("kernel file truncated")
    for ln in body[:nnz]:
        i, j, p, q = (int(t) for t in ln.split())
        mask[i, j, p, q] = True
    for ln in body[nnz:]:
        i, j, v = ln.split()
        weights[int(i), int(j), k, k] = float(v)
    return weights, mask, k


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def rows_to_csv(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    def clean(v):
        if isinstance(v, np.generic):
            return v.item()
        return v

    data = [{c: clean(row.get(c)) for c in columns} for row in rows]
    return json.dumps(data, indent=1) + "\n"
