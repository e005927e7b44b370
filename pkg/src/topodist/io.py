"""CSV readers and writers for matrices and networks."""

from __future__ import annotations

import csv
import os

import numpy as np

from .errors import DimensionMismatch, TopoDistError
from .network import WeightedNetwork


class ParseError(TopoDistError):
    pass


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Numeric CSV as a 2-d float array.

    Headerless unless ``header`` is set, in which case the first row is
    skipped. Errors name the file and the 1-based row/column of the bad cell.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    if header:
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise ParseError(f"{path}: cell (row {i + 1}, column {j + 1}) is not a number: {cell!r}") from None
    return out


def network_from_matrix(m: np.ndarray, path="<matrix>") -> WeightedNetwork:
    """Build a network, reading a unit diagonal as a correlation matrix.

    A matrix whose diagonal is all ones is taken to be a correlation matrix:
    the diagonal is zeroed and the network is signed. Anything else must be a
    valid nonnegative weight matrix with zero diagonal.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{path}: matrix must be square, got {m.shape[0]}x{m.shape[1]}")
    try:
        if m.shape[0] > 1 and np.allclose(np.diag(m), 1.0):
            w = m.copy()
            np.fill_diagonal(w, 0.0)
            return WeightedNetwork(w, signed=True)
        return WeightedNetwork(m)
    except TopoDistError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def read_network(path, header: bool = False) -> WeightedNetwork:
    return network_from_matrix(read_matrix(path, header), path)


def write_matrix(path, m):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(m):
            writer.writerow([repr(float(v)) for v in row])


def twin_files(directory):
    """Pair ``<id>_1.csv`` with ``<id>_2.csv`` in a directory, sorted by id."""
    names = set(os.listdir(directory))
    ids = sorted(n[:-6] for n in names if n.endswith("_1.csv"))
    missing = [i for i in ids if f"{i}_2.csv" not in names]
    if missing:
        raise ParseError(f"{directory}: no second twin for {', '.join(missing)}")
    return [(os.path.join(directory, f"{i}_1.csv"), os.path.join(directory, f"{i}_2.csv")) for i in ids]
