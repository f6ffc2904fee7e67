"""CSV input and output.

Every file is UTF-8 CSV with a header row. Floats are written with ``repr``
(shortest round-trip form), so identical arrays give identical bytes. Writes
go to a temporary file that is renamed into place, so a failed run leaves no
partial output.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ConfigError, DataError
from .model import ChainOutput, GroupedCountDataset

__all__ = [
    "ingest_csv",
    "write_dataset_csv",
    "write_coefficients_csv",
    "read_coefficients_csv",
    "write_draws_csv",
    "write_diagnostics_csv",
    "write_ks_csv",
    "write_text",
    "DIAGNOSTICS_HEADER",
]

DIAGNOSTICS_HEADER = ("dataset", "sampler", "N_d", "K", "J", "T_s", "E_s", "R2", "RMSE")


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "NaN" if math.isnan(v) else repr(v)


def _atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _rows_to_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    return buf.getvalue()


def ingest_csv(path, shift_counts: int | None = None) -> GroupedCountDataset:
    """Read a ``group,x1,...,xK,y`` file.

    Groups are numbered in order of first appearance. With ``shift_counts``
    every count is increased by that positive integer before the
    positive-count check.

    Raises
    ------
    FileNotFoundError
        ``path`` does not exist.
    DataError
        Empty file, missing or misnamed columns, or a bad value; messages
        cite the 1-based line number in the file.
    """
    path = Path(path)
    if shift_counts is not None and (int(shift_counts) != shift_counts or shift_counts < 1):
        raise ConfigError(f"shift_counts must be a positive integer, got {shift_counts!r}")
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if len(header) < 3 or header[0] != "group" or header[-1] != "y":
        raise DataError(f"{path}: header must be 'group,x1,...,xK,y', got {','.join(header)!r}")
    expected = [f"x{k}" for k in range(1, len(header) - 1)]
    if header[1:-1] != expected:
        raise DataError(f"{path}: covariate columns must be {','.join(expected)}")
    if len(rows) == 1:
        raise DataError(f"{path}: no data rows")

    K = len(header) - 2
    groups, x, y = [], np.empty((len(rows) - 1, K)), np.empty(len(rows) - 1, dtype=np.int64)
    for r, row in enumerate(rows[1:]):
        line = r + 2
        if len(row) != K + 2:
            raise DataError(f"{path}: line {line} has {len(row)} fields, expected {K + 2}")
        groups.append(row[0].strip())
        try:
            x[r] = [float(c) for c in row[1:-1]]
        except ValueError:
            raise DataError(f"{path}: line {line} has a non-numeric covariate") from None
        if not np.all(np.isfinite(x[r])):
            raise DataError(f"{path}: line {line} has a non-finite covariate")
        cell = row[-1].strip()
        try:
            value = float(cell)
        except ValueError:
            raise DataError(f"{path}: line {line}: count {cell!r} is not an integer") from None
        if not math.isfinite(value) or value != int(value):
            raise DataError(f"{path}: line {line}: count {cell!r} is not an integer")
        if value < 0:
            raise DataError(f"{path}: line {line}: count {cell!r} is negative")
        y[r] = int(value)
    if shift_counts:
        y = y + int(shift_counts)
    if np.any(y < 1):
        line = int(np.flatnonzero(y < 1)[0]) + 2
        raise DataError(
            f"{path}: line {line}: zero count; the approximation needs positive counts "
            "(use a count shift or drop zero rows)"
        )
    return GroupedCountDataset(x, y, np.asarray(groups, dtype=object))


def write_dataset_csv(path, data: GroupedCountDataset) -> Path:
    """Write ``data`` in the ingest format, rows grouped as stored."""
    K = data.n_covariates
    header = ["group", *[f"x{k}" for k in range(1, K + 1)], "y"]
    labels = data.labels
    rows = (
        [str(labels[g]), *xi.tolist(), int(yi)]
        for g, xi, yi in zip(data.group_index, data.x, data.y)
    )
    return _atomic_write(path, _rows_to_text(header, rows))


def write_coefficients_csv(path, w, labels: Sequence) -> Path:
    """Generating coefficients, one row per group: ``group,w1,...,wK``."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != len(labels):
        raise ConfigError("w must be (J, K) with one row per label")
    header = ["group", *[f"w{k}" for k in range(1, w.shape[1] + 1)]]
    rows = ([str(lab), *row.tolist()] for lab, row in zip(labels, w))
    return _atomic_write(path, _rows_to_text(header, rows))


def read_coefficients_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError(f"{path}: no coefficient rows")
    return [r[0] for r in rows[1:]], np.array([[float(c) for c in r[1:]] for r in rows[1:]])


def write_draws_csv(path, output: ChainOutput) -> Path:
    """Long-format retained draws: ``chain,iteration,parameter,value``.

    ``chain`` and ``iteration`` are 1-based; ``iteration`` counts retained
    sweeps (warm-up excluded).
    """
    samples = output.parameter_samples()
    names = list(samples)
    stacked = np.stack([samples[n] for n in names], axis=-1)  # (m, n, P)
    buf = io.StringIO()
    buf.write("chain,iteration,parameter,value\n")
    for c in range(stacked.shape[0]):
        for i in range(stacked.shape[1]):
            prefix = f"{c + 1},{i + 1},"
            buf.write("".join(f'{prefix}"{n}",{v!r}\n' for n, v in zip(names, stacked[c, i].tolist())))
    return _atomic_write(path, buf.getvalue())


def write_diagnostics_csv(path, rows: Iterable[Sequence]) -> Path:
    """Rows of :data:`DIAGNOSTICS_HEADER`; ``None`` cells are written as ``NA``."""
    return _atomic_write(path, _rows_to_text(DIAGNOSTICS_HEADER, rows))


def write_ks_csv(path, rows: Iterable[Sequence]) -> Path:
    return _atomic_write(path, _rows_to_text(("y", "ks_distance", "abs_mean_error"), rows))


def write_text(path, text: str) -> Path:
    return _atomic_write(path, text)
