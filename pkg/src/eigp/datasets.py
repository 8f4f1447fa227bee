"""CSV dataset loading and synthetic stream generation.

Dataset files are UTF-8 CSV with a header row and ``m + d`` numeric columns
(inputs first); row order defines the stream order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError
from .sim import TOY_INTERVAL, toy_function


@dataclass(frozen=True)
class Dataset:
    """Ordered regression pairs plus the observed per-dimension input box."""

    X: np.ndarray  # (n, m)
    Y: np.ndarray  # (n, d)
    lower: np.ndarray  # (m,) per-dimension input minima
    upper: np.ndarray  # (m,) per-dimension input maxima

    def __len__(self) -> int:
        return self.X.shape[0]


def load_dataset(path, input_dim: int, output_dim: int) -> Dataset:
    """Parse a CSV regression dataset, preserving row order.

    Malformed cells and non-finite values raise with the offending row and
    column named; a wrong column count raises a schema error.
    """
    expected = input_dim + output_dim
    rows: list[list[float]] = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"{path}: cannot open dataset: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        if len(header) != expected:
            raise DatasetError(
                f"{path}: expected {expected} columns ({input_dim} inputs + "
                f"{output_dim} outputs), header has {len(header)}"
            )
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != expected:
                raise DatasetError(f"{path}: row {lineno} has {len(raw)} columns, expected {expected}")
            parsed = []
            for col, cell in enumerate(raw, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {lineno}, column {col}: not a number: {cell!r}"
                    ) from None
                if not np.isfinite(value):
                    raise DatasetError(
                        f"{path}: row {lineno}, column {col}: non-finite value {cell!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    data = np.asarray(rows)
    X, Y = data[:, :input_dim], data[:, input_dim:]
    return Dataset(X=X, Y=Y, lower=X.min(axis=0), upper=X.max(axis=0))


def write_dataset(path, X: np.ndarray, Y: np.ndarray) -> None:
    """Write a dataset CSV with the canonical x1..xm,y1..yd header."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    header = [f"x{j + 1}" for j in range(X.shape[1])] + [f"y{j + 1}" for j in range(Y.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for xr, yr in zip(X, Y):
            writer.writerow([repr(float(v)) for v in (*xr, *yr)])


def toy_stream(steps: int, rng: np.random.Generator) -> Dataset:
    """Synthetic 1-D stream: uniform inputs over the toy interval, noisy outputs."""
    xs = rng.uniform(*TOY_INTERVAL, size=steps)
    ys = toy_function(xs, rng)
    X = xs[:, None]
    return Dataset(X=X, Y=ys[:, None], lower=X.min(axis=0), upper=X.max(axis=0))
