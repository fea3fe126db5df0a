"""Regression datasets and their delimited-text persistence."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DatasetFormatError(ValueError):
    """A dataset file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Dataset:
    """Labeled regression samples: input matrix ``x`` (l, n) and targets ``y`` (l,).

    Arrays are validated and frozen at construction; instances are safe to
    share across threads.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"sample count mismatch: {x.shape[0]} inputs vs {y.shape[0]} targets")
        if x.shape[0] == 0:
            raise ValueError("dataset is empty")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset from delimited text: n feature columns then one target
    column per line, '#' comment lines and blank lines ignored."""
    rows = []
    width = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.replace(",", " ").split()
        if len(fields) < 2:
            raise DatasetFormatError("expected at least one feature column and a target", lineno)
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise DatasetFormatError(f"expected {width} columns, found {len(fields)}", lineno)
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise DatasetFormatError(f"non-numeric value in {fields!r}", lineno) from None
    if not rows:
        raise DatasetFormatError("no samples found")
    arr = np.asarray(rows, dtype=np.float64)
    try:
        return Dataset(arr[:, :-1], arr[:, -1])
    except ValueError as exc:
        raise DatasetFormatError(str(exc)) from exc


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    lines = ["# columns: features then target"]
    for xi, yi in zip(dataset.x, dataset.y):
        lines.append(" ".join(repr(float(v)) for v in xi) + " " + repr(float(yi)))
    Path(path).write_text("\n".join(lines) + "\n")
