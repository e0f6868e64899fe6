"""CSV ingestion for model matrices and observation vectors.

One CSV row per matrix row.  Complex entries are either written in Python
suffix notation (``1.5-2j``) or as adjacent ``re,im`` column pairs.
"""

import csv
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

COMPLEX_FORMATS = ("paired", "suffix")


def read_matrix_csv(path, complex_format=None) -> np.ndarray:
    """Load a 2-D array.  ``complex_format`` is None (real), ``"paired"`` or ``"suffix"``."""
    if complex_format not in (None, *COMPLEX_FORMATS):
        raise InvalidInputError(f"unknown complex format {complex_format!r}")
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [[c.strip() for c in row] for row in csv.reader(fh) if any(c.strip() for c in row)]
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InvalidInputError(f"{path} is empty")
    if len({len(r) for r in rows}) != 1:
        raise InvalidInputError(f"{path}: rows have differing column counts")
    parse = complex if complex_format == "suffix" else float
    try:
        data = np.array([[parse(c.replace(" ", "")) for c in r] for r in rows])
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if complex_format == "paired":
        if data.shape[1] % 2:
            raise InvalidInputError(f"{path}: paired complex format needs an even column count")
        data = data[:, 0::2] + 1j * data[:, 1::2]
    return data


def read_vector_csv(path, complex_format=None) -> np.ndarray:
    """Load a vector stored as a single column (one entry per row) or a single row."""
    data = read_matrix_csv(path, complex_format)
    if 1 not in data.shape:
        raise InvalidInputError(f"{path}: expected a single row or column, got shape {data.shape}")
    return data.reshape(-1)
