# Read CSV matrices (no header, comma separated, one observation per line).
from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import pandas as pd

from src.data.dataset import as_data_matrix
from src.errors import MatrixParseError

_LINE_RE = re.compile(r"line (\d+)")


def load_matrix(path: str | Path) -> np.ndarray:
    """Read a DataMatrix written by `save_matrix` (or any conforming CSV)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Matrix file not found: {path}")

    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            na_filter=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise MatrixParseError(f"{path}: file is empty", row=1) from e
    except pd.errors.ParserError as e:
        # pandas fixes the field count from the first line and reports the
        # first longer one
        match = _LINE_RE.search(str(e))
        row = int(match.group(1)) if match else 0
        raise MatrixParseError(f"{path}: ragged row {row} ({e})", row=row) from e

    # Shorter rows come back padded with missing cells.
    missing = raw.isna().any(axis=1).to_numpy()
    if missing.any():
        row = int(np.flatnonzero(missing)[0]) + 1
        raise MatrixParseError(
            f"{path}: ragged row {row}, expected {raw.shape[1]} fields", row=row
        )

    values = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = values.isna().to_numpy()
    if bad.any():
        r, c = np.argwhere(bad)[0]
        token = raw.iat[r, c]
        raise MatrixParseError(
            f"{path}: non-numeric token {token!r} at row {r + 1}, column {c + 1}",
            row=int(r) + 1,
            col=int(c) + 1,
        )
    return as_data_matrix(values.to_numpy(dtype=np.float64), name=str(path))
