# Save matrices and metadata
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import pandas as pd

from src.data.dataset import as_data_matrix

logger = logging.getLogger(__name__)

MATRIX_FLOAT_FORMAT = "%.17g"


def save_matrix(m, path: str | Path) -> Path:
    """Write `m` as header-less CSV with 17 significant digits (exact round-trip)."""
    m = as_data_matrix(m)
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(m).to_csv(
        out_path,
        header=False,
        index=False,
        float_format=MATRIX_FLOAT_FORMAT,
        lineterminator="\n",
        encoding="utf-8",
    )
    logger.info("%s file has been saved (%d x %d).", out_path, *m.shape)
    return out_path


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Mapping):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    return value


def write_json(payload: Mapping[str, Any], path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(_to_jsonable(payload), indent=2, sort_keys=False) + "\n")
    logger.info("%s file has been saved.", out_path)
    return out_path


def write_jsonl(records: Iterable[Mapping[str, Any]], path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(_to_jsonable(rec)) + "\n")
    logger.info("%s file has been saved.", out_path)
    return out_path


def read_json(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"JSON file not found: {path}")
    return json.loads(path.read_text())
