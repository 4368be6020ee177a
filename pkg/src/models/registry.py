# Persist fitted factor models as JSON documents.
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from src import __version__
from src.data.io_utils import _to_jsonable
from src.errors import SpecificationError
from src.models.factors import FactorModel, LatentFactor

logger = logging.getLogger(__name__)

_REQUIRED = ("algorithm", "S", "N", "M", "factors", "H")


def model_document(model: FactorModel, config: Mapping[str, Any] | None = None) -> dict:
    """The JSON-ready description of `model`.

    Scores t and u are training-set quantities and are not stored.
    """
    return {
        "algorithm": model.algorithm,
        "version": __version__,
        "S": model.n_factors,
        "N": model.n_inputs,
        "M": model.n_outputs,
        "n_requested": model.n_requested,
        "stopped_early": model.stopped_early,
        "factors": [
            {"w": f.w, "c": f.c, "p": f.p, "b": float(f.b)} for f in model.factors
        ],
        "H": model.h,
        "x_mean": model.x_mean,
        "y_mean": model.y_mean,
        "fit_config": model.config,
        "config": dict(config) if config is not None else None,
    }


def save_model(model: FactorModel, path: str | Path, config: Mapping[str, Any] | None = None) -> Path:
    # json writes floats with the shortest repr that round-trips exactly
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(_to_jsonable(model_document(model, config)), indent=2) + "\n")
    logger.info("Model saved to %s (%s, S=%d)", out_path, model.algorithm, model.n_factors)
    return out_path


def _vector(values, name: str, size: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (size,):
        raise SpecificationError(f"{name} has shape {v.shape}, expected ({size},)")
    return v


def load_model(path: str | Path) -> FactorModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SpecificationError(f"{path}: not a JSON document ({e})") from e
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise SpecificationError(f"{path}: missing field(s) {', '.join(missing)}")

    n, m = int(doc["N"]), int(doc["M"])
    empty = np.empty(0)
    factors = tuple(
        LatentFactor(
            w=_vector(f["w"], f"factor {k} w", n),
            c=_vector(f["c"], f"factor {k} c", m),
            t=empty,
            u=empty,
            p=_vector(f["p"], f"factor {k} p", n),
            b=float(f["b"]),
        )
        for k, f in enumerate(doc["factors"], start=1)
    )
    if len(factors) != int(doc["S"]):
        raise SpecificationError(f"{path}: S = {doc['S']} but {len(factors)} factors stored")

    x_mean = doc.get("x_mean")
    y_mean = doc.get("y_mean")
    model = FactorModel(
        algorithm=doc["algorithm"],
        factors=factors,
        h=np.asarray(doc["H"], dtype=np.float64).reshape(n, m),
        n_inputs=n,
        n_outputs=m,
        n_requested=int(doc.get("n_requested", len(factors))),
        stopped_early=bool(doc.get("stopped_early", False)),
        x_mean=None if x_mean is None else _vector(x_mean, "x_mean", n),
        y_mean=None if y_mean is None else _vector(y_mean, "y_mean", m),
        config=doc.get("fit_config") or {},
    )
    logger.debug("Loaded %s model with %d factor(s) from %s", model.algorithm, model.n_factors, path)
    return model
