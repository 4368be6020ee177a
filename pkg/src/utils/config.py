# Run configuration: built-in defaults <- YAML file <- environment <- flags.
from __future__ import annotations

import copy
import logging
import os
from pathlib import Path
from typing import Any, Mapping

import yaml  # type: ignore

from src.errors import SpecificationError

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "ROBUSTPLS_SEED"

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "synthetic": {
        "train_count": 300,
        "test_count": 300,
        "latent_dim": 20,
        "x_dim": 500,
        "y_dim": 3,
        "transform_seed": None,
    },
    "contamination": {"level": 0.0, "noise_std": 100.0, "relative": False},
    "pmcr": {
        "varsigma": None,
        "max_hq_iters": 50,
        "max_fp_iters": 100,
        "fp_tol": 1e-8,
        "silverman_classic": True,
        "regression": "shared",
        "min_effective_fraction": 0.1,
        "bandwidths": None,
        "center": False,
    },
    "selection": {"s_max": 100, "folds": 5},
    "benchmark": {
        "levels": [0.0, 0.2, 0.5, 0.8],
        "stds": [100.0],
        "trials": 20,
        "algorithms": ["plsr", "pmcr"],
        "factors": "auto",
        "redraw_transforms": True,
        "mae_l1": False,
        "jobs": 1,
    },
    "sweep": {
        "level": 0.5,
        "noise_std": 100.0,
        "s_values": list(range(1, 101)),
        "trials": 10,
        "algorithms": ["plsr", "pmcr"],
        "mae_l1": False,
        "jobs": 1,
    },
    "logging": {"level": "INFO"},
}


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict:
    """Recursively merge `override` into a copy of `base` (override wins)."""
    out = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def read_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path) as f:
        try:
            loaded = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise SpecificationError(f"{path}: invalid YAML ({e})") from e
    if loaded is None:
        return {}
    if not isinstance(loaded, Mapping):
        raise SpecificationError(f"{path}: top level must be a mapping")
    unknown = set(loaded) - set(DEFAULTS)
    if unknown:
        raise SpecificationError(f"{path}: unknown section(s) {', '.join(sorted(unknown))}")
    return dict(loaded)


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> dict:
    """Defaults merged with the config file and the seed environment variable."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        cfg = deep_merge(cfg, read_config_file(path))
        logger.debug("Config file %s merged", path)

    env = os.environ if env is None else env
    raw_seed = env.get(SEED_ENV_VAR)
    if raw_seed not in (None, ""):
        try:
            cfg["seed"] = int(raw_seed)
        except ValueError:
            raise SpecificationError(f"{SEED_ENV_VAR} must be an integer, got {raw_seed!r}") from None
    return cfg


def apply_overrides(cfg: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict:
    """Apply flag values given as {"section.key": value} or {"key": value}; None is skipped."""
    nested: dict[str, Any] = {}
    for dotted, value in overrides.items():
        if value is None:
            continue
        *parents, leaf = dotted.split(".")
        node = nested
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return deep_merge(cfg, nested)
