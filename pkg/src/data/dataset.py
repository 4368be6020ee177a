# Data model: dense observation-by-variable matrices and the (X, Y) pair.
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from src.errors import SpecificationError


def as_data_matrix(values: Any, name: str = "matrix") -> np.ndarray:
    """Validate `values` as a DataMatrix and return a read-only float64 copy.

    Rows are observations and columns are variables. A 1-D input is read as a
    single column (one variable observed L times).
    """
    try:
        m = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise SpecificationError(f"{name}: not a numeric matrix ({e})") from e
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise SpecificationError(f"{name}: expected a 2-D matrix, got {m.ndim} dimensions")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise SpecificationError(f"{name}: needs at least one row and one column, got {m.shape}")
    if not np.isfinite(m).all():
        bad = np.argwhere(~np.isfinite(m))[0]
        raise SpecificationError(
            f"{name}: non-finite entry at row {bad[0] + 1}, column {bad[1] + 1}"
        )
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class RegressionDataset:
    """Explanatory matrix x (L x N) paired with response matrix y (L x M)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_data_matrix(self.x, "x")
        y = as_data_matrix(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise SpecificationError(
                f"x has {x.shape[0]} observations but y has {y.shape[0]}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n_obs(self) -> int:
        return self.x.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.x.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.y.shape[1]

    def with_x(self, x: Any) -> "RegressionDataset":
        """Same responses, replaced explanatory matrix (e.g. after contamination)."""
        return RegressionDataset(x=x, y=self.y)

    def subset(self, rows: np.ndarray) -> "RegressionDataset":
        return RegressionDataset(x=self.x[rows], y=self.y[rows])


def _require_count(name: str, value: int) -> None:
    if int(value) != value or value < 1:
        raise SpecificationError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generative configuration of the latent-variable synthetic benchmark.

    `transform_seed` pins the two transformation matrices independently of the
    latent draws; when None they are drawn from `seed`.
    """

    train_count: int = 300
    test_count: int = 300
    latent_dim: int = 20
    x_dim: int = 500
    y_dim: int = 3
    seed: int = 0
    transform_seed: int | None = None

    def __post_init__(self):
        for name in ("train_count", "test_count", "latent_dim", "x_dim", "y_dim"):
            _require_count(name, getattr(self, name))
        if self.latent_dim > min(self.x_dim, self.train_count):
            raise SpecificationError(
                f"latent_dim ({self.latent_dim}) must not exceed "
                f"min(x_dim, train_count) = {min(self.x_dim, self.train_count)}"
            )
        if self.seed < 0 or (self.transform_seed is not None and self.transform_seed < 0):
            raise SpecificationError("seeds must be non-negative")

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "SyntheticSpec":
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in cfg.items() if k in keys})


@dataclass(frozen=True)
class ContaminationSpec:
    """Training-set contamination: `level` of the rows replaced by Gaussian noise.

    With `relative=True`, `noise_std` multiplies each column's sample standard
    deviation instead of being an absolute standard deviation.
    """

    level: float
    noise_std: float
    seed: int = 0
    relative: bool = False

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise SpecificationError(f"contamination level must lie in [0, 1], got {self.level}")
        if not self.noise_std > 0:
            raise SpecificationError(f"noise_std must be positive, got {self.noise_std}")
        if self.seed < 0:
            raise SpecificationError("seed must be non-negative")

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "ContaminationSpec":
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in cfg.items() if k in keys})
