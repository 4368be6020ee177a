# Latent-variable synthetic benchmark data and training-set contamination.
from __future__ import annotations

import logging

import numpy as np

from src.data.dataset import ContaminationSpec, RegressionDataset, SyntheticSpec, as_data_matrix
from src.errors import SpecificationError
from src.utils.seeding import derive_rng

logger = logging.getLogger(__name__)


def draw_transforms(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    """Standard-normal maps latent -> X (latent_dim x x_dim) and latent -> Y."""
    seed = spec.seed if spec.transform_seed is None else spec.transform_seed
    rng = derive_rng(seed, "transforms")
    a = rng.standard_normal((spec.latent_dim, spec.x_dim))
    b = rng.standard_normal((spec.latent_dim, spec.y_dim))
    return a, b


def generate_synthetic(spec: SyntheticSpec) -> tuple[RegressionDataset, RegressionDataset]:
    """Draw (train, test) with X = T A and Y = T B, T ~ U[0, 1) i.i.d.

    numpy's `Generator.random` samples the half-open interval [0, 1). Both sets
    share the same two transformation matrices.
    """
    rng = derive_rng(spec.seed, "latents")
    t_train = rng.random((spec.train_count, spec.latent_dim))
    t_test = rng.random((spec.test_count, spec.latent_dim))
    a, b = draw_transforms(spec)

    train = RegressionDataset(x=t_train @ a, y=t_train @ b)
    test = RegressionDataset(x=t_test @ a, y=t_test @ b)
    logger.debug(
        "Generated synthetic data: train %s/%s, test %s/%s (seed=%s)",
        train.x.shape, train.y.shape, test.x.shape, test.y.shape, spec.seed,
    )
    return train, test


def contaminated_row_count(level: float, n_rows: int) -> int:
    # round() is round-half-to-even
    return int(round(level * n_rows))


def contaminate(x, spec: ContaminationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Replace round(level * L) random rows of `x` by zero-mean Gaussian noise.

    Returns the contaminated copy and the sorted indices of the replaced rows.
    Untouched rows are bit-identical to the input, which is never mutated.
    """
    x = as_data_matrix(x, "x")
    n_rows, n_cols = x.shape
    n_bad = contaminated_row_count(spec.level, n_rows)
    if n_bad == 0:
        return x, np.empty(0, dtype=np.int64)

    if spec.relative:
        if n_rows < 2:
            raise SpecificationError("relative contamination needs at least two rows")
        scale = spec.noise_std * x.std(axis=0, ddof=1)
    else:
        scale = np.full(n_cols, float(spec.noise_std))

    rng = derive_rng(spec.seed, "contamination")
    rows = np.sort(rng.choice(n_rows, size=n_bad, replace=False))
    noise = rng.standard_normal((n_bad, n_cols)) * scale

    out = np.array(x)
    out[rows] = noise
    out.flags.writeable = False
    logger.debug(
        "Contaminated %d/%d rows (level=%.3f, std=%g, relative=%s)",
        n_bad, n_rows, spec.level, spec.noise_std, spec.relative,
    )
    return out, rows
