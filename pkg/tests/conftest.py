import numpy as np
import pytest
from pathlib import Path

from src.data.dataset import RegressionDataset, SyntheticSpec
from src.data.synthetic import generate_synthetic


@pytest.fixture(scope="session")
def project_root() -> Path:
    """Return the root directory of the project."""
    return Path(__file__).parent.parent


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def rank1_data() -> RegressionDataset:
    """X = t a^T, Y = t b^T: one latent variable drives both blocks."""
    t = np.linspace(0.5, 2.0, 12)
    a = np.array([1.0, -2.0, 0.5, 3.0])
    b = np.array([2.0, 1.0])
    return RegressionDataset(x=np.outer(t, a), y=np.outer(t, b))


@pytest.fixture
def small_spec() -> SyntheticSpec:
    return SyntheticSpec(train_count=60, test_count=40, latent_dim=5, x_dim=30, y_dim=3, seed=3)


@pytest.fixture
def small_synthetic(small_spec) -> tuple[RegressionDataset, RegressionDataset]:
    """Noiseless rank-5 (train, test) pair."""
    return generate_synthetic(small_spec)
