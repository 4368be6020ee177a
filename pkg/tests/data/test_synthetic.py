import numpy as np
import pytest

from src.data.dataset import ContaminationSpec, RegressionDataset, SyntheticSpec, as_data_matrix
from src.data.preprocess import center_columns
from src.data.synthetic import (
    contaminate,
    contaminated_row_count,
    draw_transforms,
    generate_synthetic,
)
from src.errors import SpecificationError


def test_as_data_matrix_validates():
    col = as_data_matrix([1.0, 2.0, 3.0])
    assert col.shape == (3, 1)
    assert not col.flags.writeable

    with pytest.raises(SpecificationError, match="row 2, column 1"):
        as_data_matrix([[1.0], [np.nan]])
    with pytest.raises(SpecificationError):
        as_data_matrix(np.zeros((0, 3)))


def test_dataset_requires_matching_rows():
    with pytest.raises(SpecificationError):
        RegressionDataset(x=np.ones((4, 2)), y=np.ones((3, 1)))


def test_synthetic_spec_rejects_latent_above_x_dim():
    with pytest.raises(SpecificationError, match="latent_dim"):
        SyntheticSpec(latent_dim=30, x_dim=20)


def test_default_spec_shapes():
    spec = SyntheticSpec()
    assert (spec.train_count, spec.test_count, spec.latent_dim, spec.x_dim, spec.y_dim) == (300, 300, 20, 500, 3)


def test_generate_synthetic_shapes_and_rank(small_spec, small_synthetic):
    train, test = small_synthetic
    assert train.x.shape == (60, 30) and train.y.shape == (60, 3)
    assert test.x.shape == (40, 30) and test.y.shape == (40, 3)
    assert np.linalg.matrix_rank(train.x) == small_spec.latent_dim


def test_generate_synthetic_is_deterministic(small_spec):
    a_train, a_test = generate_synthetic(small_spec)
    b_train, b_test = generate_synthetic(small_spec)
    assert np.array_equal(a_train.x, b_train.x)
    assert np.array_equal(a_test.y, b_test.y)

    other, _ = generate_synthetic(SyntheticSpec(**{**small_spec.__dict__, "seed": 4}))
    assert not np.array_equal(other.x, a_train.x)


def test_transform_seed_pins_transforms(small_spec):
    s1 = SyntheticSpec(**{**small_spec.__dict__, "seed": 1, "transform_seed": 9})
    s2 = SyntheticSpec(**{**small_spec.__dict__, "seed": 2, "transform_seed": 9})
    a1, b1 = draw_transforms(s1)
    a2, b2 = draw_transforms(s2)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)
    assert not np.array_equal(generate_synthetic(s1)[0].x, generate_synthetic(s2)[0].x)


@pytest.mark.parametrize(
    "level, n_rows, expected",
    [(0.0, 300, 0), (0.05, 300, 15), (0.5, 5, 2), (0.3, 5, 2), (1.0, 7, 7)],
)
def test_contaminated_row_count(level, n_rows, expected):
    assert contaminated_row_count(level, n_rows) == expected


def test_contaminate_replaces_only_selected_rows(rng):
    x = rng.random((40, 6))
    x_before = x.copy()
    out, rows = contaminate(x, ContaminationSpec(level=0.25, noise_std=100.0, seed=5))

    assert len(rows) == 10
    assert np.all(np.diff(rows) > 0)
    keep = np.setdiff1d(np.arange(40), rows)
    assert np.array_equal(out[keep], x[keep])
    assert not np.allclose(out[rows], x[rows])
    assert np.array_equal(x, x_before)


def test_contaminate_level_zero_and_one(rng):
    x = rng.random((10, 3))
    out, rows = contaminate(x, ContaminationSpec(level=0.0, noise_std=1.0))
    assert rows.size == 0 and np.array_equal(out, x)

    _, rows = contaminate(x, ContaminationSpec(level=1.0, noise_std=1.0))
    assert np.array_equal(rows, np.arange(10))


def test_contaminate_is_deterministic(rng):
    x = rng.random((30, 4))
    spec = ContaminationSpec(level=0.3, noise_std=10.0, seed=11)
    out1, rows1 = contaminate(x, spec)
    out2, rows2 = contaminate(x, spec)
    assert np.array_equal(out1, out2) and np.array_equal(rows1, rows2)


def test_relative_contamination_scales_with_column_spread(rng):
    x = rng.standard_normal((200, 2)) * np.array([1.0, 1e6])
    out, rows = contaminate(x, ContaminationSpec(level=0.5, noise_std=3.0, seed=2, relative=True))
    noise = np.abs(out[rows])
    assert noise[:, 1].mean() > 1e4 * noise[:, 0].mean()


@pytest.mark.parametrize("level, std", [(-0.1, 1.0), (1.5, 1.0), (0.5, 0.0)])
def test_contamination_spec_validation(level, std):
    with pytest.raises(SpecificationError):
        ContaminationSpec(level=level, noise_std=std)


def test_center_columns(rng):
    m = rng.random((8, 3)) + 5.0
    centered, means = center_columns(m)
    assert np.allclose(centered.mean(axis=0), 0.0)
    assert np.allclose(centered + means, m)
