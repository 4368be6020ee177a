import time

import numpy as np
import pytest

from src.data.dataset import RegressionDataset, SyntheticSpec
from src.data.synthetic import generate_synthetic
from src.errors import DegenerateError, SpecificationError
from src.models.factors import apply_sign_convention, predict, pseudo_inverse
from src.models.plsr import (
    deflate,
    dominant_svd_pair,
    ls_loading,
    ls_projector_objective,
    ls_scalar,
    plsr_factor,
    plsr_fit,
)
from src.utils.metrics import evaluate_all, rmse


def _unit(v):
    return v / np.linalg.norm(v)


def test_dominant_svd_pair_diagonal():
    w, c, s = dominant_svd_pair(np.diag([3.0, 1.0]))
    assert np.allclose(w, [1.0, 0.0]) and np.allclose(c, [1.0, 0.0])
    assert s == pytest.approx(3.0)


def test_dominant_svd_pair_rank_one():
    a = np.array([1.0, -4.0, 2.0])
    b = np.array([3.0, 1.0])
    w, c, s = dominant_svd_pair(np.outer(a, b))
    assert s == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b))
    # largest-|w| entry is -4/|a|, so the pair is flipped
    assert np.allclose(w, -a / np.linalg.norm(a))
    assert np.allclose(c, -b / np.linalg.norm(b))


def test_dominant_svd_pair_is_covariance_maximal(rng):
    m = rng.standard_normal((4, 3))
    w, c, s = dominant_svd_pair(m)
    assert w @ m @ c == pytest.approx(s)
    for _ in range(500):
        w_r = _unit(rng.standard_normal(4))
        c_r = _unit(rng.standard_normal(3))
        assert w_r @ m @ c_r <= s + 1e-12


def test_dominant_svd_pair_all_zero():
    with pytest.raises(DegenerateError):
        dominant_svd_pair(np.zeros((3, 2)))


def test_sign_convention_joint_flip():
    w, c, sign = apply_sign_convention(np.array([0.1, -0.9]), np.array([0.6, 0.8]))
    assert sign == -1.0
    assert np.array_equal(w, [-0.1, 0.9]) and np.array_equal(c, [-0.6, -0.8])


def test_ls_loading_and_scalar(rng):
    t = rng.standard_normal(10)
    p = rng.standard_normal(4)
    assert np.allclose(ls_loading(np.outer(t, p), t), p, atol=1e-12)

    x = rng.standard_normal((10, 4))
    expected = np.linalg.lstsq(t.reshape(-1, 1), x, rcond=None)[0].ravel()
    assert np.allclose(ls_loading(x, t), expected, atol=1e-12)

    assert ls_scalar(2.0 * t, t) == pytest.approx(2.0)
    u = rng.standard_normal(10)
    assert ls_scalar(u, t) == pytest.approx(float(u @ t) / float(t @ t), abs=1e-12)


def test_ls_loading_orthogonal_score():
    t = np.array([1.0, -1.0, 0.0])
    x = np.array([[1.0, 2.0], [1.0, 2.0], [5.0, -3.0]])
    assert np.allclose(ls_loading(x, t), 0.0)


def test_ls_helpers_reject_zero_score():
    with pytest.raises(DegenerateError):
        ls_loading(np.ones((3, 2)), np.zeros(3))
    with pytest.raises(DegenerateError):
        ls_scalar(np.ones(3), np.zeros(3))


def test_deflate_rank_one_gives_zero(rank1_data):
    factor = plsr_factor(np.array(rank1_data.x), np.array(rank1_data.y))
    x_next, y_next = deflate(rank1_data.x, rank1_data.y, factor)
    assert np.allclose(x_next, 0.0, atol=1e-12)
    assert np.allclose(y_next, 0.0, atol=1e-12)


def test_deflate_zero_scalar_keeps_y(rng):
    x = rng.standard_normal((6, 3))
    y = rng.standard_normal((6, 2))
    factor = plsr_factor(x, y)
    zero_b = type(factor)(w=factor.w, c=factor.c, t=factor.t, u=factor.u, p=factor.p, b=0.0)
    x_next, y_next = deflate(x, y, zero_b)
    assert np.array_equal(y_next, y)
    assert np.allclose(x_next, x - np.outer(factor.t, factor.p))


def test_ls_projector_objective_identity(rng):
    x = rng.standard_normal((9, 4))
    y = rng.standard_normal((9, 2))
    w = _unit(rng.standard_normal(4))
    c = _unit(rng.standard_normal(2))
    expected = np.sum(x**2) + np.sum(y**2) - 2.0 * w @ x.T @ y @ c
    assert ls_projector_objective(x, y, w, c) == pytest.approx(expected, rel=1e-12)

    # so the covariance maximizer minimizes it
    w0, c0, _ = dominant_svd_pair(x.T @ y)
    assert ls_projector_objective(x, y, w0, c0) <= ls_projector_objective(x, y, w, c)


def test_plsr_fit_exact_recovery(small_synthetic):
    train, test = small_synthetic
    model = plsr_fit(train, 5)
    assert model.n_factors == 5
    assert rmse(predict(model, test.x), test.y) < 1e-6
    assert np.allclose(predict(model, train.x), train.y, atol=1e-6)


def test_plsr_fit_factor_invariants(small_synthetic):
    train, _ = small_synthetic
    model = plsr_fit(train, 5)
    for f in model.factors:
        assert np.linalg.norm(f.w) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(f.c) == pytest.approx(1.0, abs=1e-10)
        assert f.w[np.argmax(np.abs(f.w))] > 0
    # X is exhausted after rank-many factors, so X H == T B C^T
    xh = train.x @ model.h
    assert np.allclose(xh, model.factorized_prediction(), rtol=1e-8, atol=1e-8 * np.abs(xh).max())


def test_plsr_fit_single_factor_on_rank_one(rank1_data):
    model = plsr_fit(rank1_data, 1)
    assert np.allclose(predict(model, rank1_data.x), rank1_data.y, atol=1e-10)


def test_plsr_fit_zero_response_stops_early():
    data = RegressionDataset(x=np.arange(12.0).reshape(4, 3) + 1.0, y=np.zeros((4, 2)))
    model = plsr_fit(data, 2)
    assert model.n_factors == 0
    assert model.stopped_early
    assert np.array_equal(model.h, np.zeros((3, 2)))


def test_plsr_fit_stops_when_x_is_exhausted(rank1_data):
    model = plsr_fit(rank1_data, 3)
    assert model.n_factors == 1
    assert model.stopped_early


@pytest.mark.parametrize("s", [0, 5, 2.5])
def test_plsr_fit_rejects_bad_factor_count(rank1_data, s):
    data = RegressionDataset(x=rank1_data.x[:, :4], y=rank1_data.y)
    with pytest.raises(SpecificationError):
        plsr_fit(data, s)


def test_truncate_matches_shorter_fit(rng):
    data = RegressionDataset(x=rng.standard_normal((20, 6)), y=rng.standard_normal((20, 2)))
    full = plsr_fit(data, 5)
    short = plsr_fit(data, 3)
    assert np.allclose(full.truncate(3).h, short.h, atol=1e-10)
    assert full.truncate(3).n_factors == 3


def test_centered_fit_predicts_with_offsets(rank1_data):
    shifted = RegressionDataset(x=np.array(rank1_data.x) + 5.0, y=np.array(rank1_data.y) - 2.0)
    model = plsr_fit(shifted, 1, center=True)
    assert model.centered
    assert np.allclose(predict(model, shifted.x), shifted.y, atol=1e-10)


def test_predict_checks_columns(rank1_data):
    model = plsr_fit(rank1_data, 1)
    assert np.array_equal(predict(model, np.zeros((2, 4))), np.zeros((2, 2)))
    with pytest.raises(SpecificationError):
        predict(model, np.zeros((2, 3)))


def test_predict_single_row_is_linear(small_synthetic):
    train, _ = small_synthetic
    model = plsr_fit(train, 3)
    assert np.allclose(predict(model, train.x[4:5])[0], (train.x @ model.h)[4], rtol=1e-12, atol=1e-12)


def test_pseudo_inverse(rng):
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    assert np.allclose(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    m = rng.standard_normal((5, 5))
    assert np.allclose(pseudo_inverse(m) @ m, np.eye(5), atol=1e-10)


@pytest.mark.slow
def test_plsr_exact_recovery_at_full_scale():
    train, test = generate_synthetic(SyntheticSpec(seed=1))
    start = time.perf_counter()
    model = plsr_fit(train, 20)
    elapsed = time.perf_counter() - start

    metrics = evaluate_all(predict(model, test.x), test.y)
    assert metrics["mean_rmse"] <= 1e-6
    assert all(r >= 0.999999 for r in metrics["r"])
    assert elapsed < 30.0
