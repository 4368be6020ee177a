import math

import numpy as np
import pytest

from src.errors import DomainError, SpecificationError, UndefinedCorrelationError
from src.utils.metrics import evaluate_all, mae, pearson_r, rmse, rmse_per_axis


def _naive_pearson(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / math.sqrt(va * vb)


def test_pearson_matches_naive_oracle(rng):
    for _ in range(100):
        n = int(rng.integers(2, 40))
        a = rng.standard_normal(n)
        b = 0.5 * a + rng.standard_normal(n)
        assert pearson_r(a, b) == pytest.approx(_naive_pearson(list(a), list(b)), abs=1e-12)


def test_pearson_edge_cases():
    assert pearson_r([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == pytest.approx(1.0)
    assert pearson_r([1.0, 2.0], [2.0, 1.0]) == pytest.approx(-1.0)
    with pytest.raises(UndefinedCorrelationError):
        pearson_r([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        pearson_r([1.0], [1.0])
    with pytest.raises(DomainError):
        pearson_r([1.0, 2.0], [1.0, 2.0, 3.0])


def test_rmse_and_mae_values():
    y = np.zeros((2, 2))
    yhat = np.array([[3.0, 4.0], [0.0, 0.0]])
    assert rmse(yhat, y) == pytest.approx(math.sqrt(12.5))
    assert mae(yhat, y) == pytest.approx(2.5)
    assert mae(yhat, y, l1=True) == pytest.approx(3.5)
    assert np.allclose(rmse_per_axis(yhat, y), [math.sqrt(4.5), math.sqrt(8.0)])


def test_rmse_and_mae_match_naive_loops(rng):
    for _ in range(100):
        n, m = int(rng.integers(1, 30)), int(rng.integers(1, 5))
        y = rng.standard_normal((n, m))
        yhat = y + rng.standard_normal((n, m))
        sq, norm, l1 = 0.0, 0.0, 0.0
        for i in range(n):
            row = [yhat[i, j] - y[i, j] for j in range(m)]
            sq += sum(v * v for v in row)
            norm += math.sqrt(sum(v * v for v in row))
            l1 += sum(abs(v) for v in row)
        assert rmse(yhat, y) == pytest.approx(math.sqrt(sq / n), abs=1e-12)
        assert mae(yhat, y) == pytest.approx(norm / n, abs=1e-12)
        assert mae(yhat, y, l1=True) == pytest.approx(l1 / n, abs=1e-12)


def test_single_output_mae_variants_agree(rng):
    y = rng.standard_normal((20, 1))
    yhat = y + rng.standard_normal((20, 1))
    assert mae(yhat, y) == pytest.approx(mae(yhat, y, l1=True))
    assert rmse(y, y) == 0.0


def test_shape_mismatch():
    with pytest.raises(SpecificationError):
        rmse(np.zeros((3, 2)), np.zeros((3, 1)))


def test_evaluate_all(rng):
    y = rng.standard_normal((50, 3))
    yhat = y + 0.1 * rng.standard_normal((50, 3))
    yhat[:, 2] = 1.0
    metrics = evaluate_all(yhat, y)

    assert metrics["r"][2] is None
    assert all(r > 0.9 for r in metrics["r"][:2])
    assert metrics["mean_r"] == pytest.approx(np.mean(metrics["r"][:2]))
    assert len(metrics["rmse"]) == len(metrics["mae"]) == 3
    assert metrics["rmse_multivariate"] == pytest.approx(rmse(yhat, y))
    assert metrics["mean_rmse"] == pytest.approx(np.mean(metrics["rmse"]))
