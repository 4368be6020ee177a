import numpy as np
from scipy import stats

from src.data.dataset import as_data_matrix
from src.errors import DomainError, SpecificationError, UndefinedCorrelationError


def _pair(yhat, y) -> tuple[np.ndarray, np.ndarray]:
    yhat = as_data_matrix(yhat, "prediction")
    y = as_data_matrix(y, "target")
    if yhat.shape != y.shape:
        raise SpecificationError(f"shape mismatch: prediction {yhat.shape} vs target {y.shape}")
    return yhat, y


def pearson_r(a, b) -> float:
    """Sample Pearson correlation; undefined (error) for a constant sequence."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise DomainError(f"correlation needs at least 2 pairs, got {a.size}")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant sequence")
    return float(stats.pearsonr(a, b).statistic)


def rmse(yhat, y) -> float:
    """sqrt of the mean (over observations) squared Euclidean row distance."""
    yhat, y = _pair(yhat, y)
    return float(np.sqrt(np.mean(np.sum((yhat - y) ** 2, axis=1))))


def mae(yhat, y, l1: bool = False) -> float:
    """Mean (over observations) Euclidean norm of the residual row.

    `l1=True` uses the sum of absolute components instead; for a single
    output the two coincide.
    """
    yhat, y = _pair(yhat, y)
    residual = yhat - y
    if l1:
        return float(np.mean(np.sum(np.abs(residual), axis=1)))
    return float(np.mean(np.linalg.norm(residual, axis=1)))


def rmse_per_axis(yhat, y) -> np.ndarray:
    yhat, y = _pair(yhat, y)
    return np.sqrt(np.mean((yhat - y) ** 2, axis=0))


def mae_per_axis(yhat, y) -> np.ndarray:
    yhat, y = _pair(yhat, y)
    return np.mean(np.abs(yhat - y), axis=0)


def pearson_per_axis(yhat, y) -> list[float | None]:
    """Per-output r; None where the correlation is undefined."""
    yhat, y = _pair(yhat, y)
    out: list[float | None] = []
    for j in range(y.shape[1]):
        try:
            out.append(pearson_r(yhat[:, j], y[:, j]))
        except UndefinedCorrelationError:
            out.append(None)
        except DomainError:
            # single observation
            out.append(None)
    return out


def _mean_defined(values) -> float | None:
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None


def evaluate_all(yhat, y, mae_l1: bool = False) -> dict:
    """
    Evaluate a multi-output prediction against its target.

    Returns a dict with:
      - "r", "rmse", "mae": per-output-axis lists (r is None where undefined).
      - "mean_r", "mean_rmse", "mean_mae": averages across the output axes
        (mean_r skips undefined axes).
      - "rmse_multivariate", "mae_multivariate": the row-norm versions over
        all outputs at once.
    """
    yhat, y = _pair(yhat, y)
    r = pearson_per_axis(yhat, y)
    rmse_axes = rmse_per_axis(yhat, y)
    mae_axes = mae_per_axis(yhat, y)
    return {
        "r": r,
        "rmse": [float(v) for v in rmse_axes],
        "mae": [float(v) for v in mae_axes],
        "mean_r": _mean_defined(r),
        "mean_rmse": float(np.mean(rmse_axes)),
        "mean_mae": float(np.mean(mae_axes)),
        "rmse_multivariate": rmse(yhat, y),
        "mae_multivariate": mae(yhat, y, l1=mae_l1),
    }
