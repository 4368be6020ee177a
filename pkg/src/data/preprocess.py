# Optional column centering (off by default everywhere in the pipeline).
from __future__ import annotations

import numpy as np

from src.data.dataset import as_data_matrix


def center_columns(m) -> tuple[np.ndarray, np.ndarray]:
    """Subtract column means. Returns (centered matrix, means)."""
    m = as_data_matrix(m)
    means = m.mean(axis=0)
    return m - means, means
