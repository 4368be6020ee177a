# Latent factors, the assembled coefficient matrix H and prediction Y_hat = X H.
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from src.data.dataset import as_data_matrix
from src.errors import SpecificationError

ALGORITHMS = ("plsr", "pmcr")


def pseudo_inverse(m) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below max(rows, cols) * eps * s_max are treated as zero.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0:
        return np.zeros(m.shape[::-1])
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    tol = max(m.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    s_inv = np.zeros_like(s)
    keep = s > tol
    s_inv[keep] = 1.0 / s[keep]
    return (vt.T * s_inv) @ u.T


def apply_sign_convention(w: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Flip (w, c) jointly so that the largest-magnitude entry of w is positive.

    Returns the possibly flipped pair and the applied sign (+1 or -1).
    """
    sign = 1.0 if w[np.argmax(np.abs(w))] >= 0 else -1.0
    return sign * w, sign * c, sign


@dataclass(frozen=True)
class LatentFactor:
    """One extracted factor: projectors w, c; scores t, u; loading p; scalar b."""

    w: np.ndarray
    c: np.ndarray
    t: np.ndarray
    u: np.ndarray
    p: np.ndarray
    b: float


def assemble_coefficients(factors: Sequence[LatentFactor], n_inputs: int, n_outputs: int) -> np.ndarray:
    """H = pinv(P^T) B C^T from the per-factor loadings, scalars and projectors."""
    if not factors:
        return np.zeros((n_inputs, n_outputs))
    p = np.column_stack([f.p for f in factors])
    c = np.column_stack([f.c for f in factors])
    b = np.diag([f.b for f in factors])
    return pseudo_inverse(p.T) @ b @ c.T


@dataclass(frozen=True)
class FactorModel:
    """A fitted PLSR / PMCR model.

    `factors` may hold fewer than the requested count when the factor loop
    stopped on a degenerate residual (`stopped_early`). `x_mean`/`y_mean` are
    set only for models fit on centered data.
    """

    algorithm: str
    factors: tuple[LatentFactor, ...]
    h: np.ndarray
    n_inputs: int
    n_outputs: int
    n_requested: int
    stopped_early: bool = False
    x_mean: np.ndarray | None = None
    y_mean: np.ndarray | None = None
    diagnostics: tuple[Any, ...] = field(default=(), compare=False)
    config: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise SpecificationError(f"unknown algorithm '{self.algorithm}'")
        if self.h.shape != (self.n_inputs, self.n_outputs):
            raise SpecificationError(
                f"H has shape {self.h.shape}, expected {(self.n_inputs, self.n_outputs)}"
            )

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def centered(self) -> bool:
        return self.x_mean is not None

    def truncate(self, s: int) -> "FactorModel":
        """The model made of the first `s` factors (all of them if fewer exist)."""
        if s < 1:
            raise SpecificationError(f"factor count must be >= 1, got {s}")
        kept = self.factors[:s]
        return replace(
            self,
            factors=kept,
            h=assemble_coefficients(kept, self.n_inputs, self.n_outputs),
            n_requested=s,
            diagnostics=self.diagnostics[:s],
        )

    def factorized_prediction(self) -> np.ndarray:
        """T B C^T on the training data (centered scale if fit centered)."""
        if not self.factors:
            return np.zeros((0, self.n_outputs))
        t = np.column_stack([f.t for f in self.factors])
        c = np.column_stack([f.c for f in self.factors])
        b = np.diag([f.b for f in self.factors])
        return t @ b @ c.T


def predict(model: FactorModel, x) -> np.ndarray:
    """Y_hat = X H, undoing centering for models fit on centered data."""
    x = as_data_matrix(x, "x")
    if x.shape[1] != model.n_inputs:
        raise SpecificationError(
            f"x has {x.shape[1]} columns but the model expects {model.n_inputs}"
        )
    if model.centered:
        return (x - model.x_mean) @ model.h + model.y_mean
    return x @ model.h
