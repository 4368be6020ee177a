# Gaussian kernel, empirical correntropy and Silverman-rule kernel bandwidths.
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from src.errors import DomainError

logger = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-8
BANDWIDTH_NAMES = ("sigma_x", "sigma_y", "sigma_r", "sigma_p", "sigma_b")


def gaussian_kernel(magnitude, sigma: float):
    """g_sigma(e) = exp(-e^2 / (2 sigma^2)); vectorized over `magnitude`."""
    if not sigma > 0:
        raise DomainError(f"kernel bandwidth must be positive, got {sigma}")
    e = np.asarray(magnitude, dtype=np.float64)
    out = np.exp(-(e * e) / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def correntropy_estimate(a, b, sigma: float) -> float:
    """Empirical correntropy (1/L) sum_l g_sigma(a_l - b_l)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise DomainError("correntropy needs at least one pair")
    return float(np.mean(gaussian_kernel(a - b, sigma)))


class BandwidthEstimate(NamedTuple):
    sigma: float
    degenerate: bool  # zero spread, sigma clamped to SIGMA_FLOOR


def silverman_bandwidth(errors, classic: bool = False) -> BandwidthEstimate:
    """Silverman's rule on an error set.

    v = 1.06 * min(std, IQR / 1.34) * L^(-1/5), with the sample std (ddof=1)
    and the IQR from linearly interpolated quartiles. The rule is read as
    sigma^2 = v (sigma = sqrt(v)); `classic=True` uses sigma = v. The result is
    floored at SIGMA_FLOOR.
    """
    e = np.asarray(errors, dtype=np.float64).ravel()
    if e.size < 2:
        raise DomainError(f"bandwidth estimation needs at least 2 errors, got {e.size}")
    if not np.isfinite(e).all():
        raise DomainError("error set contains non-finite values")

    n = e.size
    std = float(np.std(e, ddof=1))
    q75, q25 = np.percentile(e, [75, 25], method="linear")
    spread = min(std, float(q75 - q25) / 1.34)
    v = 1.06 * spread * n ** (-0.2)

    if not v > 0:
        return BandwidthEstimate(SIGMA_FLOOR, True)
    sigma = v if classic else float(np.sqrt(v))
    return BandwidthEstimate(max(sigma, SIGMA_FLOOR), False)


@dataclass(frozen=True)
class KernelBandwidths:
    """The five Gaussian bandwidths of one factor's correntropy objectives."""

    sigma_x: float
    sigma_y: float
    sigma_r: float
    sigma_p: float
    sigma_b: float
    degenerate: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        for name in BANDWIDTH_NAMES:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value}")

    @classmethod
    def uniform(cls, sigma: float) -> "KernelBandwidths":
        return cls(*(float(sigma),) * len(BANDWIDTH_NAMES))

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in BANDWIDTH_NAMES}
