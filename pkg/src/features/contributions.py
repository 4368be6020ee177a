# Spatio-spectro-temporal contribution weights of a fitted coefficient matrix.
#
# Inputs are assumed flattened channel-major, then frequency, then temporal
# lag: column index n = (ch * n_freq + freq) * n_temp + temp.
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DegenerateError, SpecificationError

logger = logging.getLogger(__name__)

INDEX_LAYOUT = "channel-major, then frequency, then temporal lag"


@dataclass(frozen=True)
class ContributionWeights:
    axis_sizes: tuple[int, int, int]
    channel: np.ndarray
    frequency: np.ndarray
    temporal: np.ndarray

    def as_dict(self) -> dict:
        return {
            "axis_sizes": list(self.axis_sizes),
            "layout": INDEX_LAYOUT,
            "channel": self.channel.tolist(),
            "frequency": self.frequency.tolist(),
            "temporal": self.temporal.tolist(),
        }


def _check_axis_sizes(axis_sizes, n_inputs: int) -> tuple[int, int, int]:
    sizes = tuple(int(s) for s in axis_sizes)
    if len(sizes) != 3 or any(s < 1 for s in sizes):
        raise SpecificationError(f"axis_sizes must be three positive integers, got {axis_sizes!r}")
    if int(np.prod(sizes)) != n_inputs:
        raise SpecificationError(
            f"{sizes[0]} x {sizes[1]} x {sizes[2]} = {int(np.prod(sizes))} does not match "
            f"the {n_inputs} input variables"
        )
    return sizes


def contribution_weights(h, axis_sizes) -> ContributionWeights:
    """Share of |H| mass per channel, frequency and temporal lag.

    Computed for each output column and averaged with equal weight over the
    columns that carry any mass.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim == 1:
        h = h.reshape(-1, 1)
    sizes = _check_axis_sizes(axis_sizes, h.shape[0])

    mass = np.abs(h)
    totals = mass.sum(axis=0)
    used = totals > 0
    if not used.any():
        raise DegenerateError("coefficient matrix is all zeros")
    if not used.all():
        logger.debug("Skipping %d all-zero output column(s)", int((~used).sum()))

    # (n_ch, n_freq, n_temp, M), normalized per column
    cube = (mass[:, used] / totals[used]).reshape(*sizes, -1)
    return ContributionWeights(
        axis_sizes=sizes,
        channel=cube.sum(axis=(1, 2)).mean(axis=-1),
        frequency=cube.sum(axis=(0, 2)).mean(axis=-1),
        temporal=cube.sum(axis=(0, 1)).mean(axis=-1),
    )


def pattern_shift(reference: ContributionWeights, perturbed: ContributionWeights) -> dict[str, float]:
    """Total absolute change of each weight vector between two models."""
    if reference.axis_sizes != perturbed.axis_sizes:
        raise SpecificationError(
            f"axis sizes differ: {reference.axis_sizes} vs {perturbed.axis_sizes}"
        )
    return {
        "channel": float(np.abs(reference.channel - perturbed.channel).sum()),
        "frequency": float(np.abs(reference.frequency - perturbed.frequency).sum()),
        "temporal": float(np.abs(reference.temporal - perturbed.temporal).sum()),
    }
