# Seeded, platform-independent random streams.
#
# Every stream is numpy's PCG64 bit generator seeded through a SeedSequence
# built from (master seed, purpose offset, *keys). Streams for different
# purposes (or different trials) never share state, so a result depends only on
# the master seed and the keys, never on evaluation order or job count.
from __future__ import annotations

import numpy as np

PURPOSE_OFFSETS = {
    "latents": 1,
    "transforms": 2,
    "contamination": 3,
    "trial": 4,
    "folds": 5,
}


def derive_seed_sequence(seed: int, purpose: str, *keys: int) -> np.random.SeedSequence:
    if purpose not in PURPOSE_OFFSETS:
        raise KeyError(f"Unknown random stream purpose '{purpose}'")
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    return np.random.SeedSequence([int(seed), PURPOSE_OFFSETS[purpose], *map(int, keys)])


def derive_rng(seed: int, purpose: str, *keys: int) -> np.random.Generator:
    """Return the PCG64 generator for `purpose` under master `seed`."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, purpose, *keys)))


def derive_int_seed(seed: int, purpose: str, *keys: int) -> int:
    """32-bit integer seed for APIs that take `random_state` (e.g. sklearn)."""
    return int(derive_seed_sequence(seed, purpose, *keys).generate_state(1)[0])
