"""
Seeded generators and order-independent seed derivation.

Every random draw in the package goes through ``make_generator`` so that a
(seed, rng_id) pair fully determines the output. Child seeds for replications
and Monte Carlo chunks come from ``derive_seed``, which hashes the parent seed
together with a key path; the result does not depend on the order in which
children are requested.
"""

from __future__ import annotations
from typing import Any

import numpy as np

RNG_ID = "numpy.PCG64"

_SEED_MASK = (1 << 64) - 1


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be a non-negative 64-bit integer, got {seed}")
    return seed & _SEED_MASK


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def derive_seed(master_seed: int, *path: Any) -> int:
    """
    Mix a master seed with integer path components into a new 64-bit seed.

    Uses numpy's SeedSequence hashing with ``path`` as the spawn key, so
    ``derive_seed(s, n, rep)`` is fixed for given arguments regardless of
    how many other children were derived before it.
    """
    key = tuple(int(c) for c in path)
    ss = np.random.SeedSequence(_check_seed(master_seed), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
