"""Counter-based seeded randomness.

All sampling in the toolkit draws raw 64-bit words from a Philox counter
stream keyed by the user seed.  Word i of stream (seed) is the same no
matter how the index range is partitioned across workers, so parallel and
serial runs agree bit-for-bit.
"""
from __future__ import annotations

import numpy as np


def raw_words(seed: int, start: int, count: int) -> np.ndarray:
    """Words [start, start+count) of the uint64 Philox stream keyed by seed."""
    bg = np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF)
    if start:
        bg.advance(start)
    return bg.random_raw(count)


def sample_indices(seed: int, start: int, count: int, k: int, n: int) -> np.ndarray:
    """(count, k) array of indices in [0, n); sample j uses words [j*k, (j+1)*k).

    Uses modulo reduction: the tiny bias (< 2**-50 for n <= 2**14) is
    irrelevant for lower-bound sampling and keeps word consumption fixed,
    which is what makes partitioned runs reproducible.
    """
    words = raw_words(seed, start * k, count * k)
    return (words % np.uint64(n)).astype(np.int64).reshape(count, k)


def pick_one(seed: int, slot: int, limit: int) -> int:
    """Deterministic choice in [0, limit) for a single slot (e.g. per-point)."""
    return int(raw_words(seed, slot, 1)[0] % np.uint64(limit))
