"""Small shared helpers."""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["named_rng"]


def named_rng(seed: int, *stream: str) -> np.random.Generator:
    """Generator for a named substream of a single root seed.

    Every piece of randomness in a run is drawn from a stream identified
    by (seed, names...), so independent stages stay decoupled and any
    one of them can be reproduced in isolation.
    """
    digest = hashlib.sha256("/".join(stream).encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *words]))
