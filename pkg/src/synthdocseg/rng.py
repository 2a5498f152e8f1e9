"""Deterministic, purpose-tagged random streams.

Every stochastic component draws from its own stream keyed by (seed, tag) so
adding parallelism or reordering work never changes outputs.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *tags) -> np.random.Generator:
    """Return a Generator keyed by the 64-bit seed and a tag path."""
    text = "/".join(str(t) for t in tags)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    tag_key = int.from_bytes(digest, "little")
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, tag_key]))
