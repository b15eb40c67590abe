"""Deterministic random-stream derivation.

Every stochastic operation draws from a stream derived from the triple
(master seed, operation tag, counter), so experiments are bitwise
reproducible and independent workers can be merged in index order.
"""

import hashlib

import numpy as np


def _tag_int(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "little")


def derive_rng(seed: int, tag: str, counter: int = 0) -> np.random.Generator:
    """Generator for stream (seed, tag, counter)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), _tag_int(tag), int(counter)]))
