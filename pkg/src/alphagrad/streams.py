"""Counter-based random streams.

Every random draw in the project comes from a Philox generator keyed by a
SHA-256 digest of ``(seed, label)``.  Distinct labels give independent
streams, the same ``(seed, label)`` always reproduces the same block of
numbers, and nothing depends on call order or thread schedule.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _digest_int(seed: int, label: str, bits: int = 128) -> int:
    digest = hashlib.sha256(f"{seed}\x1f{label}".encode()).digest()
    return int.from_bytes(digest[: bits // 8], "little")


def generator(seed: int, label: str) -> np.random.Generator:
    """Philox generator keyed by (seed, label)."""
    return np.random.Generator(np.random.Philox(key=_digest_int(seed, label)))


def gaussian_block(seed: int, label: str, shape, sigma: float = 1.0) -> np.ndarray:
    """Deterministic N(0, sigma^2) block for the given stream."""
    return sigma * generator(seed, label).standard_normal(shape)


def derive_seed(seed: int, *parts) -> int:
    """Child seed for a named sub-experiment (e.g. one sweep grid point)."""
    label = "/".join(repr(p) for p in parts)
    return _digest_int(seed, label, bits=63)
