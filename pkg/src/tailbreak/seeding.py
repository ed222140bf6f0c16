"""Deterministic seed derivation and low-level random draws.

All randomness flows through counter-based Philox streams keyed by 64-bit
seeds derived with the SplitMix64 finalizer, so sub-streams (replication
i, the Gaussian driver vs. the innovation draws, ...) are independent and
reproducible regardless of execution order or worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# SplitMix64 constants (Steele, Lea & Flood 2014).
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(seed: int, index: int) -> int:
    """Derive the ``index``-th 64-bit sub-seed of ``seed``."""
    z = (int(seed) + (int(index) + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def philox(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms strictly inside (0, 1).

    Draws bin centers (i + 1/2) / 2**53, so 0 and 1 are unattainable and
    inverse-CDF transforms never see the endpoints.
    """
    return (rng.integers(0, 1 << 53, size=size, dtype=np.uint64) + 0.5) * 2.0**-53


def standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Gaussians via the normal quantile applied to an open uniform stream."""
    from .core import normal_quantile

    return normal_quantile(open_uniform(rng, size))
