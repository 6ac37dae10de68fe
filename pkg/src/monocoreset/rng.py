"""Seeded random streams.

Every random draw in the package goes through a Philox4x64 counter-based
bit generator keyed by an unsigned 64-bit seed.  Child seeds (per trial,
per multistart run, per tree node) are derived with splitmix64 so that
results depend only on the master seed and the child's index, never on
execution order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
STREAM_NAME = "philox4x64-10/splitmix64"
STREAM_VERSION = 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for the node at ``path`` below ``seed``."""
    out = check_seed(seed)
    for index in path:
        out = splitmix64(out ^ splitmix64(int(index) & MASK64))
    return out


def uniforms(seed: int, size: int) -> np.ndarray:
    """``size`` doubles in [0, 1) built from the top 53 bits of raw Philox output.

    Uses the raw bit stream only, so values do not depend on numpy's
    distribution code.
    """
    raw = np.random.Philox(key=check_seed(seed)).random_raw(int(size))
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=check_seed(seed)))


def unit_ball(rng: np.random.Generator, count: int, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform draws from the closed ball of ``radius`` in R^dim."""
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    r = radius * rng.random((count, 1)) ** (1.0 / dim)
    return g / norms * r
