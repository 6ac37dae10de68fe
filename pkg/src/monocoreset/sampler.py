"""Importance sampling of coresets from a sensitivity profile."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KernelSpec, WeightedPointSet
from .rng import check_seed, uniforms
from .sensitivity import SensitivityProfile, sensitivity_for


@dataclass(frozen=True, eq=False)
class Coreset:
    """A weighted sample ``(Q, u)`` together with how it was drawn.

    Draws are with replacement and duplicates stay as separate rows;
    ``compact()`` merges them.
    """

    set: WeightedPointSet
    source_indices: np.ndarray
    probabilities: np.ndarray
    eps: float | None
    delta: float | None
    seed: int
    requested_size: int

    def __len__(self) -> int:
        return len(self.set)

    @property
    def points(self) -> np.ndarray:
        return self.set.points

    @property
    def weights(self) -> np.ndarray:
        return self.set.weights

    def compact(self) -> "Coreset":
        """Sum the weights of repeated source indices (first-occurrence order)."""
        uniq, first, inverse = np.unique(self.source_indices, return_index=True, return_inverse=True)
        keep = np.sort(first)
        rank = np.empty_like(keep)
        rank[np.argsort(first)] = np.arange(keep.shape[0])
        weights = np.zeros(keep.shape[0])
        np.add.at(weights, rank[inverse], self.weights)
        ws = WeightedPointSet(self.points[keep], weights, dim=self.set.dim)
        return Coreset(ws, self.source_indices[keep], self.probabilities[keep],
                       self.eps, self.delta, self.seed, self.requested_size)


def coreset_size(t: float, d: int, eps: float, delta: float) -> int:
    """``ceil(10 t / eps^2 (d ln t + ln 1/delta))``."""
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    if not t > 1:
        raise ValueError(f"total sensitivity must exceed 1 for the size formula, got {t}")
    if int(d) < 1:
        raise ValueError("dimension must be a positive integer")
    return math.ceil(10.0 * t / eps**2 * (int(d) * math.log(t) + math.log(1.0 / delta)))


def _draw(probabilities: np.ndarray, size: int, seed: int) -> np.ndarray:
    """``size`` i.i.d. indices from a cumulative table and binary search."""
    cum = np.cumsum(probabilities)
    u = uniforms(seed, size) * cum[-1]
    idx = np.searchsorted(cum, u, side="right")
    # guard against u landing on the last edge through rounding
    return np.minimum(idx, probabilities.shape[0] - 1)


def _sample(P: WeightedPointSet, probabilities: np.ndarray, size: int, seed: int,
            eps=None, delta=None) -> Coreset:
    size = int(size)
    if size < 1:
        raise ValueError("coreset size must be at least 1")
    seed = check_seed(seed)
    idx = _draw(probabilities, size, seed)
    prob = probabilities[idx]
    weights = P.weights[idx] / (size * prob)
    ws = WeightedPointSet(P.points[idx], weights, dim=P.dim)
    return Coreset(ws, idx, prob, eps, delta, seed, size)


def build_coreset(P: WeightedPointSet, profile: SensitivityProfile, size: int, seed: int,
                  eps=None, delta=None) -> Coreset:
    """Draw ``size`` points with probability ``s(p)/t``; weight ``w(p)/(size * prob)``."""
    if len(profile) != len(P):
        raise ValueError("profile was computed for a different point set")
    if not profile.total > 0:
        raise ValueError("total sensitivity must be positive")
    return _sample(P, profile.probabilities, size, seed, eps, delta)


def uniform_sample(P: WeightedPointSet, size: int, seed: int) -> Coreset:
    n = len(P)
    if n == 0:
        raise ValueError("cannot sample from an empty set")
    return _sample(P, np.full(n, 1.0 / n), size, seed)


def monotonic_coreset(P: WeightedPointSet, spec: KernelSpec, eps: float, delta: float,
                      seed: int, size: int | None = None,
                      profile: SensitivityProfile | None = None) -> Coreset:
    """Sensitivity-sampled coreset of a unit-weight set.

    The sample size is ``min(m, n)`` where ``m`` comes from ``coreset_size``
    with the range-space dimension ``d + 1``.  An explicit ``size``
    replaces that formula.
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    if len(P) == 0:
        raise ValueError("cannot build a coreset of an empty set")
    if profile is None:
        profile = sensitivity_for(P, spec)
    if size is None:
        size = min(theorem_size(profile.total, P.dim, eps, delta), len(P))
    return build_coreset(P, profile, size, seed, eps, delta)


def theorem_size(t: float, dim: int, eps: float, delta: float) -> int:
    """Sample size for total sensitivity ``t`` in R^dim (range-space dimension dim + 1)."""
    return coreset_size(max(t, math.e), dim + 1, eps, delta)
