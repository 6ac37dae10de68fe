"""Merge-and-reduce over a sequence of batches.

Incoming points fill a leaf buffer of ``leaf_size`` points.  Each full leaf
becomes a level-0 bucket; two buckets on the same level are merged and,
when the union exceeds ``recompress_threshold``, reduced by resampling
before moving one level up (a binary counter).  The final output is one
more reduce over everything still held, skipped when every held bucket is
already a reduced sample and together they fit the final size.

Reduces of weighted buckets use ``weighted_sensitivity``, a cumulative-weight
rank heuristic with no proven guarantee.  ``eps_leaf`` is applied at every
reduce, so the compounded error over ``height`` levels is at most
``(1 + eps_leaf)^height - 1`` if every reduce succeeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import KernelSpec, WeightedPointSet
from .rng import check_seed, derive_seed
from .sampler import Coreset, build_coreset, monotonic_coreset, theorem_size
from .sensitivity import sensitivity_for, weighted_sensitivity


@dataclass(frozen=True)
class MergeTreeConfig:
    leaf_size: int
    eps_leaf: float
    delta_leaf: float
    recompress_threshold: int
    seed: int = 0
    coreset_size: Optional[int] = None

    def __post_init__(self):
        if self.leaf_size < 1:
            raise ValueError("leaf_size must be at least 1")
        if not (0 < self.eps_leaf < 1 and 0 < self.delta_leaf < 1):
            raise ValueError("eps_leaf and delta_leaf must lie in (0, 1)")
        if self.coreset_size is not None:
            if self.coreset_size < 1:
                raise ValueError("coreset_size must be positive")
            if self.recompress_threshold < 2 * self.coreset_size:
                raise ValueError("recompress_threshold must be at least twice coreset_size")
        elif self.recompress_threshold < 2:
            raise ValueError("recompress_threshold must be at least 2")
        check_seed(self.seed)

    @property
    def reduce_cap(self) -> int:
        """Largest output of a single reduce."""
        if self.coreset_size is not None:
            return self.coreset_size
        return self.recompress_threshold // 2


@dataclass
class _Bucket:
    points: np.ndarray
    weights: np.ndarray
    sources: np.ndarray
    unit: bool
    probabilities: Optional[np.ndarray] = None

    def __len__(self):
        return self.points.shape[0]

    def as_set(self) -> WeightedPointSet:
        return WeightedPointSet(self.points, self.weights, dim=self.points.shape[1])


def merge(a: WeightedPointSet, b: WeightedPointSet) -> WeightedPointSet:
    """Concatenate two weighted sets; total cost is additive over the union."""
    if a.dim != b.dim:
        raise ValueError(f"cannot merge sets of dimension {a.dim} and {b.dim}")
    return WeightedPointSet(
        np.concatenate([a.points, b.points]), np.concatenate([a.weights, b.weights]), dim=a.dim
    )


@dataclass
class StreamStats:
    leaves: int = 0
    reduces: int = 0
    height: int = 0
    peak_resident: int = 0
    input_points: int = 0
    reduce_levels: list = field(default_factory=list)

    def as_record(self, eps_leaf: float) -> dict:
        return {
            "leaves": self.leaves,
            "reduces": self.reduces,
            "height": self.height,
            "peak_resident": self.peak_resident,
            "input_points": self.input_points,
            "compounded_eps": (1.0 + eps_leaf) ** max(self.height, 1) - 1.0,
        }


class MergeReduceTree:
    """Stateful merge-and-reduce; feed batches with ``push`` then call ``finish``."""

    def __init__(self, spec: KernelSpec, config: MergeTreeConfig):
        self.spec = spec
        self.config = config
        self.levels: list = []
        self.stats = StreamStats()
        self._buffer: list = []
        self._buffered = 0
        self._dim: Optional[int] = None
        self._offset = 0
        self._reduce_counter = 0

    # -- bookkeeping ----------------------------------------------------
    def resident(self) -> int:
        return self._buffered + sum(len(b) for b in self.levels if b is not None)

    def _touch(self, extra: int = 0) -> None:
        self.stats.peak_resident = max(self.stats.peak_resident, self.resident() + extra)

    # -- reduce -----------------------------------------------------------
    def _reduce(self, bucket: _Bucket, level: int) -> _Bucket:
        cfg = self.config
        self._reduce_counter += 1
        seed = derive_seed(cfg.seed, 1, self._reduce_counter)
        core = self._coreset(bucket, seed, cfg.reduce_cap)
        self.stats.reduces += 1
        self.stats.reduce_levels.append(level)
        return _Bucket(core.points.copy(), core.weights.copy(), bucket.sources[core.source_indices], False,
                       core.probabilities.copy())

    def _coreset(self, bucket: _Bucket, seed: int, cap: Optional[int]) -> Coreset:
        cfg = self.config
        ws = bucket.as_set()
        if bucket.unit:
            size = None if cap is None else min(cap, len(ws))
            if size is not None:
                profile = sensitivity_for(ws, self.spec)
                size = min(size, theorem_size(profile.total, ws.dim, cfg.eps_leaf, cfg.delta_leaf))
                return monotonic_coreset(ws, self.spec, cfg.eps_leaf, cfg.delta_leaf, seed, size, profile)
            return monotonic_coreset(ws, self.spec, cfg.eps_leaf, cfg.delta_leaf, seed)
        profile = weighted_sensitivity(ws, self.spec)
        size = min(theorem_size(profile.total, ws.dim, cfg.eps_leaf, cfg.delta_leaf), len(ws))
        if cap is not None:
            size = min(size, cap)
        return build_coreset(ws, profile, size, seed, cfg.eps_leaf, cfg.delta_leaf)

    # -- tree ---------------------------------------------------------------
    def _insert(self, bucket: _Bucket, level: int) -> None:
        while True:
            while len(self.levels) <= level:
                self.levels.append(None)
            other = self.levels[level]
            if other is None:
                self.levels[level] = bucket
                self.stats.height = max(self.stats.height, level)
                self._touch()
                return
            self.levels[level] = None
            merged = _Bucket(
                np.concatenate([other.points, bucket.points]),
                np.concatenate([other.weights, bucket.weights]),
                np.concatenate([other.sources, bucket.sources]),
                other.unit and bucket.unit,
                None if other.unit or bucket.unit else np.concatenate([other.probabilities, bucket.probabilities]),
            )
            self._touch(len(merged))
            if len(merged) > self.config.recompress_threshold:
                merged = self._reduce(merged, level + 1)
            bucket = merged
            level += 1

    def _emit_leaf(self, points: np.ndarray) -> None:
        n = points.shape[0]
        sources = np.arange(self._offset, self._offset + n)
        self._offset += n
        leaf = _Bucket(points, np.ones(n), sources, True)
        self.stats.leaves += 1
        self._touch(n)
        if n > self.config.recompress_threshold:
            leaf = self._reduce(leaf, 0)
        self._insert(leaf, 0)

    def push(self, batch: WeightedPointSet) -> None:
        if not batch.is_unit_weight:
            raise ValueError("stream input batches must be unit-weight")
        if self._dim is None:
            self._dim = batch.dim
        elif batch.dim != self._dim:
            raise ValueError(f"batch dimension {batch.dim} differs from stream dimension {self._dim}")
        self.stats.input_points += len(batch)
        pts = batch.points
        start = 0
        leaf = self.config.leaf_size
        while start < pts.shape[0]:
            take = min(leaf - self._buffered, pts.shape[0] - start)
            self._buffer.append(pts[start:start + take])
            self._buffered += take
            start += take
            self._touch()
            if self._buffered == leaf:
                block = np.concatenate(self._buffer)
                self._buffer, self._buffered = [], 0
                self._emit_leaf(block)

    def finish(self) -> Coreset:
        """Emit the partial leaf, then reduce the union of all buckets into the final coreset."""
        if self._dim is None or self.stats.input_points == 0:
            raise ValueError("stream is empty")
        if self._buffered:
            block = np.concatenate(self._buffer)
            self._buffer, self._buffered = [], 0
            self._emit_leaf(block)
        parts = [b for b in reversed(self.levels) if b is not None]
        union = _Bucket(
            np.concatenate([b.points for b in parts]),
            np.concatenate([b.weights for b in parts]),
            np.concatenate([b.sources for b in parts]),
            all(b.unit for b in parts),
        )
        cap = self.config.reduce_cap
        if not any(b.unit for b in parts) and len(union) <= cap:
            # already a reduced sample within the final size: resampling would only add variance
            ws = union.as_set()
            probs = np.concatenate([b.probabilities for b in parts])
            return Coreset(ws, union.sources, probs, self.config.eps_leaf, self.config.delta_leaf,
                           self.config.seed, len(union))
        core = self._coreset(union, self.config.seed, self.config.coreset_size)
        self.stats.reduces += 1
        self.stats.reduce_levels.append(self.stats.height + 1)
        return Coreset(core.set, union.sources[core.source_indices], core.probabilities,
                       self.config.eps_leaf, self.config.delta_leaf, self.config.seed, core.requested_size)


def stream_coreset(batches: Iterable[WeightedPointSet], spec: KernelSpec, config: MergeTreeConfig,
                   return_stats: bool = False):
    """Coreset of the concatenated batches through a merge-and-reduce tree.

    With ``return_stats`` also returns the tree statistics (height, peak
    resident points, reduce count).
    """
    tree = MergeReduceTree(spec, config)
    for batch in batches:
        tree.push(batch)
    core = tree.finish()
    if return_stats:
        return core, tree.stats
    return core
