"""Sensitivity upper bounds by sorted-norm rank, and an empirical estimator.

All closed-form bounds share one shape: sort points by Euclidean norm, and
give the point at (1-indexed) rank ``j`` the bound ``(M / f(0)) (b_j + 1) / j``
where ``b_j`` is a per-point certificate for the ratio
``(f(|p| z) + z^2/k) / (f(-|p| z) + z^2/k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KernelKind, KernelSpec, WeightedPointSet, softplus
from .rng import generator

LN2 = math.log(2.0)
SIGMOID_B_FACTOR = 66.0


@dataclass(frozen=True, eq=False)
class SensitivityProfile:
    """Per-point sensitivity bounds.

    ``bounds[i]`` belongs to input point ``i``; ``order`` lists input indices
    by non-decreasing norm, so the point at rank ``j`` (1-indexed) is
    ``order[j - 1]``.
    """

    bounds: np.ndarray
    total: float
    order: np.ndarray
    spec: KernelSpec | None = None

    @property
    def probabilities(self) -> np.ndarray:
        return self.bounds / self.total

    @property
    def sorted_bounds(self) -> np.ndarray:
        return self.bounds[self.order]

    def __len__(self) -> int:
        return self.bounds.shape[0]


def sort_by_norm(P: WeightedPointSet) -> np.ndarray:
    """Stable argsort of the points by Euclidean norm (ties keep input order)."""
    return np.argsort(P.norms, kind="stable")


def _profile(per_rank: np.ndarray, order: np.ndarray, spec) -> SensitivityProfile:
    bounds = np.empty_like(per_rank)
    bounds[order] = per_rank
    bounds.setflags(write=False)
    order = order.copy()
    order.setflags(write=False)
    return SensitivityProfile(bounds, math.fsum(per_rank.tolist()), order, spec)


def generic_sensitivity(P: WeightedPointSet, M: float, f0: float, b, spec=None) -> SensitivityProfile:
    """Rank bounds ``(M/f0)(b_j + 1)/j`` from a per-point certificate ``b``.

    ``b`` is given in input order and must be non-decreasing along the
    norm order, since the rank argument compares each point only with
    shorter ones.
    """
    if not (M > 0 and f0 > 0):
        raise ValueError("M and f0 must be positive")
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.shape[0] != len(P):
        raise ValueError(f"{len(P)} points but {b.shape[0]} certificate values")
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise ValueError("certificates b must be finite and non-negative")
    order = sort_by_norm(P)
    b_sorted = b[order]
    if np.any(np.diff(b_sorted) < 0):
        bad = int(np.argmax(np.diff(b_sorted) < 0))
        raise ValueError(
            f"certificate b decreases along the norm order at rank {bad + 2}; "
            "the rank bound needs b non-decreasing in |p|"
        )
    ranks = np.arange(1, len(P) + 1, dtype=np.float64)
    per_rank = (M / f0) * (b_sorted + 1.0) / ranks
    return _profile(per_rank, order, spec)


def _require_unit(P: WeightedPointSet) -> None:
    if not P.is_unit_weight:
        raise ValueError(
            "closed-form sensitivity bounds are stated for unit weights; "
            "use weighted_sensitivity for weighted sets"
        )


def sigmoid_certificate(norms, k: float) -> np.ndarray:
    return SIGMOID_B_FACTOR * math.sqrt(k) * np.asarray(norms, dtype=np.float64)


def logistic_certificate(norms, k: float, R: float) -> np.ndarray:
    norms = np.asarray(norms, dtype=np.float64)
    # log(2 e^{|p| R}) expanded so it cannot overflow
    return 3.0 * (LN2 + norms * R) / LN2 * math.sqrt(k) * norms


def sigmoid_sensitivity(P: WeightedPointSet, k: float) -> SensitivityProfile:
    """Bounds ``(132 sqrt(k) |p_j| + 2) / j`` for a unit-weight set."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    _require_unit(P)
    spec = KernelSpec(KernelKind.SIGMOID, k)
    return generic_sensitivity(P, 1.0, 0.5, sigmoid_certificate(P.norms, k), spec)


def logistic_sensitivity(P: WeightedPointSet, k: float, R: float) -> SensitivityProfile:
    """Bounds ``log(1+e^R)(b_j + 1)/(j log 2)`` with the logistic certificate."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    _require_unit(P)
    spec = KernelSpec(KernelKind.LOGISTIC, k, R)
    M = float(softplus(R))
    return generic_sensitivity(P, M, LN2, logistic_certificate(P.norms, k, R), spec)


def sigmoid_squared_certificate(norms, k: float) -> np.ndarray:
    return 168.0 * math.sqrt(k) * np.asarray(norms, dtype=np.float64)


def _certificate(spec: KernelSpec, norms: np.ndarray) -> np.ndarray:
    if spec.kind is KernelKind.SIGMOID:
        return sigmoid_certificate(norms, spec.k)
    if spec.kind is KernelKind.SIGMOID_SQUARED:
        return sigmoid_squared_certificate(norms, spec.k)
    return logistic_certificate(norms, spec.k, spec.query_radius)


def sensitivity_for(P: WeightedPointSet, spec: KernelSpec) -> SensitivityProfile:
    """Closed-form profile for the kernel of ``spec`` (unit weights)."""
    if spec.kind is KernelKind.SIGMOID:
        return sigmoid_sensitivity(P, spec.k)
    if spec.kind is KernelKind.LOGISTIC:
        return logistic_sensitivity(P, spec.k, spec.query_radius)
    _require_unit(P)
    b = sigmoid_squared_certificate(P.norms, spec.k)
    return generic_sensitivity(P, spec.bound, spec.link_at_zero, b, spec)


def weighted_sensitivity(P: WeightedPointSet, spec: KernelSpec) -> SensitivityProfile:
    """Rank bounds for a weighted set: ``w_j (M/f0)(b_j + 1) / W_j``.

    ``W_j`` is the cumulative weight of the ``j`` shortest points.  With
    unit weights ``W_j = j`` and this equals ``sensitivity_for``.  Not covered
    by the unit-weight theorems; used for merge-and-reduce recompression.
    """
    order = sort_by_norm(P)
    norms = P.norms[order]
    b = _certificate(spec, norms)
    if np.any(np.diff(b) < 0):
        raise ValueError("certificate b must be non-decreasing along the norm order")
    w = P.weights[order]
    cum = np.cumsum(w)
    per_rank = w * (spec.bound / spec.link_at_zero) * (b + 1.0) / cum
    return _profile(per_rank, order, spec)


# ---------------------------------------------------------------------------
# empirical estimate of sup_x w(p) c(p, x) / C(P, w, x)
# ---------------------------------------------------------------------------

DEFAULT_DIRECTIONS = 64
DEFAULT_RADII = 24
DEFAULT_ASCENT_STEPS = 50


def _query_radii(spec: KernelSpec, count: int) -> np.ndarray:
    hi = 1e3
    if spec.kind is KernelKind.LOGISTIC:
        hi = min(hi, spec.query_radius)
    lo = min(1e-2, hi / 10.0)
    return np.geomspace(lo, hi, count)


def _ratios(P: WeightedPointSet, spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    """Matrix of ``w_i c(p_i, x) / C(x)`` for every query row and point column."""
    c = spec.link(X @ P.points.T) + spec.regularizer(np.einsum("ij,ij->i", X, X))[:, None]
    wc = c * P.weights
    return wc / wc.sum(axis=1, keepdims=True)


def _project(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    if spec.kind is not KernelKind.LOGISTIC:
        return X
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    scale = np.minimum(1.0, spec.query_radius / np.maximum(norms, 1e-300))
    return X * scale


def _log_ratio_grad(P: WeightedPointSet, spec: KernelSpec, X: np.ndarray, idx: np.ndarray):
    """Value and gradient of ``log(w_i c_i / C)`` for query row ``r`` paired with point ``idx[r]``."""
    Z = X @ P.points.T
    sq = np.einsum("ij,ij->i", X, X)
    c = spec.link(Z) + spec.regularizer(sq)[:, None]
    wc = c * P.weights
    C = wc.sum(axis=1)
    rows = np.arange(X.shape[0])
    ci = c[rows, idx]
    fp = spec.link_derivative(Z) * P.weights
    grad_C = fp @ P.points + (2.0 * P.weights.sum() / spec.k) * X
    grad_ci = spec.link_derivative(Z[rows, idx])[:, None] * P.points[idx] + (2.0 / spec.k) * X
    value = wc[rows, idx] / C
    with np.errstate(divide="ignore", invalid="ignore"):
        grad = grad_ci / ci[:, None] - grad_C / C[:, None]
    grad[~np.isfinite(grad)] = 0.0
    return value, grad


def _ascend(P: WeightedPointSet, spec: KernelSpec, X: np.ndarray, idx: np.ndarray, steps: int):
    """Gradient ascent on the log-ratio with per-row step control; never decreases a row."""
    X = _project(spec, X.copy())
    value, grad = _log_ratio_grad(P, spec, X, idx)
    step = 0.1 * np.maximum(np.linalg.norm(X, axis=1), 1e-2)
    for _ in range(steps):
        gnorm = np.linalg.norm(grad, axis=1)
        active = gnorm > 0
        if not np.any(active):
            break
        direction = np.zeros_like(grad)
        direction[active] = grad[active] / gnorm[active, None]
        trial = _project(spec, X + step[:, None] * direction)
        t_value, t_grad = _log_ratio_grad(P, spec, trial, idx)
        better = t_value > value
        X[better] = trial[better]
        value[better] = t_value[better]
        grad[better] = t_grad[better]
        step = np.where(better, step * 2.0, step * 0.5)
    return value


def empirical_sensitivities(
    P: WeightedPointSet,
    spec: KernelSpec,
    budget: int = 10_000,
    *,
    seed: int = 0,
    directions: int = DEFAULT_DIRECTIONS,
    radii: int = DEFAULT_RADII,
    ascent_steps: int = DEFAULT_ASCENT_STEPS,
) -> np.ndarray:
    """Lower estimates of every point's sensitivity.

    Queries come in blocks of ``directions`` random unit vectors times a
    log-spaced radius grid; ``budget`` is rounded up to whole blocks.  After
    each block the best query of every point is refined by gradient ascent.
    Blocks are drawn from one seeded stream, so a larger budget evaluates a
    superset of queries and the estimate never decreases.
    """
    n = len(P)
    if n == 0:
        raise ValueError("empirical sensitivity needs a non-empty set")
    if n == 1:
        return np.ones(1)
    grid = _query_radii(spec, radii)
    block = directions * grid.shape[0]
    blocks = max(1, math.ceil(budget / block))
    rng = generator(seed)
    best = _ratios(P, spec, np.zeros((1, P.dim)))[0]
    idx = np.arange(n)
    for _ in range(blocks):
        u = rng.standard_normal((directions, P.dim))
        u /= np.maximum(np.linalg.norm(u, axis=1, keepdims=True), 1e-300)
        X = (grid[:, None, None] * u[None, :, :]).reshape(-1, P.dim)
        ratios = _ratios(P, spec, X)
        top = np.argmax(ratios, axis=0)
        best = np.maximum(best, ratios[top, idx])
        if ascent_steps > 0:
            refined = _ascend(P, spec, X[top], idx, ascent_steps)
            best = np.maximum(best, refined)
    return np.minimum(best, 1.0)


def empirical_sensitivity(P: WeightedPointSet, spec: KernelSpec, index: int, budget: int = 10_000, **kw) -> float:
    """Lower estimate of ``sup_x w(p) c(p, x) / C(P, w, x)`` for one point."""
    if not 0 <= index < len(P):
        raise IndexError(f"point index {index} out of range for {len(P)} points")
    return float(empirical_sensitivities(P, spec, budget, **kw)[index])
