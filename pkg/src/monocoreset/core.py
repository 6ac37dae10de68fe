"""Weighted point sets, monotonic kernel specs, and the regularized total cost.

The cost of a point ``p`` for a query ``x`` is ``f(p . x) + |x|^2 / k`` where
``f`` is one of three bounded or softly growing monotone links.  Sums over a
point set run in input order through ``math.fsum`` so totals are bit-stable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

# relative slack when checking logistic queries against the ball |x| <= R
BALL_TOL = 1e-12

ArrayLike = Union[np.ndarray, list, tuple]


class KernelKind(str, enum.Enum):
    SIGMOID = "sigmoid"
    LOGISTIC = "logistic"
    SIGMOID_SQUARED = "sigmoid2"


# ---------------------------------------------------------------------------
# numerically stable links
# ---------------------------------------------------------------------------

def sigmoid(z):
    """Logistic sigmoid, evaluated branch-wise so no exponent is positive."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softplus(z):
    """``log(1 + e^z)`` as ``max(z, 0) + log1p(e^-|z|)``."""
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _scalar(v: np.ndarray) -> float:
    return float(v.reshape(-1)[0])


@dataclass(frozen=True)
class KernelSpec:
    """Monotone link plus the ``|x|^2 / k`` regularizer.

    ``k`` may be ``math.inf`` to drop the regularizer.  ``query_radius`` is
    the radius R of the admissible query ball; logistic kernels need it
    because their link is unbounded.
    """

    kind: KernelKind
    k: float
    query_radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        k = float(self.k)
        if not k > 0:
            raise ValueError(f"regularization constant k must be positive, got {self.k}")
        object.__setattr__(self, "k", k)
        if self.query_radius is not None:
            r = float(self.query_radius)
            if not (r > 0 and math.isfinite(r)):
                raise ValueError(f"query radius must be positive and finite, got {self.query_radius}")
            object.__setattr__(self, "query_radius", r)
        if self.kind is KernelKind.LOGISTIC and self.query_radius is None:
            raise ValueError("logistic kernel requires a finite query radius R")

    @property
    def bound(self) -> float:
        """Upper bound M of the link over the admissible queries (unit-ball points)."""
        if self.kind is KernelKind.LOGISTIC:
            return _scalar(softplus(self.query_radius))
        return 1.0

    @property
    def link_at_zero(self) -> float:
        if self.kind is KernelKind.SIGMOID:
            return 0.5
        if self.kind is KernelKind.SIGMOID_SQUARED:
            return 0.25
        return math.log(2.0)

    def link(self, z):
        if self.kind is KernelKind.SIGMOID:
            return sigmoid(z)
        if self.kind is KernelKind.SIGMOID_SQUARED:
            return sigmoid(z) ** 2
        return softplus(z)

    def link_derivative(self, z):
        s = sigmoid(z)
        if self.kind is KernelKind.SIGMOID:
            return s * (1.0 - s)
        if self.kind is KernelKind.SIGMOID_SQUARED:
            return 2.0 * s * s * (1.0 - s)
        return s

    def regularizer(self, sq_norm):
        return np.asarray(sq_norm, dtype=np.float64) / self.k

    def check_query(self, x: np.ndarray) -> None:
        if not np.all(np.isfinite(x)):
            raise ValueError("query has non-finite coordinates")
        if self.kind is KernelKind.LOGISTIC:
            norm = float(np.linalg.norm(x))
            if norm > self.query_radius * (1.0 + BALL_TOL):
                raise ValueError(
                    f"logistic query norm {norm:.6g} exceeds query radius {self.query_radius:.6g}"
                )


# ---------------------------------------------------------------------------
# weighted sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """Points in R^dim with one strictly positive weight each.

    ``weights=None`` means unit weights.  Arrays are copied and frozen.
    """

    points: np.ndarray
    weights: Optional[np.ndarray] = None
    dim: Optional[int] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1 and pts.size == 0:
            if self.dim is None:
                raise ValueError("an empty point set needs an explicit dim")
            pts = pts.reshape(0, int(self.dim))
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {pts.shape}")
        dim = pts.shape[1] if self.dim is None else int(self.dim)
        if dim < 1 or pts.shape[1] != dim:
            raise ValueError(f"points have {pts.shape[1]} coordinates, expected dim={dim}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must have finite coordinates")
        if self.weights is None:
            w = np.ones(pts.shape[0])
        else:
            w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "dim", dim)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights.tolist())

    @property
    def is_unit_weight(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def subset(self, indices) -> "WeightedPointSet":
        idx = np.asarray(indices, dtype=np.intp)
        return WeightedPointSet(self.points[idx], self.weights[idx], dim=self.dim)

    def with_weights(self, weights) -> "WeightedPointSet":
        return WeightedPointSet(self.points, weights, dim=self.dim)


def _as_query(x: ArrayLike, dim: int) -> np.ndarray:
    q = np.asarray(x, dtype=np.float64).reshape(-1)
    if q.shape[0] != dim:
        raise ValueError(f"query has {q.shape[0]} coordinates, expected {dim}")
    return q


# ---------------------------------------------------------------------------
# cost evaluation
# ---------------------------------------------------------------------------

def link_eval(spec: KernelSpec, z: float) -> float:
    if not math.isfinite(z):
        raise ValueError("link argument must be finite")
    return _scalar(spec.link(np.array([z])))


def cost(spec: KernelSpec, p: ArrayLike, x: ArrayLike) -> float:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = _as_query(x, p.shape[0])
    spec.check_query(q)
    z = float(np.dot(p, q))
    return link_eval(spec, z) + float(spec.regularizer(np.dot(q, q)))


def point_costs(P: WeightedPointSet, spec: KernelSpec, x: ArrayLike) -> np.ndarray:
    """Unweighted per-point costs ``c(p, x)`` in input order."""
    q = _as_query(x, P.dim)
    spec.check_query(q)
    return spec.link(P.points @ q) + spec.regularizer(q @ q)


def total_cost(P: WeightedPointSet, spec: KernelSpec, x: ArrayLike) -> float:
    """``sum_p w(p) c(p, x)``; 0 for an empty set."""
    terms = P.weights * point_costs(P, spec, x)
    return math.fsum(terms.tolist())


def total_costs(P: WeightedPointSet, spec: KernelSpec, X: ArrayLike) -> np.ndarray:
    """Total cost for each row of the query matrix ``X`` (vectorized, plain summation)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != P.dim:
        raise ValueError(f"queries have {X.shape[1]} coordinates, expected {P.dim}")
    if spec.kind is KernelKind.LOGISTIC:
        if np.any(np.linalg.norm(X, axis=1) > spec.query_radius * (1.0 + BALL_TOL)):
            raise ValueError("logistic query outside the ball of radius R")
    reg = spec.regularizer(np.einsum("ij,ij->i", X, X))
    return spec.link(X @ P.points.T) @ P.weights + P.weights.sum() * reg


def total_cost_gradient(P: WeightedPointSet, spec: KernelSpec, x: ArrayLike) -> np.ndarray:
    q = _as_query(x, P.dim)
    spec.check_query(q)
    slopes = spec.link_derivative(P.points @ q) * P.weights
    return P.points.T @ slopes + 2.0 * P.total_weight * q / spec.k
