"""Numeric checks of the kernel ratio bounds and the lower-bound construction.

Everything here evaluates inequalities on explicit grids or explicit
witnesses; nothing is estimated by optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import KernelKind, KernelSpec, WeightedPointSet, sigmoid, softplus

LN2 = math.log(2.0)
RESIDUAL_TOL = 1e-12

Link = Callable[[np.ndarray], np.ndarray]

# ratio constants from the per-kernel lemmas, as multiples of c sqrt(k)
RATIO_CONSTANT = {KernelKind.SIGMOID: 66.0, KernelKind.SIGMOID_SQUARED: 168.0}
# loose bounds on max{2, 2/x11^2} and the x11 lower bracket used to obtain them
SIMPLE_RATIO_CONSTANT = {KernelKind.SIGMOID: 11.0, KernelKind.SIGMOID_SQUARED: 14.0, KernelKind.LOGISTIC: 11.0}
X11_LOWER = {
    KernelKind.SIGMOID: math.sqrt(math.log(1.2)),
    KernelKind.SIGMOID_SQUARED: math.sqrt(math.log(1.15)),
    KernelKind.LOGISTIC: math.sqrt(math.log(1.2)),
}


def link_of(kind: Union[KernelKind, str]) -> Link:
    kind = KernelKind(kind)
    if kind is KernelKind.SIGMOID:
        return sigmoid
    if kind is KernelKind.SIGMOID_SQUARED:
        return lambda z: sigmoid(z) ** 2
    return softplus


def _call(f: Link, x: float) -> float:
    return float(np.asarray(f(np.array([x], dtype=np.float64))).reshape(-1)[0])


# ---------------------------------------------------------------------------
# intersection of f(-c sqrt(k) x) with x^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntersectionResult:
    x_kc: float
    residual: float
    bracket: tuple
    iterations: int = 0


def find_intersection(f: Union[Link, KernelKind, str], c: float = 1.0, k: float = 1.0,
                      tol: float = RESIDUAL_TOL) -> IntersectionResult:
    """Unique positive root of ``h(x) = f(-c sqrt(k) x) - x^2`` by bisection.

    ``h(0) = f(0) > 0`` and ``h(sqrt(f(0) + 1)) < 0`` bracket the root; ``h``
    is strictly decreasing so the root is unique.
    """
    if not callable(f):
        f = link_of(f)
    if not (c > 0 and k > 0):
        raise ValueError("c and k must be positive")
    a = c * math.sqrt(k)

    def h(x: float) -> float:
        return _call(f, -a * x) - x * x

    f0 = _call(f, 0.0)
    lo, hi = 0.0, math.sqrt(f0 + 1.0)
    h_lo, h_hi = h(lo), h(hi)
    if not (h_lo > 0 > h_hi):
        raise ValueError(f"bracket does not straddle a root: h(0)={h_lo}, h({hi})={h_hi}")
    bracket = (lo, hi)
    it = 0
    mid, h_mid = lo, h_lo
    while it < 2000:
        mid = 0.5 * (lo + hi)
        h_mid = h(mid)
        it += 1
        if abs(h_mid) <= tol or mid in (lo, hi):
            break
        if h_mid > 0:
            lo = mid
        else:
            hi = mid
    return IntersectionResult(mid, h_mid, bracket, it)


def intersection_k0(f: Union[Link, KernelKind, str], c: float) -> float:
    """Smallest k with ``f(-1) >= 1/(c^2 k)``; beyond it ``x_kc >= 1/(c sqrt(k))``."""
    if not callable(f):
        f = link_of(f)
    return 1.0 / (c * c * _call(f, -1.0))


def intersection_sign_pattern(f: Union[Link, KernelKind, str], c: float, k: float,
                              x_kc: float, grid: np.ndarray) -> bool:
    """``h > 0`` left of the root and ``h < 0`` right of it on every grid point."""
    if not callable(f):
        f = link_of(f)
    grid = np.asarray(grid, dtype=np.float64)
    h = np.asarray(f(-c * math.sqrt(k) * grid)) - grid**2
    left = grid < x_kc
    right = grid > x_kc
    return bool(np.all(h[left] > 0) and np.all(h[right] < 0))


# ---------------------------------------------------------------------------
# ratio sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioSweepReport:
    sup_ratio: float
    argmax_x: float
    bound: float
    margin: float
    grid: str
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.margin > 0

    def as_record(self) -> dict:
        return {
            "sup_ratio": self.sup_ratio,
            "argmax_x": self.argmax_x,
            "bound": self.bound,
            "margin": self.margin,
            "passed": self.passed,
            "grid": self.grid,
            **self.params,
        }


def sweep_grid(hi: float = 1e3, lo: float = 1e-6, count: int = 100_000) -> np.ndarray:
    """``count`` log-spaced points on ``[lo, hi]`` plus zero."""
    return np.concatenate(([0.0], np.geomspace(lo, hi, count)))


def _report(ratio: np.ndarray, grid: np.ndarray, bound: float, label: str, params: dict) -> RatioSweepReport:
    i = int(np.argmax(ratio))
    sup = float(ratio[i])
    return RatioSweepReport(sup, float(grid[i]), float(bound), float(bound - sup), label, params)


def ratio_simple_sweep(f: Union[Link, KernelKind, str], x11: Optional[float] = None,
                       grid: Optional[np.ndarray] = None) -> RatioSweepReport:
    """Sweep ``(f(x) + x^2) / (f(-x) + x^2)`` against ``max{2, 2/x11^2}``."""
    link = f if callable(f) else link_of(f)
    if x11 is None:
        x11 = find_intersection(link, 1.0, 1.0).x_kc
    if grid is None:
        grid = sweep_grid()
    grid = np.asarray(grid, dtype=np.float64)
    sq = grid**2
    ratio = (link(grid) + sq) / (link(-grid) + sq)
    bound = max(2.0, 2.0 / x11**2)
    label = f"{grid.shape[0]} points on [{grid.min():g}, {grid.max():g}]"
    return _report(ratio, grid, bound, label, {"x11": x11})


def regularized_ratio_bound(kind: Union[KernelKind, str], c: float, k: float, R: Optional[float] = None) -> float:
    kind = KernelKind(kind)
    if kind is KernelKind.LOGISTIC:
        if R is None:
            raise ValueError("logistic bound needs R")
        return 3.0 * (LN2 + c * R) / LN2 * math.sqrt(k) * c
    return RATIO_CONSTANT[kind] * c * math.sqrt(k)


def regularized_ratio_sweep(kind: Union[KernelKind, str], c: float, k: float, R: Optional[float] = None,
                            count: int = 100_000) -> RatioSweepReport:
    """Sweep ``(f(cx) + x^2/k) / (f(-cx) + x^2/k)`` against the kernel's bound.

    Sigmoid kinds sweep ``x`` over ``[0, 1e3]``; logistic sweeps ``[0, R]``.
    """
    kind = KernelKind(kind)
    f = link_of(kind)
    hi = R if kind is KernelKind.LOGISTIC else 1e3
    if kind is KernelKind.LOGISTIC and R is None:
        raise ValueError("logistic sweep needs R")
    grid = sweep_grid(hi=hi, lo=min(1e-6, hi * 1e-9), count=count)
    reg = grid**2 / k
    ratio = (f(c * grid) + reg) / (f(-c * grid) + reg)
    bound = regularized_ratio_bound(kind, c, k, R)
    label = f"log grid {count} points on [{grid[1]:g}, {hi:g}] plus 0"
    params = {"kind": kind.value, "c": c, "k": k, "R": R}
    return _report(ratio, grid, bound, label, params)


DEFAULT_CS = (0.1, 1.0, 10.0)
DEFAULT_KS = (1e2, 1e4)
DEFAULT_RS = (1.0, 4.0)


def bound_matrix(cs=DEFAULT_CS, ks=DEFAULT_KS, Rs=DEFAULT_RS, count: int = 100_000) -> list:
    """Every regularized ratio sweep in the default matrix (cells with ``k < 1/c^2`` skipped)."""
    reports = []
    for kind in (KernelKind.SIGMOID, KernelKind.SIGMOID_SQUARED, KernelKind.LOGISTIC):
        for c in cs:
            for k in ks:
                if k < 1.0 / c**2:
                    continue
                for R in (Rs if kind is KernelKind.LOGISTIC else (None,)):
                    reports.append(regularized_ratio_sweep(kind, c, k, R, count))
    return reports


# ---------------------------------------------------------------------------
# lower-bound construction
# ---------------------------------------------------------------------------

WITNESS_TOL = 1e-6


def build_separable_set(n: int, d: int, R: float):
    """``n`` points whose every member is linearly separable from the rest.

    Points are the vertices of a regular n-gon in the first two coordinates
    with the last coordinate set to 1.  For vertex ``p`` the witness is
    ``y = -a (cos t_p, sin t_p, 0, ..., 0) + (a - R) e_last`` with
    ``a = R / sin^2(pi/n)``, giving ``y . p = -R`` and ``y . q >= R``.
    Returns ``(WeightedPointSet, witnesses)`` with witnesses as rows.
    """
    n, d = int(n), int(d)
    if n < 3:
        raise ValueError("need n >= 3")
    if d < 3:
        raise ValueError("the lifted polygon needs d >= 3 (two polygon coordinates plus the lift)")
    if not R >= 0:
        raise ValueError("R must be non-negative")
    theta = 2.0 * math.pi * np.arange(n) / n
    pts = np.zeros((n, d))
    pts[:, 0] = np.cos(theta)
    pts[:, 1] = np.sin(theta)
    pts[:, -1] = 1.0
    # 1 - cos(2 pi / n) = 2 sin^2(pi / n)
    gap = 2.0 * math.sin(math.pi / n) ** 2
    if gap < 1e-9:
        raise ValueError(f"n={n} is too large: angular margin {gap:.3g} underflows")
    a = 2.0 * R / gap
    Y = np.zeros((n, d))
    Y[:, 0] = -a * np.cos(theta)
    Y[:, 1] = -a * np.sin(theta)
    Y[:, -1] = a - R
    ok, worst = check_witnesses(pts, Y, R)
    if not ok:
        raise ValueError(f"witness margins fail by {worst:.3g} for n={n}, R={R}")
    return WeightedPointSet(pts), Y


def witness_margins(points: np.ndarray, witnesses: np.ndarray, R: float):
    """Per point: ``|y_p . p + R|`` and ``min_q (y_p . q) - R`` over the other points."""
    G = witnesses @ points.T
    n = G.shape[0]
    own = np.diag(G)
    others = G + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
    return np.abs(own + R), others.min(axis=1) - R


def check_witnesses(points: np.ndarray, witnesses: np.ndarray, R: float, tol: float = WITNESS_TOL):
    scale = max(1.0, float(np.abs(witnesses).max()) if witnesses.size else 1.0)
    own_err, slack = witness_margins(points, witnesses, R)
    worst = max(float(own_err.max() / scale), float(-slack.min() / scale))
    return worst <= tol, worst


def witness_sensitivities(P: WeightedPointSet, spec: KernelSpec, witnesses: np.ndarray) -> np.ndarray:
    """``w(p) c(p, x_p) / C(P, w, x_p)`` at ``x_p = -y_p`` for every point."""
    X = -np.asarray(witnesses, dtype=np.float64)
    c = spec.link(X @ P.points.T) + spec.regularizer(np.einsum("ij,ij->i", X, X))[:, None]
    wc = c * P.weights
    return np.diag(wc) / wc.sum(axis=1)


def separation_floor(spec: KernelSpec, n: int, R: float, w_ratio: float = 1.0) -> float:
    """``1 / (1 + (n-1) w_ratio f(-R)/f(R))``, the guaranteed witness ratio."""
    f = link_of(spec.kind)
    return 1.0 / (1.0 + (n - 1) * w_ratio * _call(f, -R) / _call(f, R))


def lower_bound_demo(n: int = 10, d: int = 3, radii=(1.0, 10.0, 1e2, 1e4, 1e6),
                     kind: Union[KernelKind, str] = KernelKind.SIGMOID,
                     weights: Optional[np.ndarray] = None) -> list:
    """Minimum witness sensitivity of the separable set for each R.

    Uses the unregularized cost (``k = inf``).  Returns rows of
    ``{"R", "min_sensitivity", "floor"}``.
    """
    kind = KernelKind(kind)
    rows = []
    for R in radii:
        R = float(R)
        P, Y = build_separable_set(n, d, R)
        if weights is not None:
            P = P.with_weights(weights)
        radius = max(float(np.linalg.norm(Y, axis=1).max()), 1.0) if kind is KernelKind.LOGISTIC else None
        spec = KernelSpec(kind, math.inf, radius)
        s = witness_sensitivities(P, spec, Y)
        w = P.weights
        floors = [separation_floor(spec, n, R, float(w.max() / wi)) for wi in w]
        rows.append({"R": R, "min_sensitivity": float(s.min()), "floor": float(min(floors))})
    return rows


def saturation_ratio(kind: Union[KernelKind, str], x: float) -> float:
    """``f(-x) / f(x)``; tends to 0 for all three links."""
    f = link_of(kind)
    return _call(f, -x) / _call(f, x)
