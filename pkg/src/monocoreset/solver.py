"""Limited-memory BFGS on the regularized total cost."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import KernelKind, KernelSpec, WeightedPointSet, total_cost, total_cost_gradient
from .rng import derive_seed, generator, unit_ball

HISTORY = 10
ARMIJO_C = 1e-4
MIN_STEP = 1e-12
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
MAX_BACKTRACKS = 60
RESOLUTION = 16 * np.finfo(np.float64).eps


class NonFiniteCostError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolveResult:
    x_star: np.ndarray
    value: float
    iterations: int
    gradient_norm: float
    converged: bool


def _project(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    if spec.kind is not KernelKind.LOGISTIC:
        return x
    norm = float(np.linalg.norm(x))
    R = spec.query_radius
    if norm <= R:
        return x
    return x * (R / norm)


def _stationarity(spec: KernelSpec, x: np.ndarray, g: np.ndarray) -> float:
    """Gradient norm, or the projected-gradient step length on the logistic ball."""
    if spec.kind is not KernelKind.LOGISTIC:
        return float(np.linalg.norm(g))
    return float(np.linalg.norm(x - _project(spec, x - g)))


def _two_loop(g: np.ndarray, s_hist: list, y_hist: list) -> np.ndarray:
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        q -= a * y
        alphas.append((rho, a))
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), (rho, a) in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def minimize(P: WeightedPointSet, spec: KernelSpec, init=None, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER) -> SolveResult:
    """Minimize ``C(P, w, x)`` over x from ``init`` (origin by default).

    L-BFGS direction, Armijo backtracking by halving.  For logistic kernels
    every iterate is projected onto the ball of radius R.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.zeros(P.dim) if init is None else np.array(init, dtype=np.float64).reshape(-1)
    if x.shape[0] != P.dim:
        raise ValueError(f"initial point has {x.shape[0]} coordinates, expected {P.dim}")
    x = _project(spec, x)

    def evaluate(z):
        f = total_cost(P, spec, z)
        g = total_cost_gradient(P, spec, z)
        if not (math.isfinite(f) and np.all(np.isfinite(g))):
            raise NonFiniteCostError(f"non-finite cost {f!r} at x={z.tolist()}")
        return f, g

    f, g = evaluate(x)
    s_hist: list = []
    y_hist: list = []
    it = 0
    converged = _stationarity(spec, x, g) <= tol
    while not converged and it < max_iter:
        d = _two_loop(g, s_hist, y_hist)
        if not float(g @ d) < 0:
            s_hist.clear()
            y_hist.clear()
            d = -g
        alpha = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            x_new = _project(spec, x + alpha * d)
            step = x_new - x
            f_new = total_cost(P, spec, x_new)
            if not math.isfinite(f_new):
                raise NonFiniteCostError(f"non-finite cost {f_new!r} at x={x_new.tolist()}")
            if f_new < f and f_new <= f + ARMIJO_C * float(g @ step):
                accepted = True
                break
            alpha *= 0.5
        if not accepted and (s_hist or not np.array_equal(d, -g)):
            # quasi-Newton direction failed; retry once along steepest descent
            s_hist.clear()
            y_hist.clear()
            continue
        it += 1
        if not accepted:
            # no representable decrease left: the model's predicted gain is
            # below the rounding level of f
            predicted = -float(g @ (_project(spec, x + d) - x))
            converged = predicted <= RESOLUTION * max(abs(f), 1.0)
            break
        f_new, g_new = evaluate(x_new)
        s, y = x_new - x, g_new - g
        if float(s @ y) > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > HISTORY:
                s_hist.pop(0)
                y_hist.pop(0)
        x, f, g = x_new, f_new, g_new
        converged = _stationarity(spec, x, g) <= tol or float(np.linalg.norm(s)) <= MIN_STEP
    return SolveResult(x, f, it, float(np.linalg.norm(g)), bool(converged))


def multistart_minimize(P: WeightedPointSet, spec: KernelSpec, starts: int = 8, seed: int = 0,
                        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SolveResult:
    """Best of ``starts`` runs: run 0 from the origin, run i >= 1 from a seeded point in the unit ball.

    Start ``i`` depends only on ``(seed, i)``, so adding starts never
    worsens the result.
    """
    if starts < 1:
        raise ValueError("need at least one start")
    best: Optional[SolveResult] = None
    for i in range(starts):
        if i == 0:
            init = np.zeros(P.dim)
        else:
            init = unit_ball(generator(derive_seed(seed, i)), 1, P.dim)[0]
        res = minimize(P, spec, init, tol, max_iter)
        if best is None or res.value < best.value:
            best = res
    return best
