"""Coreset versus uniform sampling experiments.

Sigmoid mode minimizes the regularized sum of sigmoids on each sample and
scores the minimizer on the full data: ``E = |C_method / C_full - 1|``.
Logistic mode fits regularized logistic regression on a training split and
scores the mean negative log-likelihood on the held-out split.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..core import KernelKind, KernelSpec, WeightedPointSet, softplus, total_cost
from ..rng import check_seed, derive_seed, generator
from ..sampler import monotonic_coreset, uniform_sample
from ..sensitivity import sensitivity_for
from ..solver import minimize, multistart_minimize
from .data import DataError, Dataset

METHODS = ("coreset", "uniform", "full")


@dataclass
class ExperimentConfig:
    kind: str = "sigmoid"
    k: float = 500.0
    R: Optional[float] = None
    eps: float = 0.3
    delta: float = 0.1
    size_schedule: list = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0])
    trials: int = 100
    seed: int = 0
    methods: list = field(default_factory=lambda: list(METHODS))
    ground_truth_starts: int = 8
    sample_starts: int = 1
    test_fraction: float = 0.2
    fold_labels: bool = True
    tol: float = 1e-8
    max_iter: int = 500

    def __post_init__(self):
        self.kind = KernelKind(self.kind).value
        if not self.size_schedule or any(a <= 0 for a in self.size_schedule):
            raise ValueError("size_schedule multipliers must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")
        check_seed(self.seed)

    @property
    def spec(self) -> KernelSpec:
        return KernelSpec(self.kind, self.k, self.R)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    def as_dict(self) -> dict:
        return asdict(self)

    def sizes(self, n: int) -> list:
        return [max(1, int(round(a * math.log(n)))) for a in self.size_schedule]


@dataclass
class ExperimentReport:
    mode: str
    dataset: dict
    config: dict
    full: dict
    trials: list
    aggregates: list
    runtime: Optional[dict] = None

    def aggregate(self, method: str, m: int) -> dict:
        for row in self.aggregates:
            if row["method"] == method and row["m"] == m:
                return row
        raise KeyError((method, m))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CORESET_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    threads = min(_threads(), len(items)) if items else 1
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _std(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float(v.std(ddof=1)) if v.shape[0] > 1 else 0.0


def _aggregate(trials: list, keys=("error", "nll")) -> list:
    groups: dict = {}
    for row in trials:
        groups.setdefault((row["method"], row["m"]), []).append(row)
    out = []
    for (method, m), rows in groups.items():
        agg = {"method": method, "m": m, "trials": len(rows)}
        for key in keys:
            vals = [r[key] for r in rows if r.get(key) is not None]
            if vals:
                agg[f"mean_{key}"] = math.fsum(vals) / len(vals)
                agg[f"std_{key}"] = _std(vals)
        out.append(agg)
    return out


def _dataset_record(data: Dataset) -> dict:
    return {"name": data.name, "n": len(data), "dim": data.set.dim,
            "normalization": data.normalization.value}


def _sample(method: str, P: WeightedPointSet, spec: KernelSpec, cfg: ExperimentConfig,
            m: int, seed: int, profile):
    if method == "coreset":
        return monotonic_coreset(P, spec, cfg.eps, cfg.delta, seed, size=m, profile=profile).set
    return uniform_sample(P, m, seed).set


def _solve(Q: WeightedPointSet, spec: KernelSpec, cfg: ExperimentConfig, seed: int):
    if spec.kind is KernelKind.LOGISTIC or cfg.sample_starts <= 1:
        return minimize(Q, spec, None, cfg.tol, cfg.max_iter)
    return multistart_minimize(Q, spec, cfg.sample_starts, seed, cfg.tol, cfg.max_iter)


def run_sigmoid_experiment(data: Dataset, config: ExperimentConfig, timing: bool = False) -> ExperimentReport:
    """Mean and spread of ``|C_t / C_full - 1|`` per method and sample size.

    Data are scaled into the unit ball first if they are not already.
    """
    t0 = time.perf_counter()
    data = data.normalized()
    spec = config.spec
    P = data.set
    n = len(P)
    full = multistart_minimize(P, spec, config.ground_truth_starts, derive_seed(config.seed, 0),
                               config.tol, config.max_iter)
    c_full = full.value
    profile = sensitivity_for(P, spec) if "coreset" in config.methods else None
    sizes = config.sizes(n)

    jobs = [(mi, m, t) for mi, m in enumerate(sizes) for t in range(config.trials)]

    def trial(job):
        mi, m, t = job
        rows = []
        base = derive_seed(config.seed, 1, mi, t)
        for j, method in enumerate(("coreset", "uniform")):
            if method not in config.methods:
                continue
            Q = _sample(method, P, spec, config, m, derive_seed(base, j), profile)
            res = _solve(Q, spec, config, derive_seed(base, 10 + j))
            value = total_cost(P, spec, res.x_star)
            rows.append({"method": method, "m": m, "trial": t, "error": abs(value / c_full - 1.0),
                         "nll": None, "value": value})
        return rows

    trials = [r for rows in _map(trial, jobs) for r in rows]
    if "full" in config.methods:
        for m in sizes:
            trials.append({"method": "full", "m": m, "trial": 0, "error": abs(c_full / c_full - 1.0),
                           "nll": None, "value": c_full})
    report = ExperimentReport(
        mode="sigmoid",
        dataset=_dataset_record(data),
        config=config.as_dict(),
        full={"value": c_full, "x_star": full.x_star.tolist(), "iterations": full.iterations,
              "gradient_norm": full.gradient_norm, "converged": full.converged},
        trials=trials,
        aggregates=_aggregate(trials),
    )
    if timing:
        report.runtime = {"seconds": time.perf_counter() - t0, "threads": _threads()}
    return report


def mean_nll(test: WeightedPointSet, x: np.ndarray) -> float:
    """Mean of ``log(1 + exp(p . x))`` over label-folded test points."""
    return math.fsum(softplus(test.points @ x).tolist()) / len(test)


def train_test_split(data: Dataset, test_fraction: float, seed: int):
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = len(data)
    n_test = int(round(test_fraction * n))
    if n_test < 1 or n_test >= n:
        raise ValueError(f"test_fraction {test_fraction} leaves an empty split for n={n}")
    perm = generator(seed).permutation(n)
    return data.subset(np.sort(perm[n_test:])), data.subset(np.sort(perm[:n_test]))


def run_logistic_experiment(data: Dataset, config: ExperimentConfig, test_fraction: Optional[float] = None,
                            timing: bool = False) -> ExperimentReport:
    """Held-out negative log-likelihood per method and sample size.

    Points are label-folded (if ``config.fold_labels``) and scaled into the
    unit ball; sizes use ``n`` of the training split.
    """
    t0 = time.perf_counter()
    if KernelKind(config.kind) is not KernelKind.LOGISTIC:
        raise ValueError("logistic experiment needs kind='logistic'")
    if data.labels is None:
        raise DataError("logistic experiment needs labels")
    if test_fraction is None:
        test_fraction = config.test_fraction
    if config.fold_labels:
        data = data.folded()
    data = data.normalized()
    spec = config.spec
    train, test = train_test_split(data, test_fraction, derive_seed(config.seed, 2))
    P, T = train.set, test.set
    full = minimize(P, spec, None, config.tol, config.max_iter)
    c_full = full.value
    nll_full = mean_nll(T, full.x_star)
    profile = sensitivity_for(P, spec) if "coreset" in config.methods else None
    sizes = config.sizes(len(P))
    jobs = [(mi, m, t) for mi, m in enumerate(sizes) for t in range(config.trials)]

    def trial(job):
        mi, m, t = job
        rows = []
        base = derive_seed(config.seed, 1, mi, t)
        for j, method in enumerate(("coreset", "uniform")):
            if method not in config.methods:
                continue
            Q = _sample(method, P, spec, config, m, derive_seed(base, j), profile)
            res = _solve(Q, spec, config, derive_seed(base, 10 + j))
            value = total_cost(P, spec, res.x_star)
            rows.append({"method": method, "m": m, "trial": t, "error": abs(value / c_full - 1.0),
                         "nll": mean_nll(T, res.x_star), "value": value})
        return rows

    trials = [r for rows in _map(trial, jobs) for r in rows]
    if "full" in config.methods:
        for m in sizes:
            trials.append({"method": "full", "m": m, "trial": 0, "error": 0.0, "nll": nll_full, "value": c_full})
    dataset = _dataset_record(data)
    dataset.update({"n_train": len(P), "n_test": len(T), "test_fraction": test_fraction})
    report = ExperimentReport(
        mode="logistic",
        dataset=dataset,
        config=config.as_dict(),
        full={"value": c_full, "nll": nll_full, "x_star": full.x_star.tolist(),
              "iterations": full.iterations, "gradient_norm": full.gradient_norm,
              "converged": full.converged},
        trials=trials,
        aggregates=_aggregate(trials),
    )
    if timing:
        report.runtime = {"seconds": time.perf_counter() - t0, "threads": _threads()}
    return report
