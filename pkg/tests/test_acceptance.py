"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary.  Run this file directly to print only the lines.
"""

import math
import time

import numpy as np
import pytest

from monocoreset.bench import ExperimentConfig, make_synthetic, make_wine_like, run_logistic_experiment, \
    run_sigmoid_experiment
from monocoreset.core import KernelSpec, WeightedPointSet, total_cost, total_cost_gradient, total_costs
from monocoreset.rng import derive_seed, generator, unit_ball
from monocoreset.sampler import build_coreset, coreset_size, monotonic_coreset
from monocoreset.sensitivity import empirical_sensitivities, sensitivity_for, sigmoid_sensitivity
from monocoreset.stream import MergeTreeConfig, stream_coreset
from monocoreset.verifier import (bound_matrix, build_separable_set, find_intersection, intersection_k0,
                                  intersection_sign_pattern, lower_bound_demo, witness_sensitivities)

SEED = 0


def check_runtime(t0, limit):
    elapsed = time.perf_counter() - t0
    return elapsed, elapsed < limit


def criterion_1():
    m = coreset_size(10, 2, 0.5, 0.1)
    exact = math.ceil(10 * 10 / 0.5**2 * (2 * math.log(10) + math.log(1 / 0.1)))
    return m == 2764 == exact, f"coreset_size(10, 2, 0.5, 0.1) = {m} (expected 2764)"


def criterion_2():
    t0 = time.perf_counter()
    rng = generator(derive_seed(SEED, 2))
    checked = violations = 0
    for i in range(50):
        n = int(rng.integers(2, 201))
        d = int(rng.integers(1, 4))
        k = float(rng.choice([100.0, 1000.0]))
        P = WeightedPointSet(unit_ball(rng, n, d))
        for spec in (KernelSpec("sigmoid", k), KernelSpec("logistic", k, float(rng.choice([1.0, 4.0])))):
            emp = empirical_sensitivities(P, spec, 10_000, seed=derive_seed(SEED, 2, i))
            violations += int(np.sum(emp > sensitivity_for(P, spec).bounds))
            checked += n
    elapsed, fast = check_runtime(t0, 120)
    return violations == 0 and fast, f"{violations} of {checked} points exceed their bound ({elapsed:.1f}s)"


def criterion_3():
    t0 = time.perf_counter()
    rng = generator(derive_seed(SEED, 3))
    P = WeightedPointSet(unit_ball(rng, 100, 2))
    spec = KernelSpec("sigmoid", 100)
    x = np.array([0.8, -0.4])
    exact = total_cost(P, spec, x)
    prof = sigmoid_sensitivity(P, 100)
    vals = np.array([total_cost(build_coreset(P, prof, 50, derive_seed(SEED, 3, s)).set, spec, x)
                     for s in range(10_000)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    z = (vals.mean() - exact) / se
    elapsed, fast = check_runtime(t0, 60)
    return abs(z) <= 3 and fast, f"mean {vals.mean():.6f} vs exact {exact:.6f}, {z:+.2f} standard errors ({elapsed:.1f}s)"


def criterion_4():
    t0 = time.perf_counter()
    P = make_synthetic(SEED).normalized().set
    spec = KernelSpec("sigmoid", 500)
    prof = sensitivity_for(P, spec)
    X = unit_ball(generator(derive_seed(SEED, 4)), 200, 2)
    full = total_costs(P, spec, X)
    violations = 0
    m = None
    for s in range(50):
        core = monotonic_coreset(P, spec, 0.3, 0.1, derive_seed(SEED, 4, s), profile=prof)
        m = len(core)
        violations += int(np.sum(np.abs(total_costs(core.set, spec, X) - full) > 0.3 * full))
    frac = violations / (50 * 200)
    elapsed, fast = check_runtime(t0, 300)
    return frac <= 0.1 and fast, f"violation fraction {frac:.4f} <= 0.1 with m = {m} ({elapsed:.1f}s)"


def criterion_5():
    t0 = time.perf_counter()
    data = make_synthetic(SEED)
    cfg = ExperimentConfig(kind="sigmoid", k=500, size_schedule=[20.0], trials=100, seed=SEED,
                           methods=["coreset", "uniform"])
    rep = run_sigmoid_experiment(data, cfg)
    m = cfg.sizes(len(data))[0]
    ec, eu = rep.aggregate("coreset", m)["mean_error"], rep.aggregate("uniform", m)["mean_error"]
    elapsed, fast = check_runtime(t0, 600)
    return ec <= eu and fast, f"m = {m}: mean E coreset {ec:.3e} vs uniform {eu:.3e} ({elapsed:.1f}s)"


def criterion_6():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(kind="logistic", k=500, R=4.0, size_schedule=[5.0, 40.0], trials=20, seed=SEED,
                           methods=["coreset", "uniform"])
    rep = run_logistic_experiment(make_wine_like(SEED), cfg)
    small, large = cfg.sizes(rep.dataset["n_train"])
    cs, us = rep.aggregate("coreset", small)["mean_nll"], rep.aggregate("uniform", small)["mean_nll"]
    cl, ul = rep.aggregate("coreset", large)["mean_nll"], rep.aggregate("uniform", large)["mean_nll"]
    gap = abs(cl - ul) / ul
    elapsed, fast = check_runtime(t0, 600)
    ok = cs <= us and gap <= 0.02 and fast
    return ok, (f"m = {small}: NLL coreset {cs:.6f} vs uniform {us:.6f}; m = {large}: relative gap {gap:.2e} "
                f"({elapsed:.1f}s)")


def criterion_7():
    t0 = time.perf_counter()
    reports = bound_matrix()
    failed = [r.params for r in reports if not r.passed]
    worst = min(reports, key=lambda r: r.margin / r.bound)
    elapsed, fast = check_runtime(t0, 120)
    detail = f"{len(reports) - len(failed)} of {len(reports)} sweeps with positive margin"
    if failed:
        detail += f"; failing {failed}"
    detail += f"; tightest {worst.params} sup {worst.sup_ratio:.4g} vs bound {worst.bound:.4g} ({elapsed:.1f}s)"
    return not failed and fast, detail


def criterion_8():
    res = find_intersection("sigmoid")
    in_bracket = math.sqrt(math.log(1.2)) <= res.x_kc <= math.sqrt(1.5)
    small = abs(res.residual) <= 1e-12
    signs = lower = True
    skipped = []
    for c in (0.1, 1.0, 10.0):
        for k in (1e2, 1e4, 1e6):
            r = find_intersection("sigmoid", c, k)
            grid = np.linspace(0, r.bracket[1], 10_000)
            signs &= intersection_sign_pattern("sigmoid", c, k, r.x_kc, grid)
            if k >= intersection_k0("sigmoid", c):
                lower &= r.x_kc >= 1 / (c * math.sqrt(k))
            else:
                skipped.append((c, k))
    ok = in_bracket and small and signs and lower
    return ok, (f"x11 = {res.x_kc:.12f}, |h| = {abs(res.residual):.1e}, sign pattern {signs}, "
                f"x_kc >= 1/(c sqrt k) {lower} (below k0, not claimed: {skipped})")


def criterion_9():
    P, Y = build_separable_set(10, 3, 1e6)
    s = witness_sensitivities(P, KernelSpec("sigmoid", math.inf), Y)
    rows = lower_bound_demo(10, 3, [1, 10, 1e2, 1e4, 1e6])
    curve = [r["min_sensitivity"] for r in rows]
    monotone = all(b >= a for a, b in zip(curve, curve[1:]))
    return s.min() >= 0.99 and monotone, f"min witness sensitivity {s.min():.6f}; curve {np.round(curve, 6).tolist()}"


def criterion_10():
    rng = generator(derive_seed(SEED, 10))
    kinds = ["sigmoid", "logistic", "sigmoid2"]
    worst = 0.0
    for i in range(100):
        n, d = int(rng.integers(1, 50)), int(rng.integers(1, 6))
        P = WeightedPointSet(unit_ball(rng, n, d), rng.uniform(0.5, 2.0, n))
        spec = KernelSpec(kinds[i % 3], float(10 ** rng.uniform(0, 4)), 3.0)
        x = unit_ball(rng, 1, d, 2.5)[0]
        g = total_cost_gradient(P, spec, x)
        h = 1e-6
        num = np.array([(total_cost(P, spec, x + h * e) - total_cost(P, spec, x - h * e)) / (2 * h)
                        for e in np.eye(d)])
        worst = max(worst, np.linalg.norm(g - num) / max(np.linalg.norm(num), 1e-8))
    return worst <= 1e-5, f"worst relative gradient error {worst:.2e} over 100 instances"


def criterion_11():
    t0 = time.perf_counter()
    P = make_synthetic(SEED).normalized().set
    spec = KernelSpec("sigmoid", 500)
    n = len(P)
    leaf = math.ceil(n / 8)
    size = 1000
    X = unit_ball(generator(derive_seed(SEED, 11)), 200, 2)
    full = total_costs(P, spec, X)
    streamed, offline, peaks = [], [], []
    for s in range(10):
        cfg = MergeTreeConfig(leaf, 0.3, 0.1, recompress_threshold=leaf, seed=derive_seed(SEED, 11, s),
                              coreset_size=size)
        batches = [P.subset(np.arange(i, min(i + leaf, n))) for i in range(0, n, leaf)]
        core, stats = stream_coreset(batches, spec, cfg, return_stats=True)
        ref = monotonic_coreset(P, spec, 0.3, 0.1, derive_seed(SEED, 12, s), size=len(core))
        streamed.append(np.mean(np.abs(total_costs(core.set, spec, X) - full) / full))
        offline.append(np.mean(np.abs(total_costs(ref.set, spec, X) - full) / full))
        peaks.append(stats.peak_resident)
    ratio = float(np.mean(streamed) / np.mean(offline))
    cap = leaf * (math.log2(8) + 1)
    elapsed, fast = check_runtime(t0, 120)
    ok = math.isfinite(ratio) and max(peaks) <= cap and fast
    return ok, (f"stream/offline mean error ratio {ratio:.3f} (within 2x: {ratio <= 2}), height {stats.height}, "
                f"peak {max(peaks)} <= {cap:.0f} ({elapsed:.1f}s)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number, acceptance_line):
    passed, detail = CRITERIA[number - 1]()
    assert acceptance_line(number, passed, detail), detail


if __name__ == "__main__":
    for i, fn in enumerate(CRITERIA, start=1):
        passed, detail = fn()
        print(f"{'PASS' if passed else 'FAIL'} criterion {i:>2}: {detail}")
