import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocoreset.core import KernelSpec, WeightedPointSet
from monocoreset.sensitivity import (empirical_sensitivities, empirical_sensitivity, generic_sensitivity,
                                     logistic_sensitivity, sensitivity_for, sigmoid_sensitivity,
                                     sort_by_norm, weighted_sensitivity)

from conftest import ball_points

# exact values from 40-digit arithmetic
LOG1PE_OVER_LN2 = 1.8946361239720115768
LOGISTIC_B_UNIT = 7.3280851226668902221
LOGISTIC_S_UNIT = 15.778690916918571463
H_1000 = 7.4854708605503449127


class TestSortByNorm:
    def test_example(self):
        P = WeightedPointSet([[3, 4], [0, 1], [1, 1]])
        assert sort_by_norm(P).tolist() == [1, 2, 0]

    def test_sorted_input_is_identity(self):
        P = WeightedPointSet([[0.1], [0.5], [2.0]])
        assert sort_by_norm(P).tolist() == [0, 1, 2]

    def test_ties_stable(self):
        P = WeightedPointSet([[2.0, 0.0], [0.0, 1.0], [0.0, 2.0], [1.0, 0.0]])
        assert sort_by_norm(P).tolist() == [1, 3, 0, 2]


class TestSigmoid:
    def test_singleton(self):
        prof = sigmoid_sensitivity(WeightedPointSet([[1.0, 0.0]]), 1.0)
        assert prof.bounds.tolist() == [134.0] and prof.total == 134.0

    def test_two_points(self):
        prof = sigmoid_sensitivity(WeightedPointSet([[0.0], [1.0]]), 4.0)
        assert prof.bounds.tolist() == [2.0, 133.0] and prof.total == 135.0

    def test_bounds_follow_input_order(self):
        prof = sigmoid_sensitivity(WeightedPointSet([[1.0], [0.0]]), 4.0)
        assert prof.bounds.tolist() == [133.0, 2.0]
        assert prof.sorted_bounds.tolist() == [2.0, 133.0]

    def test_unit_sphere_harmonic(self, rng):
        pts = rng.standard_normal((1000, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        prof = sigmoid_sensitivity(WeightedPointSet(pts), 1.0)
        assert prof.total == pytest.approx(134.0 * H_1000, rel=1e-12)

    @given(st.integers(1, 300), st.sampled_from([1.0, 100.0, 1000.0]), st.integers(0, 2**31))
    @settings(max_examples=40)
    def test_unit_ball_total_bounded(self, n, k, seed):
        P = WeightedPointSet(ball_points(np.random.default_rng(seed), n, 2))
        prof = sigmoid_sensitivity(P, k)
        harmonic = math.fsum(1.0 / j for j in range(1, n + 1))
        assert prof.total <= (132 * math.sqrt(k) + 2) * harmonic * (1 + 1e-12)
        assert np.all(prof.bounds > 0)
        assert prof.total == math.fsum(prof.bounds.tolist())

    def test_rank_times_bound_non_decreasing(self, small_set):
        prof = sigmoid_sensitivity(small_set, 10.0)
        jb = prof.sorted_bounds * np.arange(1, len(small_set) + 1)
        assert np.all(np.diff(jb) >= -1e-12 * jb[1:])

    def test_rejects_weights(self):
        with pytest.raises(ValueError):
            sigmoid_sensitivity(WeightedPointSet([[1.0]], [2.0]), 1.0)

    @pytest.mark.parametrize("k", [0.0, -3.0])
    def test_rejects_bad_k(self, k):
        with pytest.raises(ValueError):
            sigmoid_sensitivity(WeightedPointSet([[1.0]]), k)


class TestLogistic:
    def test_zero_norm(self):
        prof = logistic_sensitivity(WeightedPointSet([[0.0, 0.0]]), 17.0, 1.0)
        assert prof.total == pytest.approx(LOG1PE_OVER_LN2, rel=1e-14)

    def test_unit_norm(self):
        prof = logistic_sensitivity(WeightedPointSet([[0.0, 1.0]]), 1.0, 1.0)
        assert prof.total == pytest.approx(LOGISTIC_S_UNIT, rel=1e-14)
        assert LOGISTIC_S_UNIT == pytest.approx(LOG1PE_OVER_LN2 * (LOGISTIC_B_UNIT + 1), rel=1e-15)

    def test_rank_halving(self):
        # same norm everywhere: rank 2j carries half the bound of rank j
        P = WeightedPointSet(np.tile([[0.6, 0.8]], (8, 1)))
        s = logistic_sensitivity(P, 5.0, 2.0).sorted_bounds
        for j in (1, 2, 4):
            assert s[2 * j - 1] == pytest.approx(s[j - 1] / 2, rel=1e-15)

    @pytest.mark.parametrize("k,R", [(0.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_rejects(self, k, R):
        with pytest.raises(ValueError):
            logistic_sensitivity(WeightedPointSet([[1.0]]), k, R)


class TestGeneric:
    def test_reproduces_sigmoid(self, small_set):
        k = 30.0
        a = generic_sensitivity(small_set, 1.0, 0.5, 66 * math.sqrt(k) * small_set.norms)
        b = sigmoid_sensitivity(small_set, k)
        np.testing.assert_array_equal(a.bounds, b.bounds)

    def test_reproduces_logistic(self, small_set):
        k, R = 30.0, 3.0
        norms = small_set.norms
        b = 3 * np.log(2 * np.exp(norms * R)) / math.log(2) * math.sqrt(k) * norms
        a = generic_sensitivity(small_set, math.log1p(math.e**R), math.log(2), b)
        np.testing.assert_allclose(a.bounds, logistic_sensitivity(small_set, k, R).bounds, rtol=1e-14)

    def test_zero_certificate_is_harmonic(self):
        P = WeightedPointSet(np.arange(6.0)[:, None])
        prof = generic_sensitivity(P, 2.0, 0.5, np.zeros(6))
        np.testing.assert_allclose(prof.sorted_bounds, 4.0 / np.arange(1, 7), rtol=1e-15)
        assert prof.total == pytest.approx(4.0 * 2.45, rel=1e-15)

    def test_rejects_decreasing_certificate(self):
        P = WeightedPointSet([[1.0], [2.0]])
        with pytest.raises(ValueError, match="non-decreasing"):
            generic_sensitivity(P, 1.0, 0.5, [3.0, 1.0])


class TestWeighted:
    def test_unit_weights_match_closed_form(self, small_set):
        for spec in (KernelSpec("sigmoid", 9), KernelSpec("logistic", 9, 2.0), KernelSpec("sigmoid2", 9)):
            np.testing.assert_allclose(weighted_sensitivity(small_set, spec).bounds,
                                       sensitivity_for(small_set, spec).bounds, rtol=1e-14)

    def test_cumulative_weight_rank(self):
        # cumulative weights along the norm order are 2, 3, 6
        P = WeightedPointSet([[0.1], [0.5], [0.9]], [2.0, 1.0, 3.0])
        prof = weighted_sensitivity(P, KernelSpec("sigmoid", 4))
        assert np.all(prof.bounds > 0)
        expected = [2 * (132 * 2 * 0.1 + 2) / 2, (132 * 2 * 0.5 + 2) / 3, 3 * (132 * 2 * 0.9 + 2) / 6]
        np.testing.assert_allclose(prof.bounds, expected, rtol=1e-14)


class TestEmpirical:
    def test_singleton(self):
        assert empirical_sensitivity(WeightedPointSet([[0.3, 0.4]]), KernelSpec("sigmoid", 10), 0) == 1.0

    def test_identical_pair(self):
        P = WeightedPointSet([[0.3, 0.4], [0.3, 0.4]])
        assert empirical_sensitivity(P, KernelSpec("sigmoid", 10), 1, budget=2000) == 0.5

    def test_in_unit_interval(self, small_set):
        s = empirical_sensitivities(small_set, KernelSpec("sigmoid2", 100), 3000)
        assert np.all((s > 0) & (s <= 1))

    def test_monotone_in_budget(self, small_set):
        spec = KernelSpec("sigmoid", 100)
        lo = empirical_sensitivities(small_set, spec, 1536, seed=3)
        hi = empirical_sensitivities(small_set, spec, 6000, seed=3)
        assert np.all(hi >= lo)

    def test_index_range(self, small_set):
        with pytest.raises(IndexError):
            empirical_sensitivity(small_set, KernelSpec("sigmoid", 1), 40)

    def test_logistic_queries_stay_in_ball(self, small_set):
        s = empirical_sensitivities(small_set, KernelSpec("logistic", 100, 0.5), 2000)
        assert np.all(s <= 1)

    @pytest.mark.parametrize("kind", ["sigmoid", "logistic", "sigmoid2"])
    def test_dominated_by_bound(self, kind, rng):
        P = WeightedPointSet(ball_points(rng, 60, 2))
        spec = KernelSpec(kind, 100.0, 2.0)
        emp = empirical_sensitivities(P, spec, 4000)
        assert np.all(emp <= sensitivity_for(P, spec).bounds)
