import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import erfinv_oracle
from mobles import cdm
from mobles.cdm import ConfidenceInterval as CI


finite = st.floats(-50, 50, allow_nan=False)
# multiples of 1/8 keep shifted comparisons exact
grid = st.integers(-400, 400).map(lambda v: v / 8)


class TestErfinv:
    def test_values(self):
        assert cdm.erfinv(0.0) == 0.0
        assert cdm.erfinv(0.8) == pytest.approx(0.9061938024368232, abs=1e-12)
        assert cdm.erfinv(0.8) == pytest.approx(erfinv_oracle(0.8), abs=1e-12)

    def test_infinities(self):
        assert cdm.erfinv(1.0) == math.inf
        assert cdm.erfinv(-1.0) == -math.inf
        assert cdm.erfinv(1.5) == math.inf

    @given(st.floats(-0.999999, 0.999999))
    def test_odd(self, x):
        assert cdm.erfinv(-x) == pytest.approx(-cdm.erfinv(x), abs=1e-12)

    def test_against_oracle(self):
        xs = np.linspace(-1 + 1e-9, 1 - 1e-9, 2001)
        got = cdm.erfinv(xs)
        ref = np.array([erfinv_oracle(float(x)) for x in xs])
        assert np.max(np.abs(got - ref)) <= 1e-7


class TestQuantities:
    def test_length_examples(self):
        assert cdm.length_quantity(CI(0, 10), CI(2, 4)) == 5.0
        assert cdm.length_quantity(CI(0, 1), CI(0, 2)) == 0.0
        assert cdm.length_quantity(CI(0, 2), CI(0, 2)) == 0.0

    def test_length_sentinels(self):
        assert cdm.length_quantity(CI(0, 1), CI(0.5, 0.5)) == math.inf
        assert cdm.length_quantity(CI(0, 0), CI(0, 0)) == 0.0

    def test_overlap_examples(self):
        assert cdm.overlap_distance_quantity(0.2, 0.0, CI(0, 2), CI(0, 2)) == pytest.approx(
            0.9061938024368232, abs=1e-9)
        assert cdm.overlap_distance_quantity(1.0, 0.0, CI(0, 2), CI(0, 2)) == 0.0
        assert cdm.overlap_distance_quantity(1.2, 0.0, CI(0, 2), CI(0, 2)) == 0.0

    def test_overlap_sentinels(self):
        assert cdm.overlap_distance_quantity(1.0, 1.0, CI(0, 1), CI(0, 2)) == math.inf
        assert cdm.overlap_distance_quantity(1.0, 1.0, CI(0, 1), CI(1, 2)) == math.inf
        assert cdm.overlap_distance_quantity(1.0, 0.5, CI(0, 1), CI(1, 2)) == 0.0

    def test_overlap_requires_intersection(self):
        with pytest.raises(ValueError):
            cdm.overlap_distance_quantity(0, 0, CI(0, 1), CI(2, 3))

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            CI(1, 0)


class TestConfidenceDegree:
    def test_disjoint(self):
        assert cdm.confidence_degree(0.5, 2.5, CI(0, 1), CI(2, 3)) == 0.0

    def test_example(self):
        cd = cdm.confidence_degree(3.2, 3.0, CI(0, 10), CI(2, 4))
        assert cd == pytest.approx(4.530969012184116, abs=1e-9)

    def test_far_estimates(self):
        assert cdm.confidence_degree(5.0, 3.0, CI(0, 10), CI(2, 4)) == 0.0

    def test_zero_f_times_infinite_g(self):
        assert cdm.confidence_degree(1.0, 1.0, CI(0, 2), CI(0, 2)) == 0.0

    def test_infinite_degree(self):
        assert cdm.confidence_degree(1.0, 1.0, CI(0, 2), CI(0.5, 1.5)) == math.inf

    @settings(max_examples=200)
    @given(grid, grid, grid, grid, grid, grid, grid)
    def test_shift_invariant(self, a, b, c, d, qf, qs, shift):
        lf, hf = sorted((a, b))
        ls, hs = sorted((c, d))
        base = cdm.confidence_degree(qf, qs, CI(lf, hf), CI(ls, hs))
        moved = cdm.confidence_degree(qf + shift, qs + shift, CI(lf + shift, hf + shift),
                                      CI(ls + shift, hs + shift))
        if math.isinf(base):
            assert math.isinf(moved)
        else:
            assert moved == pytest.approx(base, rel=1e-6, abs=1e-6)

    @settings(max_examples=200)
    @given(st.floats(0.1, 10), st.floats(0.01, 1), st.floats(0.0, 1.0))
    def test_shrinking_sub_never_lowers_f(self, full_len, sub_len, shrink):
        bigger = cdm.length_quantity(CI(0, full_len), CI(0, sub_len))
        smaller = cdm.length_quantity(CI(0, full_len), CI(0, sub_len * (1 - shrink)))
        assert smaller >= bigger

    @settings(max_examples=200)
    @given(st.floats(0, 3), st.floats(0, 3))
    def test_distance_never_raises_g(self, d1, d2):
        lo, hi = sorted((d1, d2))
        g_lo = cdm.overlap_distance_quantity(lo, 0.0, CI(-3, 3), CI(-3, 3))
        g_hi = cdm.overlap_distance_quantity(hi, 0.0, CI(-3, 3), CI(-3, 3))
        assert g_hi <= g_lo

    @settings(max_examples=300)
    @given(st.lists(st.tuples(finite, finite, finite, finite, finite, finite), min_size=1,
                    max_size=6))
    def test_vectorised_matches_scalar(self, rows):
        n = len(rows)
        qf, lf, hf, qs, ls, hs = (np.zeros(n) for _ in range(6))
        for i, (a, b, c, d, e, f) in enumerate(rows):
            lf[i], hf[i] = sorted((a, b))
            ls[i], hs[i] = sorted((c, d))
            qf[i], qs[i] = e, f
        vec = cdm.confidence_degrees(qf, lf, hf, qs[None], ls[None], hs[None])[0]
        for i in range(n):
            ref = cdm.confidence_degree(qf[i], qs[i], CI(lf[i], hf[i]), CI(ls[i], hs[i]))
            assert vec[i] == ref or vec[i] == pytest.approx(ref)

    def test_pluggable_functions(self):
        cd = cdm.confidence_degree(3.2, 3.0, CI(0, 10), CI(2, 4), f=lambda t: 1.0,
                                   g=lambda t: 2.0)
        assert cd == 2.0


class TestEpsilonGreedy:
    def test_unique_max(self):
        p = cdm.epsilon_greedy_probs([3, 1, 0, 2], 0.1)
        assert p == pytest.approx([0.925, 0.025, 0.025, 0.025])

    def test_uniform(self):
        assert cdm.epsilon_greedy_probs([3, 1, 0, 2], 1.0) == pytest.approx([0.25] * 4)

    def test_tie(self):
        assert cdm.epsilon_greedy_probs([1, 1], 0.0) == pytest.approx([0.5, 0.5])

    def test_errors(self):
        with pytest.raises(ValueError):
            cdm.epsilon_greedy_probs([], 0.1)
        with pytest.raises(ValueError):
            cdm.epsilon_greedy_probs([1.0], 1.5)


class TestFuse:
    full = np.array([0.925, 0.025, 0.025, 0.025])

    def test_all_zero_degrees(self):
        sub = np.array([[0.025, 0.925, 0.025, 0.025]])
        out = cdm.fuse(self.full, sub, np.zeros((1, 4)))
        assert np.array_equal(out, self.full)

    def test_example(self):
        sub = np.array([[0.025, 0.925, 0.025, 0.025]])
        cds = np.array([[0.0, 2.0, 0.0, 0.0]])
        out = cdm.fuse(self.full, sub, cds)
        assert out == pytest.approx([0.925 / 1.9, 0.925 / 1.9, 0.025 / 1.9, 0.025 / 1.9])
        assert out == pytest.approx([0.4868, 0.4868, 0.0132, 0.0132], abs=1e-4)

    def test_degree_one_not_enough(self):
        sub = np.array([[0.025, 0.925, 0.025, 0.025]])
        out = cdm.fuse(self.full, sub, np.array([[0.0, 1.0, 0.0, 0.0]]))
        assert np.array_equal(out, self.full)

    def test_argmax_subspace_and_ties(self):
        subs = np.array([[0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]])
        cds = np.array([[3.0, 2.0, 0.0, 0.0], [3.0, 5.0, 0.0, 0.0]])
        out = cdm.fuse(self.full, subs, cds)
        raw = np.array([0.1, 0.3, 0.025, 0.025])
        assert out == pytest.approx(raw / raw.sum())

    def test_zero_total(self):
        with pytest.raises(ValueError):
            cdm.fuse([0.0, 1.0], [[0.0, 0.0]], [[0.0, 2.0]])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            cdm.fuse(self.full, np.ones((2, 4)) / 4, np.zeros((1, 4)))

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    def test_output_is_distribution(self, seed, k):
        rng = np.random.default_rng(seed)
        full = cdm.epsilon_greedy_probs(rng.normal(size=4), 0.1)
        subs = np.stack([cdm.epsilon_greedy_probs(rng.normal(size=4), 0.1) for _ in range(k)])
        cds = rng.choice([0.0, 0.5, 1.0, 2.0, math.inf], size=(k, 4))
        out = cdm.fuse(full, subs, cds)
        assert np.all(out >= 0)
        assert abs(out.sum() - 1.0) <= 1e-12


class TestDecisionWeights:
    def test_all_zero(self):
        assert cdm.decision_weights(np.zeros((2, 4))).tolist() == [1.0, 0.0, 0.0]

    def test_one_subspace_wins_all(self):
        w = cdm.decision_weights(np.array([[2.0] * 4, [0.0] * 4]))
        assert w.tolist() == [0.0, 1.0, 0.0]

    def test_one_of_four(self):
        w = cdm.decision_weights(np.array([[0.0, 0.0, 3.0, 0.0]]))
        assert w.tolist() == [0.75, 0.25]

    def test_empty_family(self):
        assert cdm.decision_weights(np.zeros((0, 4))).tolist() == [1.0]

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_sum_to_one(self, seed, k):
        rng = np.random.default_rng(seed)
        cds = rng.choice([0.0, 1.0, 1.5, math.inf], size=(k, 4))
        assert cdm.decision_weights(cds).sum() == 1.0
