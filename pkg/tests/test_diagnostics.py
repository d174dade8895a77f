import math

import numpy as np
import pytest

import conformix as cx
from conformix.diagnostics import _sup_tail_gap
from conformix.errors import ContractViolation
from oracles import oracle_size_gap, oracle_tail_gap


def tensor_from(vals, names=("s",)):
    return cx.ScoreTensor(np.asarray(vals, dtype=float), names)


class TestSupTailGap:
    def test_hand_enumerated(self):
        # a = {1, 2}, b = {2}: at q=1 tails are 1 vs 1, at q=2 they are
        # 1/2 vs 1, so the sup is 1/2
        assert _sup_tail_gap(np.array([1.0, 2.0]), np.array([2.0])) == 0.5

    def test_identical_samples(self):
        x = np.array([0.3, 0.3, 0.9])
        assert _sup_tail_gap(x, x.copy()) == 0.0

    def test_disjoint_supports(self):
        assert _sup_tail_gap(np.array([0.0, 0.1]), np.array([5.0, 6.0])) == 1.0

    def test_matches_loop_oracle(self, rng):
        for _ in range(200):
            na, nb = int(rng.integers(1, 30)), int(rng.integers(1, 30))
            if rng.random() < 0.5:
                a = rng.choice([0.0, 0.5, 1.0], size=na)  # force ties
                b = rng.choice([0.0, 0.5, 1.0], size=nb)
            else:
                a, b = rng.random(na), rng.random(nb)
            assert _sup_tail_gap(a, b) == pytest.approx(oracle_tail_gap(a, b), abs=1e-15)

    def test_singletons(self):
        assert _sup_tail_gap(np.array([1.0]), np.array([1.0])) == 0.0
        assert _sup_tail_gap(np.array([1.0]), np.array([2.0])) == 1.0


class TestOmega:
    def test_self_reference_is_zero(self, small_task):
        tensor, labels, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        idx = np.arange(tensor.n_samples)
        assert cx.omega_deviation(tensor, labels, idx, (tensor, labels), g) == 0.0

    def test_single_row_sample(self, small_task):
        tensor, labels, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        dev = cx.omega_deviation(tensor, labels, [0], (tensor, labels), g)
        assert 0.0 < dev <= 1.0

    def test_matches_per_weight_oracle(self, small_task):
        tensor, labels, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        idx = np.arange(40)
        ref_scores = tensor.label_scores(labels, np.arange(tensor.n_samples))
        sample_scores = tensor.label_scores(labels, idx)
        want = max(
            oracle_tail_gap(sample_scores @ w.values, ref_scores @ w.values)
            for w in g
        )
        got = cx.omega_deviation(tensor, labels, idx, (tensor, labels), g)
        assert got == pytest.approx(want, abs=1e-15)

    def test_requires_reference_labels(self, small_task):
        tensor, labels, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        with pytest.raises(ContractViolation):
            cx.omega_deviation(tensor, labels, [0, 1], tensor, g)


class TestGamma:
    def test_self_reference_is_zero(self, small_task):
        tensor, _, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        idx = np.arange(tensor.n_samples)
        assert cx.gamma_deviation(tensor, idx, tensor, g) == 0.0

    def test_matches_size_gap_oracle(self):
        # dyadic values keep both projection orders bit-identical
        rng = np.random.default_rng(5)
        a = tensor_from(rng.integers(0, 64, (6, 3, 2)) / 64, ("x", "y"))
        b = tensor_from(rng.integers(0, 64, (9, 3, 2)) / 64, ("x", "y"))
        g = cx.simplex_grid(2, 0.5)
        want = max(oracle_size_gap(a.values, b.values, w.values) for w in g)
        got = cx.gamma_deviation(a, np.arange(6), b, g)
        assert got == pytest.approx(want, abs=1e-12)

    def test_accepts_bare_tensor_or_pair(self, small_task):
        tensor, labels, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        bare = cx.gamma_deviation(tensor, np.arange(50), tensor, g)
        pair = cx.gamma_deviation(tensor, np.arange(50), (tensor, labels), g)
        assert bare == pair

    def test_class_count_mismatch(self, small_task):
        tensor, _, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        other = tensor_from(np.random.default_rng(0).random((20, 4, 3)), ("a", "b", "c"))
        with pytest.raises(ContractViolation):
            cx.gamma_deviation(tensor, [0, 1], other, g)


class TestBounds:
    def test_closed_form(self):
        eta, xi = cx.vc_bound(100, 3, 0.05, K=10)
        root = math.sqrt(4 * math.log(101) / 100)
        assert eta == pytest.approx(8 * root + 0.05, abs=1e-15)
        assert xi == pytest.approx(80 * root + 0.5, abs=1e-15)

    def test_k1_ties_bounds_together(self):
        eta, xi = cx.vc_bound(500, 2, 0.1, K=1)
        assert eta == xi

    def test_default_k_is_one(self):
        assert cx.vc_bound(500, 2, 0.1) == cx.vc_bound(500, 2, 0.1, K=1)

    def test_shrinks_with_n(self):
        e1, x1 = cx.vc_bound(100, 3, 0.05, K=5)
        e2, x2 = cx.vc_bound(10_000, 3, 0.05, K=5)
        assert e2 < e1 and x2 < x1

    def test_validation(self):
        with pytest.raises(ContractViolation):
            cx.vc_bound(0, 3, 0.05)
        with pytest.raises(ContractViolation):
            cx.vc_bound(10, 0, 0.05)
        with pytest.raises(ContractViolation):
            cx.vc_bound(10, 3, 0.0)
        with pytest.raises(ContractViolation):
            cx.vc_bound(10, 3, 0.05, K=0)


class TestReport:
    def test_report_bundles_both_sups(self, small_task):
        tensor, labels, _, _ = small_task
        g = cx.simplex_grid(3, 0.5)
        idx = np.arange(100)
        rep = cx.deviation_report(tensor, labels, idx, (tensor, labels), g)
        assert rep.eta_hat == cx.omega_deviation(tensor, labels, idx, (tensor, labels), g)
        assert rep.xi_hat == cx.gamma_deviation(tensor, idx, (tensor, labels), g)
        assert rep.n == 100 and rep.d == 3 and rep.n_classes == 10
        assert rep.grid_size == g.size and rep.reference_size == 1500
        assert rep.bound_eta(0.05) == cx.vc_bound(100, 3, 0.05)[0]
        assert rep.bound_xi(0.05) == cx.vc_bound(100, 3, 0.05, K=10)[1]

    def test_subgrid_sup_is_monotone(self, small_task):
        """The sup over a denser grid can only grow: every coarse-grid
        member is also a fine-grid member when the denominators divide."""
        tensor, labels, _, _ = small_task
        idx = np.arange(60)
        coarse = cx.simplex_grid(3, 0.5)
        fine = cx.simplex_grid(3, 0.25)
        ref = (tensor, labels)
        assert cx.omega_deviation(tensor, labels, idx, ref, coarse) <= cx.omega_deviation(
            tensor, labels, idx, ref, fine
        )
        assert cx.gamma_deviation(tensor, idx, ref, coarse) <= cx.gamma_deviation(
            tensor, idx, ref, fine
        )
