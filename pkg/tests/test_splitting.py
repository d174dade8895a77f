import numpy as np
import pytest

import conformix as cx
from conformix.errors import ContractViolation
from conformix.splitting import RNG_ALGORITHM, STRATEGIES


def as_set(idx):
    return set(np.asarray(idx).tolist())


class TestStrategyIdentities:
    @pytest.mark.parametrize("n_train,n_test,seed", [(10, 4, 0), (257, 31, 7), (2, 1, 99)])
    def test_vfcp(self, n_train, n_test, seed):
        s = cx.make_split("vfcp", n_train, n_test, seed=seed)
        assert np.array_equal(s.I1, s.I2)
        assert as_set(s.I1) & as_set(s.I3) == set()
        assert as_set(s.I1) | as_set(s.I3) == set(range(n_train))
        assert np.array_equal(s.I_test, np.arange(n_train, n_train + n_test))
        assert np.array_equal(s.I1, np.sort(s.I1))
        assert np.array_equal(s.I3, np.sort(s.I3))

    @pytest.mark.parametrize("n_train,n_test", [(10, 4), (257, 31)])
    def test_efcp(self, n_train, n_test):
        s = cx.make_split("efcp", n_train, n_test)
        train = np.arange(n_train)
        for part in (s.I1, s.I2, s.I3):
            assert np.array_equal(part, train)
        assert np.array_equal(s.I_test, np.arange(n_train, n_train + n_test))

    @pytest.mark.parametrize("n_train,n_test", [(10, 4), (257, 31)])
    def test_dlcp(self, n_train, n_test):
        s = cx.make_split("dlcp", n_train, n_test)
        assert np.array_equal(s.I1, np.arange(n_train))
        assert np.array_equal(s.I3, np.arange(n_train))
        assert np.array_equal(s.I2, s.I_test)

    @pytest.mark.parametrize("n_train,n_test", [(10, 4), (257, 31)])
    def test_dlcp_plus(self, n_train, n_test):
        s = cx.make_split("dlcp+", n_train, n_test)
        assert np.array_equal(s.I1, np.arange(n_train))
        assert np.array_equal(s.I3, np.arange(n_train))
        assert np.array_equal(s.I2, np.arange(n_train + n_test))

    def test_test_rows_never_calibrate(self):
        # I1 and I3 stay inside train for every strategy; only I2 may
        # reach into test rows, where labels are not read.
        for strat in STRATEGIES:
            s = cx.make_split(strat, 50, 20, seed=1)
            assert as_set(s.I1) <= set(range(50))
            assert as_set(s.I3) <= set(range(50))


class TestDeterminism:
    def test_same_seed_same_split(self):
        a = cx.make_split("vfcp", 100, 10, seed=42)
        b = cx.make_split("vfcp", 100, 10, seed=42)
        assert np.array_equal(a.I1, b.I1) and np.array_equal(a.I3, b.I3)

    def test_different_seed_different_half(self):
        a = cx.make_split("vfcp", 100, 10, seed=1)
        b = cx.make_split("vfcp", 100, 10, seed=2)
        assert not np.array_equal(a.I1, b.I1)

    def test_rng_algorithm_constant(self):
        assert RNG_ALGORITHM == "numpy-pcg64"

    def test_vfcp_ratio(self):
        s = cx.make_split("vfcp", 100, 10, vfcp_ratio=0.3, seed=0)
        assert s.I1.size == 30 and s.I3.size == 70


class TestValidation:
    def test_unknown_strategy(self):
        with pytest.raises(ContractViolation):
            cx.make_split("jackknife", 10, 5)

    def test_tiny_inputs(self):
        with pytest.raises(ContractViolation):
            cx.make_split("vfcp", 1, 5)
        with pytest.raises(ContractViolation):
            cx.make_split("efcp", 10, 0)

    def test_bad_ratio(self):
        with pytest.raises(ContractViolation):
            cx.make_split("vfcp", 10, 5, vfcp_ratio=0.0)
        with pytest.raises(ContractViolation):
            cx.make_split("vfcp", 10, 5, vfcp_ratio=1.0)
        with pytest.raises(ContractViolation):
            cx.make_split("vfcp", 3, 5, vfcp_ratio=0.01)

    def test_case_insensitive(self):
        s = cx.make_split("EFCP", 10, 5)
        assert s.strategy == "efcp"


class TestSelectionIndependence:
    def test_vfcp_selection_ignores_i3_and_test_rows(self, small_task):
        """Shuffling rows outside I1 = I2 leaves the selected weight and its
        stage-1 threshold bit-identical."""
        tensor, labels, _, _ = small_task
        split = cx.make_split("vfcp", 1000, 500, seed=11)
        g = cx.simplex_grid(3, 0.25)
        res_a = cx.select_weight(tensor, labels, g, split.I1, split.I2, 0.1)

        other = np.setdiff1d(np.arange(1500), split.I1)
        perm = np.random.default_rng(0).permutation(other)
        vals = tensor.values.copy()
        labs = labels.labels.copy()
        vals[other] = vals[perm]
        labs[other] = labs[perm]
        shuffled = cx.ScoreTensor(vals, tensor.score_names)
        res_b = cx.select_weight(
            shuffled, cx.LabelVector(labs, 10), g, split.I1, split.I2, 0.1
        )
        assert res_a.w_hat.coords == res_b.w_hat.coords
        assert res_a.thresholds_stage1[res_a.argmin_index].q == pytest.approx(
            res_b.thresholds_stage1[res_b.argmin_index].q, abs=0
        )
        assert np.array_equal(res_a.sizes, res_b.sizes)
