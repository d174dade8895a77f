import numpy as np
import pytest

import conformix as cx


@pytest.fixture(scope="session")
def small_task():
    """Fixed miscalibrated 10-class task shared by read-only tests."""
    spec = cx.SyntheticSpec(
        n_classes=10, n_samples=1500, concentration=2.0, miscalibration=1.0, seed=42
    )
    p_hat, labels, true = cx.generate(spec)
    tensor = cx.build_score_tensor(
        [cx.score_thr(p_hat), cx.score_aps(p_hat), cx.score_rank(p_hat)]
    )
    return tensor, labels, p_hat, true


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_probability_rows(rng, n, k, quantize=None):
    """Random probability matrix; quantize to a coarse grid to force ties."""
    raw = rng.random((n, k)) + 1e-9
    if quantize:
        raw = np.ceil(raw * quantize)
    return raw / raw.sum(axis=1, keepdims=True)
