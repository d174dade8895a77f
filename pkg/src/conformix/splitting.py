"""Index-set construction for the four data-splitting strategies.

Samples are laid out as train rows 0..n_train-1 followed by test rows
n_train..n_train+n_test-1. Test labels are never needed to build a split:
I2 may include test indices (DLCP, DLCP+), but selection only reads
features there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

STRATEGIES = ("vfcp", "efcp", "dlcp", "dlcp+")

RNG_ALGORITHM = "numpy-pcg64"  # recorded in results metadata


@dataclass(frozen=True)
class IndexSplit:
    """The four index sets of one run: stage-1 calibration (I1), weight
    selection (I2), final calibration (I3), and the held-out test set."""

    strategy: str
    I1: np.ndarray
    I2: np.ndarray
    I3: np.ndarray
    I_test: np.ndarray
    seed: int
    vfcp_ratio: float = 0.5

    @property
    def n_train(self) -> int:
        return self.I1.size if self.strategy != "vfcp" else self.I1.size + self.I3.size


def make_split(
    strategy: str,
    n_train: int,
    n_test: int,
    vfcp_ratio: float = 0.5,
    seed: int = 0,
) -> IndexSplit:
    """Build the index sets for one strategy.

    Parameters
    ----------
    strategy : {"vfcp", "efcp", "dlcp", "dlcp+"}
        vfcp: I1 = I2 = a seeded random half of train, I3 = the rest.
        efcp: I1 = I2 = I3 = all of train.
        dlcp: I1 = I3 = train, I2 = test.
        dlcp+: I1 = I3 = train, I2 = train and test together.
    n_train, n_test : int
        Row counts; train rows precede test rows.
    vfcp_ratio : float
        Fraction of train assigned to I1 under vfcp, in (0, 1).
    seed : int
        Seeds the vfcp shuffle; other strategies are deterministic.

    Returns
    -------
    IndexSplit
        Immutable index sets satisfying the strategy's identities.
    """
    strategy = strategy.lower()
    if strategy not in STRATEGIES:
        raise ContractViolation(
            f"unknown strategy {strategy!r}; known: {list(STRATEGIES)}"
        )
    if n_train < 2:
        raise ContractViolation(f"n_train must be >= 2, got {n_train}")
    if n_test < 1:
        raise ContractViolation(f"n_test must be >= 1, got {n_test}")
    train = np.arange(n_train, dtype=np.int64)
    test = np.arange(n_train, n_train + n_test, dtype=np.int64)

    if strategy == "vfcp":
        if not 0.0 < vfcp_ratio < 1.0:
            raise ContractViolation(f"vfcp_ratio must be in (0, 1), got {vfcp_ratio}")
        n1 = int(round(n_train * vfcp_ratio))
        if n1 < 1 or n1 >= n_train:
            raise ContractViolation(
                f"vfcp_ratio={vfcp_ratio} leaves an empty partition for n_train={n_train}"
            )
        rng = np.random.default_rng(seed)
        perm = rng.permutation(n_train)
        i1 = np.sort(train[perm[:n1]])
        i3 = np.sort(train[perm[n1:]])
        return IndexSplit("vfcp", i1, i1, i3, test, seed, vfcp_ratio)
    if strategy == "efcp":
        return IndexSplit("efcp", train, train, train, test, seed, vfcp_ratio)
    if strategy == "dlcp":
        return IndexSplit("dlcp", train, test, train, test, seed, vfcp_ratio)
    # dlcp+
    both = np.arange(n_train + n_test, dtype=np.int64)
    return IndexSplit("dlcp+", train, both, train, test, seed, vfcp_ratio)
