"""Synthetic multi-class tasks with known ground truth, and brute-force
oracles for the population-optimal weight on a large Monte Carlo proxy.

Rows of the true conditional are softmax(concentration * z) with standard
normal z, so `concentration` controls how peaked the classes are. The
estimated probabilities equal the truth when miscalibration is 0 and are
otherwise distorted by per-entry log-scale noise and renormalized, which
keeps no single score function automatically optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conformal import grid_sweep
from .core import (
    LabelVector,
    ProbabilityMatrix,
    ScoreTensor,
    SimplexGrid,
    WeightVector,
)
from .errors import ContractViolation

ORACLE_SAMPLE_FLOOR = 50_000


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic task."""

    n_classes: int
    n_samples: int
    concentration: float = 2.0
    miscalibration: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ContractViolation(f"need at least 2 classes, got {self.n_classes}")
        if self.n_samples < 1:
            raise ContractViolation(f"need at least 1 sample, got {self.n_samples}")
        if not self.concentration > 0:
            raise ContractViolation(f"concentration must be > 0, got {self.concentration}")
        if self.miscalibration < 0:
            raise ContractViolation(
                f"miscalibration must be >= 0, got {self.miscalibration}"
            )


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def generate(spec: SyntheticSpec) -> tuple[ProbabilityMatrix, LabelVector, ProbabilityMatrix]:
    """Draw (p_hat, labels, true_conditional) for one synthetic task.

    Labels are drawn from the TRUE conditional row by inverse CDF; p_hat is
    the truth itself when miscalibration is 0 (bit-exact copy), otherwise
    softmax(log(truth) + miscalibration * noise).
    """
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n_samples, spec.n_classes
    z = rng.standard_normal((n, k))
    true = _softmax_rows(spec.concentration * z)
    u = rng.random(n)
    labels = np.minimum((u[:, None] >= np.cumsum(true, axis=1)).sum(axis=1), k - 1)
    if spec.miscalibration == 0:
        p_hat = true.copy()
    else:
        noise = rng.standard_normal((n, k))
        with np.errstate(divide="ignore"):  # log(0) -> -inf is a valid one-hot row
            logp = np.log(true)
        p_hat = _softmax_rows(logp + spec.miscalibration * noise)
    return (
        ProbabilityMatrix(p_hat),
        LabelVector(labels, k),
        ProbabilityMatrix(true),
    )


@dataclass(frozen=True)
class OracleResult:
    """Constrained minimizer of the expected prediction-set size over the
    grid, measured on the proxy sample.

    sizes and thresholds carry the full per-candidate sweep so callers can
    verify the lower-envelope property or freeze regression fixtures.
    """

    w_star: WeightVector
    q_star: float
    expected_size: float
    achieved_coverage: float
    coverage_target: float
    sizes: np.ndarray
    thresholds: np.ndarray


def oracle_at_coverage(
    grid: SimplexGrid,
    large_sample: tuple[ScoreTensor, LabelVector],
    coverage: float,
    min_sample: int = ORACLE_SAMPLE_FLOOR,
) -> OracleResult:
    """Sweep the grid on the proxy sample at an arbitrary coverage target.

    For each candidate w, q(w) is the largest observed value with empirical
    P(<w, s(X, Y)> >= q) >= coverage, i.e. the ceil(m * coverage)-th largest
    label score; a target above 1 is infeasible and yields q = -inf (full
    sets). The minimizer ties break to the lexicographically smallest
    candidate.
    """
    tensor, labels = large_sample
    m = tensor.n_samples
    if m < min_sample:
        raise ContractViolation(
            f"oracle proxy sample has {m} rows, below the floor {min_sample}"
        )
    if not coverage > 0:
        raise ContractViolation(f"coverage target must be positive, got {coverage}")
    if grid.size == 0:
        raise ContractViolation("empty weight grid")
    if grid.d != tensor.n_scores:
        raise ContractViolation(f"grid has d={grid.d}, tensor has d={tensor.n_scores}")

    K = tensor.n_classes
    all_idx = np.arange(m)
    cal = tensor.label_scores(labels, all_idx)
    flat = tensor.values.reshape(m * K, tensor.n_scores)
    k = int(math.ceil(m * coverage))  # k > m marks an infeasible target
    qs, totals = grid_sweep(cal, flat, m, K, grid.weights, k)

    best = int(np.argmin(totals))
    w_star = grid[best]
    q_star = float(qs[best])
    achieved = float(np.mean(cal @ w_star.values >= q_star))
    return OracleResult(
        w_star=w_star,
        q_star=q_star,
        expected_size=float(totals[best]) / m,
        achieved_coverage=achieved,
        coverage_target=coverage,
        sizes=totals / float(m),
        thresholds=qs,
    )


def oracle_weight(
    grid: SimplexGrid,
    large_sample: tuple[ScoreTensor, LabelVector],
    alpha: float,
    min_sample: int = ORACLE_SAMPLE_FLOOR,
) -> OracleResult:
    """Population-oracle sweep at miscoverage alpha in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ContractViolation(f"alpha must lie in (0, 1), got {alpha}")
    return oracle_at_coverage(grid, large_sample, 1.0 - alpha, min_sample)
