"""Calibration and evaluation primitives, single-score split conformal
prediction, and weighted-score selection over the simplex grid.

Threshold orientation: scores are higher-is-more-plausible and prediction
sets are upper level sets {y : <w, s(x, y)> >= q}, so the calibrated q is
the k-th LARGEST calibration score with k = ceil((1 + |I|) (1 - alpha)).
A fresh exchangeable sample then lands at or above q with probability at
least k / (|I| + 1) >= 1 - alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LabelVector,
    PredictionSetBatch,
    ScoreTensor,
    SimplexGrid,
    Threshold,
    WeightVector,
)
from .errors import ContractViolation

# cap on floats held by one grid-search chunk (about 80 MB)
_CHUNK_BUDGET = 10_000_000


def _index_array(I, n: int, name: str, allow_empty: bool = False) -> np.ndarray:
    idx = np.asarray(I, dtype=np.int64).ravel()
    if idx.size == 0 and not allow_empty:
        raise ContractViolation(f"{name} must be a nonempty index set")
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ContractViolation(
            f"{name} contains indices outside [0, {n}), range "
            f"[{idx.min()}, {idx.max()}]"
        )
    return idx


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ContractViolation(f"alpha must lie in (0, 1), got {alpha}")


def quantile_index(n: int, alpha: float) -> int:
    """k = ceil((1 + n) (1 - alpha)); the threshold is the k-th largest of n
    calibration scores, degenerate when k > n."""
    return int(math.ceil((1 + n) * (1 - alpha)))


def _kth_largest(v: np.ndarray, k: int) -> float:
    return float(np.partition(v, v.size - k)[v.size - k])


def grid_sweep(
    cal: np.ndarray,
    flat: np.ndarray,
    n_rows: int,
    n_classes: int,
    W: np.ndarray,
    k: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-candidate threshold and total set size, chunked over candidates.

    cal is the (n1, d) matrix of label scores used for thresholds; flat is
    the (n_rows * n_classes, d) matrix of all scores on the evaluation rows.
    The threshold for candidate g is the k-th largest projection of cal
    (-inf when k exceeds n1); totals[g] counts entries of the projected
    evaluation scores at or above it, an exact integer.
    """
    n1 = cal.shape[0]
    G = W.shape[0]
    qs = np.full(G, -np.inf)
    totals = np.zeros(G, dtype=np.int64)
    degenerate = k > n1
    chunk = max(1, _CHUNK_BUDGET // max(1, n_rows * n_classes))
    for lo in range(0, G, chunk):
        hi = min(G, lo + chunk)
        Wc = W[lo:hi]
        if not degenerate:
            v = cal @ Wc.T  # (n1, c)
            qs[lo:hi] = np.partition(v, n1 - k, axis=0)[n1 - k]
        proj = (flat @ Wc.T).reshape(n_rows, n_classes, hi - lo)
        totals[lo:hi] = (proj >= qs[lo:hi]).sum(axis=(0, 1))
    return qs, totals


def calibrate(
    tensor: ScoreTensor,
    labels: LabelVector,
    w: WeightVector,
    I,
    alpha: float,
) -> Threshold:
    """Calibration step: threshold the weighted label scores on index set I.

    Parameters
    ----------
    tensor : ScoreTensor
        Scores for all samples; only rows in I are read.
    labels : LabelVector
        Labels aligned with the tensor rows; only entries in I are read.
    w : WeightVector
        Score-combination weight.
    I : index set
        Calibration indices (nonempty, labeled).
    alpha : float
        Miscoverage level in (0, 1).

    Returns
    -------
    Threshold
        q = k-th largest of {<w, s(x_i, y_i)> : i in I} with
        k = ceil((1 + |I|) (1 - alpha)); degenerate (q = -inf) when k > |I|.
    """
    _check_alpha(alpha)
    idx = _index_array(I, tensor.n_samples, "calibration set")
    if w.d != tensor.n_scores:
        raise ContractViolation(f"weight has d={w.d}, tensor has d={tensor.n_scores}")
    v = tensor.label_scores(labels, idx) @ w.values
    n = v.size
    k = quantile_index(n, alpha)
    if k > n:
        return Threshold(q=-math.inf, alpha=alpha, source_size=n, degenerate=True)
    return Threshold(q=_kth_largest(v, k), alpha=alpha, source_size=n)


def evaluate(tensor: ScoreTensor, w: WeightVector, I, threshold: Threshold) -> PredictionSetBatch:
    """Evaluation step: per-sample upper level sets of the weighted score.

    Needs features only; ties at exactly q are included (>=).
    """
    if w.d != tensor.n_scores:
        raise ContractViolation(f"weight has d={w.d}, tensor has d={tensor.n_scores}")
    idx = _index_array(I, tensor.n_samples, "evaluation set", allow_empty=True)
    proj = tensor.values[idx] @ w.values
    mask = proj >= threshold.q
    return PredictionSetBatch(mask=mask, threshold=threshold, weight=w)


def split_conformal(
    tensor: ScoreTensor,
    labels: LabelVector,
    I_cal,
    I_test,
    alpha: float,
) -> PredictionSetBatch:
    """Single-score split conformal prediction: calibrate on I_cal, then
    evaluate on I_test, with the trivial weight (1). Requires d = 1."""
    if tensor.n_scores != 1:
        raise ContractViolation(
            f"split_conformal needs a single score layer, got d={tensor.n_scores}"
        )
    w = WeightVector((1,), 1)
    q = calibrate(tensor, labels, w, I_cal, alpha)
    return evaluate(tensor, w, I_test, q)


@dataclass(frozen=True)
class WeightSelectionResult:
    """Outcome of the grid search: the chosen weight plus the full sweep.

    sizes[g] is the average prediction-set size S(w_g) on the selection set;
    thresholds_stage1[g] is the calibrated stage-1 threshold for candidate g.
    On ties, argmin_index points at the lexicographically smallest minimizer
    (the grid is stored in lexicographic order, so it is the first one).
    """

    w_hat: WeightVector
    sizes: np.ndarray
    thresholds_stage1: list[Threshold]
    argmin_ties: int
    argmin_index: int
    grid: SimplexGrid

    @property
    def selection_size(self) -> float:
        return float(self.sizes[self.argmin_index])

    def vertex_sizes(self) -> dict[int, float]:
        """S(e_j) for each single-score vertex, by score position j."""
        return {
            j: float(self.sizes[g])
            for j, g in enumerate(self.grid.vertex_indices())
        }


def select_weight(
    tensor: ScoreTensor,
    labels: LabelVector,
    grid: SimplexGrid,
    I1,
    I2,
    alpha: float,
    alpha_prime: float | None = None,
) -> WeightSelectionResult:
    """Grid search: per-candidate stage-1 threshold on I1, average set size
    on I2, argmin with lexicographic tie-break.

    Parameters
    ----------
    tensor, labels : scores and labels for all samples.
    grid : SimplexGrid
        Candidate weights; must match the tensor's score count.
    I1 : index set
        Labeled calibration indices for the stage-1 thresholds.
    I2 : index set
        Selection indices; features only, labels never read.
    alpha : float
        Target miscoverage level.
    alpha_prime : float, optional
        Stricter stage-1 level (<= alpha). Defaults to alpha.

    Returns
    -------
    WeightSelectionResult
        Candidate sizes are exact means of integer set sizes, so ties are
        exact and the argmin is deterministic.
    """
    _check_alpha(alpha)
    level = alpha if alpha_prime is None else alpha_prime
    if alpha_prime is not None:
        _check_alpha(alpha_prime)
        if alpha_prime > alpha:
            raise ContractViolation(
                f"alpha_prime={alpha_prime} must not exceed alpha={alpha}"
            )
    if grid.size == 0:
        raise ContractViolation("empty weight grid")
    if grid.d != tensor.n_scores:
        raise ContractViolation(f"grid has d={grid.d}, tensor has d={tensor.n_scores}")
    i1 = _index_array(I1, tensor.n_samples, "I1")
    i2 = _index_array(I2, tensor.n_samples, "I2")

    cal = tensor.label_scores(labels, i1)  # (n1, d)
    sel = tensor.values[i2]  # (n2, K, d)
    n1, n2, K = i1.size, i2.size, tensor.n_classes
    k = quantile_index(n1, level)
    flat = sel.reshape(n2 * K, tensor.n_scores)
    qs, totals = grid_sweep(cal, flat, n2, K, grid.weights, k)

    best = int(np.argmin(totals))  # first = lexicographically smallest
    ties = int(np.count_nonzero(totals == totals[best]))
    sizes = totals / float(n2)
    thresholds = [
        Threshold(q=float(q), alpha=level, source_size=n1, degenerate=k > n1)
        for q in qs
    ]
    return WeightSelectionResult(
        w_hat=grid[best],
        sizes=sizes,
        thresholds_stage1=thresholds,
        argmin_ties=ties,
        argmin_index=best,
        grid=grid,
    )


def run_pipeline(
    tensor: ScoreTensor,
    labels: LabelVector,
    split,
    grid: SimplexGrid,
    alpha: float,
    alpha_prime: float | None = None,
) -> tuple[PredictionSetBatch, WeightSelectionResult, Threshold]:
    """Full weighted pipeline: select w_hat on (I1, I2), recalibrate on I3,
    evaluate on the test set.

    When I3 equals I1 and the stage-1 level equals alpha, the stage-1
    threshold of w_hat is reused bit-identically instead of recomputed.
    Test labels are never read; `labels` entries at test positions may be
    placeholders.
    """
    selection = select_weight(tensor, labels, grid, split.I1, split.I2, alpha, alpha_prime)
    stage1_level = alpha if alpha_prime is None else alpha_prime
    same_cal_set = split.I1 is split.I3 or np.array_equal(split.I1, split.I3)
    if same_cal_set and stage1_level == alpha:
        q2 = selection.thresholds_stage1[selection.argmin_index]
    else:
        q2 = calibrate(tensor, labels, selection.w_hat, split.I3, alpha)
    sets = evaluate(tensor, selection.w_hat, split.I_test, q2)
    return sets, selection, q2
