"""The three base score functions (THR, APS, RANK) and tensor assembly.

All scores are oriented higher-is-more-plausible and preserve the label
ordering induced by the probabilities, up to ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProbabilityMatrix, ScoreTensor
from .errors import ContractViolation


@dataclass(frozen=True)
class ScoreMatrix:
    values: np.ndarray  # n x K, higher = more plausible
    name: str

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


def _row_rank_counts(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per entry, how many entries of its own row are strictly below it
    (count_lt) and below-or-equal (count_le).

    Ties are resolved by exact float comparison: entries of a row are sorted,
    tie runs located with ==, and each entry gets its run's start/end rank.
    Also returns the row-sorted values and the sort order for reuse.
    """
    n, k = p.shape
    order = np.argsort(p, axis=1, kind="stable")
    srt = np.take_along_axis(p, order, axis=1)
    idx = np.broadcast_to(np.arange(k), (n, k))
    new_run = np.ones((n, k), dtype=bool)
    new_run[:, 1:] = srt[:, 1:] != srt[:, :-1]
    run_start = np.maximum.accumulate(np.where(new_run, idx, 0), axis=1)
    # next_start[r] = first run boundary strictly after r (k if none)
    t = np.where(new_run, idx, k)
    suffix_min = np.minimum.accumulate(t[:, ::-1], axis=1)[:, ::-1]
    next_start = np.concatenate(
        [suffix_min[:, 1:], np.full((n, 1), k, dtype=np.int64)], axis=1
    )
    count_lt = np.empty((n, k), dtype=np.int64)
    count_le = np.empty((n, k), dtype=np.int64)
    np.put_along_axis(count_lt, order, run_start, axis=1)
    np.put_along_axis(count_le, order, next_start, axis=1)
    return count_lt, count_le, srt, order


def score_thr(P: ProbabilityMatrix) -> ScoreMatrix:
    """Raw probability: s(x, y) = p_y(x)."""
    return ScoreMatrix(P.values.copy(), "thr")


def score_aps(P: ProbabilityMatrix) -> ScoreMatrix:
    """Cumulative mass of classes no more likely than y:
    s(x, y) = sum_{y'} p_{y'}(x) 1{p_{y'}(x) <= p_y(x)}."""
    _, count_le, srt, _ = _row_rank_counts(P.values)
    cum = np.cumsum(srt, axis=1)
    # p_y <= p_y, so count_le >= 1 and cum[count_le - 1] is the inclusive mass
    vals = np.take_along_axis(cum, count_le - 1, axis=1)
    return ScoreMatrix(vals, "aps")


def score_rank(P: ProbabilityMatrix, normalized: bool = True) -> ScoreMatrix:
    """Rank of p_y(x) in its row: count of strictly less likely classes,
    divided by K - 1 when normalized."""
    k = P.n_classes
    if normalized and k < 2:
        raise ContractViolation("normalized RANK requires K >= 2")
    count_lt, _, _, _ = _row_rank_counts(P.values)
    vals = count_lt.astype(np.float64)
    if normalized:
        return ScoreMatrix(vals / (k - 1), "rank")
    return ScoreMatrix(vals, "rank_unnorm")


def minmax_rescale(m: ScoreMatrix) -> ScoreMatrix:
    """Optional per-layer min-max rescale to [0, 1] (constant layers map to 0)."""
    lo, hi = m.values.min(), m.values.max()
    span = hi - lo
    vals = np.zeros_like(m.values) if span == 0 else (m.values - lo) / span
    return ScoreMatrix(vals, m.name)


SCORE_REGISTRY = {
    "thr": score_thr,
    "aps": score_aps,
    "rank": lambda P: score_rank(P, normalized=True),
    "rank_unnorm": lambda P: score_rank(P, normalized=False),
}


def score_by_name(name: str, P: ProbabilityMatrix) -> ScoreMatrix:
    try:
        fn = SCORE_REGISTRY[name]
    except KeyError:
        raise ContractViolation(
            f"unknown score {name!r}; known scores: {sorted(SCORE_REGISTRY)}"
        ) from None
    return fn(P)


def build_score_tensor(matrices: list[ScoreMatrix], rescale: bool = False) -> ScoreTensor:
    """Stack score matrices along the score axis, preserving order and names.

    The same machinery serves both uses: d formulas on one model's
    probabilities, or one formula on d models' probabilities.
    """
    if not matrices:
        raise ContractViolation("need at least one score matrix")
    shape = matrices[0].values.shape
    for m in matrices[1:]:
        if m.values.shape != shape:
            raise ContractViolation(
                f"score matrix {m.name!r} has shape {m.values.shape}, expected {shape}"
            )
    if rescale:
        matrices = [minmax_rescale(m) for m in matrices]
    values = np.stack([m.values for m in matrices], axis=2)
    return ScoreTensor(values, tuple(m.name for m in matrices))
