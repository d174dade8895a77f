"""Independent reference implementations used by the tests.

Everything here is written as plain loops over definitions, deliberately
slow and simple, so library results can be checked against an
implementation with no shared code or shared failure modes.
"""

from __future__ import annotations

import math

import numpy as np


def oracle_kth_largest_threshold(scores, alpha: float):
    """Sort-based calibration: k = ceil((1 + n)(1 - alpha)); the k-th
    largest score, or -inf when k exceeds n."""
    v = sorted(float(x) for x in scores)
    n = len(v)
    k = math.ceil((1 + n) * (1 - alpha))
    if k > n:
        return -math.inf, True
    return v[n - k], False


def oracle_thr(p: np.ndarray) -> np.ndarray:
    return np.array([[p[i, y] for y in range(p.shape[1])] for i in range(p.shape[0])])


def oracle_aps(p: np.ndarray) -> np.ndarray:
    n, k = p.shape
    out = np.zeros((n, k))
    for i in range(n):
        for y in range(k):
            out[i, y] = sum(p[i, yp] for yp in range(k) if p[i, yp] <= p[i, y])
    return out


def oracle_rank(p: np.ndarray, normalized: bool) -> np.ndarray:
    n, k = p.shape
    out = np.zeros((n, k))
    for i in range(n):
        for y in range(k):
            count = sum(1 for yp in range(k) if p[i, yp] < p[i, y])
            out[i, y] = count / (k - 1) if normalized else count
    return out


def oracle_set_sizes(mask: np.ndarray) -> list[int]:
    return [int(sum(1 for v in row if v)) for row in mask]


def oracle_coverage(mask: np.ndarray, labels) -> float:
    hits = sum(1 for i, y in enumerate(labels) if mask[i, int(y)])
    return hits / len(labels)


def oracle_std(xs) -> float:
    xs = [float(x) for x in xs]
    n = len(xs)
    if n < 2:
        return 0.0
    mean = sum(xs) / n
    return math.sqrt(sum((x - mean) ** 2 for x in xs) / (n - 1))


def oracle_tail_gap(a, b) -> float:
    """sup over q of |mean(a >= q) - mean(b >= q)| by direct evaluation at
    every observed value."""
    best = 0.0
    for q in list(a) + list(b):
        fa = sum(1 for x in a if x >= q) / len(a)
        fb = sum(1 for x in b if x >= q) / len(b)
        best = max(best, abs(fa - fb))
    return best


def oracle_size_gap(scores_a, scores_b, w) -> float:
    """sup over q of the average-set-size gap for one weight; scores_* are
    (n, K, d) arrays."""
    proj_a = [[float(np.dot(scores_a[i, y], w)) for y in range(scores_a.shape[1])]
              for i in range(scores_a.shape[0])]
    proj_b = [[float(np.dot(scores_b[i, y], w)) for y in range(scores_b.shape[1])]
              for i in range(scores_b.shape[0])]
    qs = [v for row in proj_a for v in row] + [v for row in proj_b for v in row]
    best = 0.0
    for q in qs:
        sa = sum(1 for row in proj_a for v in row if v >= q) / len(proj_a)
        sb = sum(1 for row in proj_b for v in row if v >= q) / len(proj_b)
        best = max(best, abs(sa - sb))
    return best


def oracle_weighted_pipeline(values, labels, I1, I2, I3, I_test, weights, alpha):
    """Straight-line reimplementation of the two-stage pipeline for one
    run: grid search on (I1, I2), recalibration on I3, evaluation on
    I_test. `values` is the (n, K, d) score array, `weights` a list of
    weight vectors (floats). Returns (mask over I_test, chosen index, q2).
    """
    n1 = len(I1)
    k1 = math.ceil((1 + n1) * (1 - alpha))
    best_idx, best_size = None, None
    for gi, w in enumerate(weights):
        if k1 > n1:
            q = -math.inf
        else:
            cal = sorted(float(np.dot(values[i, labels[i]], w)) for i in I1)
            q = cal[n1 - k1]
        total = 0
        for i in I2:
            for y in range(values.shape[1]):
                if float(np.dot(values[i, y], w)) >= q:
                    total += 1
        size = total / len(I2)
        if best_size is None or size < best_size:
            best_idx, best_size = gi, size
    w = weights[best_idx]
    n3 = len(I3)
    k3 = math.ceil((1 + n3) * (1 - alpha))
    if k3 > n3:
        q2 = -math.inf
    else:
        cal3 = sorted(float(np.dot(values[i, labels[i]], w)) for i in I3)
        q2 = cal3[n3 - k3]
    mask = np.zeros((len(I_test), values.shape[1]), dtype=bool)
    for r, i in enumerate(I_test):
        for y in range(values.shape[1]):
            mask[r, y] = float(np.dot(values[i, y], w)) >= q2
    return mask, best_idx, q2
