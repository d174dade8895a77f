"""Measured uniform-deviation gaps between a sample and a large reference,
plus the VC-type theoretical bounds they are compared against.

Both measurements take a sup over the weight grid and over all real
thresholds q. For fixed w the two empirical tail fractions are step
functions constant on half-open intervals between consecutive observed
projection values, so evaluating the gap at every observed value (the
right endpoint of each interval) attains the sup exactly; beyond the
largest value both tails are 0. Ties are handled by integer counting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LabelVector, ScoreTensor, SimplexGrid
from .errors import ContractViolation


def _sup_tail_gap(a: np.ndarray, b: np.ndarray) -> float:
    """sup over real q of |mean(a >= q) - mean(b >= q)|, exact under ties.

    Both tails are evaluated at every observed value of either array; the
    side="left" search counts entries >= q by exact comparison.
    """
    na, nb = a.size, b.size
    sa = np.sort(a)
    sb = np.sort(b)
    pts = np.concatenate([sa, sb])
    tail_a = (na - np.searchsorted(sa, pts, side="left")) / na
    tail_b = (nb - np.searchsorted(sb, pts, side="left")) / nb
    return float(np.abs(tail_a - tail_b).max(initial=0.0))


def _unwrap_reference(reference) -> tuple[ScoreTensor, LabelVector | None]:
    if isinstance(reference, ScoreTensor):
        return reference, None
    tensor, labels = reference
    return tensor, labels


def _index_array(I, n: int) -> np.ndarray:
    idx = np.asarray(I, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ContractViolation("index set must be nonempty")
    if idx.min() < 0 or idx.max() >= n:
        raise ContractViolation(f"indices outside [0, {n})")
    return idx


def omega_deviation(
    tensor: ScoreTensor,
    labels: LabelVector,
    I,
    reference: tuple[ScoreTensor, LabelVector],
    grid: SimplexGrid,
) -> float:
    """Largest gap between the sample and reference tail fractions of the
    weighted LABEL score, over all grid weights and all thresholds."""
    ref_tensor, ref_labels = _unwrap_reference(reference)
    if ref_labels is None:
        raise ContractViolation("reference labels are required")
    idx = _index_array(I, tensor.n_samples)
    if grid.d != tensor.n_scores or ref_tensor.n_scores != tensor.n_scores:
        raise ContractViolation("grid, sample, and reference must share d")
    a = tensor.label_scores(labels, idx)
    b = ref_tensor.label_scores(ref_labels, np.arange(ref_tensor.n_samples))
    sup = 0.0
    for w in grid.weights:
        sup = max(sup, _sup_tail_gap(a @ w, b @ w))
    return sup


def gamma_deviation(
    tensor: ScoreTensor,
    I,
    reference,
    grid: SimplexGrid,
) -> float:
    """Largest gap between the sample and reference average prediction-set
    SIZE at any (w, q); labels are not used.

    The average size at (w, q) equals K times the tail fraction of the
    flattened n * K projected scores, so the sup is K times the flattened
    tail-gap sup.
    """
    ref_tensor, _ = _unwrap_reference(reference)
    idx = _index_array(I, tensor.n_samples)
    if grid.d != tensor.n_scores or ref_tensor.n_scores != tensor.n_scores:
        raise ContractViolation("grid, sample, and reference must share d")
    K = tensor.n_classes
    if ref_tensor.n_classes != K:
        raise ContractViolation("sample and reference must share K")
    d = tensor.n_scores
    a = tensor.values[idx].reshape(idx.size * K, d)
    b = ref_tensor.values.reshape(ref_tensor.n_samples * K, d)
    sup = 0.0
    for w in grid.weights:
        sup = max(sup, _sup_tail_gap(a @ w, b @ w))
    return K * sup


def vc_bound(n: int, d: int, delta: float, K: int | None = None) -> tuple[float, float]:
    """Theoretical high-probability deviation levels:
    eta = 8 sqrt((d+1) ln(n+1) / n) + delta for coverage indicators and
    xi = K * (same sqrt term) * ... = 8K sqrt((d+1) ln(n+1)/n) + K delta
    for set sizes; each holds with probability >= 1 - exp(-n delta^2 / 2).
    """
    if n < 1 or d < 1 or not delta > 0:
        raise ContractViolation(
            f"need n >= 1, d >= 1, delta > 0; got n={n}, d={d}, delta={delta}"
        )
    kk = 1 if K is None else K
    if kk < 1:
        raise ContractViolation(f"K must be >= 1, got {K}")
    root = math.sqrt((d + 1) * math.log(n + 1) / n)
    return 8.0 * root + delta, 8.0 * kk * root + kk * delta


@dataclass(frozen=True)
class DeviationReport:
    """Measured deviations plus the context needed to interpret them.

    The sup is taken over the finite weight grid actually used by the
    selection algorithm (grid_size members), not all of R^d, and the
    population is approximated by a reference sample of reference_size
    rows, adding O(1/sqrt(reference_size)) slack.
    """

    eta_hat: float
    xi_hat: float
    n: int
    d: int
    n_classes: int
    grid_size: int
    reference_size: int

    def bound_eta(self, delta: float) -> float:
        return vc_bound(self.n, self.d, delta)[0]

    def bound_xi(self, delta: float) -> float:
        return vc_bound(self.n, self.d, delta, self.n_classes)[1]


def deviation_report(
    tensor: ScoreTensor,
    labels: LabelVector,
    I,
    reference: tuple[ScoreTensor, LabelVector],
    grid: SimplexGrid,
) -> DeviationReport:
    """Measure both deviations on the same sample/reference pair."""
    ref_tensor, _ = _unwrap_reference(reference)
    idx = _index_array(I, tensor.n_samples)
    return DeviationReport(
        eta_hat=omega_deviation(tensor, labels, idx, reference, grid),
        xi_hat=gamma_deviation(tensor, idx, reference, grid),
        n=idx.size,
        d=tensor.n_scores,
        n_classes=tensor.n_classes,
        grid_size=grid.size,
        reference_size=ref_tensor.n_samples,
    )
