"""Domain types and the weighted-score primitive.

Weights live on the probability simplex and are stored as integer grid
coordinates (k_1, ..., k_d) with sum(k_j) = m, so that sum-to-one holds
exactly in the integer representation; floats appear only when scores are
combined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ContractViolation

ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Per-sample class-probability estimates, one row per sample.

    Rows must already be valid distributions; renormalization of slightly
    off rows is the loader's job, not this type's.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] < 2:
            raise ContractViolation(
                f"probability matrix must be 2-D with at least 2 classes, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ContractViolation("probability matrix contains non-finite entries")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ContractViolation("probability entries must lie in [0, 1]")
        sums = v.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise ContractViolation(
                f"row {i} sums to {sums[i]:.8f}, outside 1 +/- {ROW_SUM_TOL}"
            )
        object.__setattr__(self, "values", v)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """0-based integer labels paired with a class count."""

    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1:
            raise ContractViolation(f"labels must be 1-D, got shape {lab.shape}")
        if lab.size and (lab.min() < 0 or lab.max() >= self.n_classes):
            raise ContractViolation(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{lab.min()}, {lab.max()}]"
            )
        object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class ScoreTensor:
    """n_samples x K x d array of scores s_j(x_i, y), higher = more plausible."""

    values: np.ndarray
    score_names: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or v.shape[2] < 1:
            raise ContractViolation(f"score tensor must be n x K x d, got shape {v.shape}")
        if len(self.score_names) != v.shape[2]:
            raise ContractViolation(
                f"{len(self.score_names)} score names for d={v.shape[2]} layers"
            )
        if not np.all(np.isfinite(v)):
            raise ContractViolation("score tensor contains non-finite entries")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "score_names", tuple(self.score_names))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]

    @property
    def n_scores(self) -> int:
        return self.values.shape[2]

    def layer(self, name: str) -> np.ndarray:
        """Single score layer as an n x K matrix."""
        if name not in self.score_names:
            raise ContractViolation(
                f"unknown score layer {name!r}; have {list(self.score_names)}"
            )
        return self.values[:, :, self.score_names.index(name)]

    def label_scores(self, labels: LabelVector, idx: np.ndarray) -> np.ndarray:
        """s(x_i, y_i) for i in idx, as a |idx| x d matrix."""
        idx = np.asarray(idx, dtype=np.int64)
        return self.values[idx, labels.labels[idx], :]


@dataclass(frozen=True, order=True)
class WeightVector:
    """Simplex weight stored as integer coordinates over a common denominator.

    Ordering is lexicographic on the coordinates, which is what every
    tie-break in the package uses.
    """

    coords: tuple[int, ...]
    denom: int = field(compare=False)

    def __post_init__(self):
        if self.denom < 1 or any(k < 0 for k in self.coords):
            raise ContractViolation("weight coordinates must be non-negative, denom >= 1")
        if sum(self.coords) != self.denom:
            raise ContractViolation(
                f"coordinates {self.coords} do not sum to denominator {self.denom}"
            )

    @property
    def d(self) -> int:
        return len(self.coords)

    @cached_property
    def values(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64) / self.denom

    @classmethod
    def vertex(cls, j: int, d: int, denom: int = 1) -> "WeightVector":
        """e_j: all mass on score j."""
        if not 0 <= j < d:
            raise ContractViolation(f"vertex index {j} out of range for d={d}")
        coords = [0] * d
        coords[j] = denom
        return cls(tuple(coords), denom)

    @classmethod
    def from_floats(cls, w, denom: int = 10**6) -> "WeightVector":
        """Snap a float vector on the simplex to the rational representation."""
        w = np.asarray(w, dtype=np.float64)
        if w.ndim != 1 or w.size < 1 or w.min() < 0:
            raise ContractViolation("weights must be a non-negative 1-D vector")
        total = w.sum()
        if total <= 0 or abs(total - 1.0) > 1e-6:
            raise ContractViolation(f"weights must sum to 1 within 1e-6, got {total}")
        k = np.floor(w / total * denom).astype(np.int64)
        # distribute the remainder to the largest fractional parts
        rem = denom - int(k.sum())
        frac = w / total * denom - k
        for j in np.argsort(-frac)[:rem]:
            k[j] += 1
        return cls(tuple(int(x) for x in k), denom)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{v:g}" for v in self.values) + ")"


def _prepend_all(r: int, level: list[np.ndarray]) -> np.ndarray:
    """Compositions of r with one extra leading part k = 0..r, given the
    per-remainder compositions of the previous level; lexicographic."""
    subs = [level[r - k] for k in range(r + 1)]
    counts = [s.shape[0] for s in subs]
    first = np.repeat(np.arange(r + 1, dtype=np.int64), counts)
    return np.column_stack([first, np.vstack(subs)])


def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer compositions of `total` into `parts` parts,
    lexicographically ascending, as a (count x parts) int array.

    Built bottom-up: level p holds the compositions of every remainder
    0..total into p parts, so nothing is enumerated twice.
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    level = [np.array([[r]], dtype=np.int64) for r in range(total + 1)]
    for _ in range(parts - 2):
        level = [_prepend_all(r, level) for r in range(total + 1)]
    return _prepend_all(total, level)


@dataclass(frozen=True)
class SimplexGrid:
    """epsilon-grid over the probability simplex in d dimensions.

    Coordinates are kept as one (count x d) integer array; `members` is the
    same grid materialized as WeightVector objects on first access.
    """

    epsilon: float
    d: int
    coords: np.ndarray
    denom: int

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> WeightVector:
        return WeightVector(tuple(int(k) for k in self.coords[i]), self.denom)

    def __iter__(self):
        for i in range(self.size):
            yield self[i]

    @cached_property
    def members(self) -> list[WeightVector]:
        return [self[i] for i in range(self.size)]

    @cached_property
    def weights(self) -> np.ndarray:
        """Float weight matrix (count x d), rows summing to 1."""
        return self.coords.astype(np.float64) / self.denom

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(k) for k in row): i for i, row in enumerate(self.coords)}

    def index_of(self, w: WeightVector) -> int:
        try:
            return self._index[w.coords]
        except KeyError:
            raise ContractViolation(f"{w} is not a member of this grid") from None

    def vertex_indices(self) -> list[int]:
        """Grid positions of the d single-score vertices e_1..e_d."""
        return [self.index_of(WeightVector.vertex(j, self.d, self.denom)) for j in range(self.d)]


def simplex_grid(d: int, epsilon: float = 0.01) -> SimplexGrid:
    """Enumerate the weight grid {(k_1 eps, ..., k_d eps) : sum k_j = floor(1/eps)}.

    Parameters
    ----------
    d : int
        Number of score functions (>= 1).
    epsilon : float
        Grid resolution in (0, 1]; the denominator is floor(1/epsilon).

    Returns
    -------
    SimplexGrid
        binomial(floor(1/eps) + d - 1, d - 1) weight vectors in
        lexicographic order of their integer coordinates.
    """
    if d < 1:
        raise ContractViolation(f"d must be >= 1, got {d}")
    if not 0 < epsilon <= 1:
        raise ContractViolation(f"epsilon must be in (0, 1], got {epsilon}")
    denom = int(math.floor(1.0 / epsilon))
    coords = _compositions(denom, d)
    return SimplexGrid(epsilon=epsilon, d=d, coords=coords, denom=denom)


def grid_cardinality(d: int, epsilon: float) -> int:
    """binomial(floor(1/eps) + d - 1, d - 1), without enumerating."""
    if d < 1 or not 0 < epsilon <= 1:
        raise ContractViolation("d must be >= 1 and epsilon in (0, 1]")
    m = int(math.floor(1.0 / epsilon))
    return math.comb(m + d - 1, d - 1)


@dataclass(frozen=True)
class Threshold:
    """Calibrated cutoff: labels with weighted score >= q enter the set.

    `degenerate` marks the case where the required order statistic does not
    exist (k > |I|); q is then -inf and every prediction set is all of [K].
    """

    q: float
    alpha: float
    source_size: int
    degenerate: bool = False


@dataclass(frozen=True)
class PredictionSetBatch:
    """Per-sample label sets as a boolean n x K mask, plus their provenance."""

    mask: np.ndarray
    threshold: Threshold
    weight: WeightVector

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2:
            raise ContractViolation(f"mask must be 2-D, got shape {m.shape}")
        object.__setattr__(self, "mask", m)

    def __len__(self) -> int:
        return self.mask.shape[0]

    @property
    def n_classes(self) -> int:
        return self.mask.shape[1]

    def sizes(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def contains(self, labels: np.ndarray) -> np.ndarray:
        """Boolean per-sample indicator that the given label is in the set."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (len(self),):
            raise ContractViolation(
                f"{labels.shape[0] if labels.ndim else 0} labels for {len(self)} sets"
            )
        return self.mask[np.arange(len(self)), labels]

    def label_lists(self) -> list[list[int]]:
        return [np.flatnonzero(row).tolist() for row in self.mask]


def weighted_score(tensor: ScoreTensor, w: WeightVector, i: int, y: int) -> float:
    """<w, s(x_i, y)> = sum_j w_j s_j(x_i, y) for one (sample, label) pair."""
    if w.d != tensor.n_scores:
        raise ContractViolation(f"weight has d={w.d}, tensor has d={tensor.n_scores}")
    if not 0 <= i < tensor.n_samples:
        raise ContractViolation(f"sample index {i} out of range")
    if not 0 <= y < tensor.n_classes:
        raise ContractViolation(f"label {y} out of range")
    return float(tensor.values[i, y, :] @ w.values)
