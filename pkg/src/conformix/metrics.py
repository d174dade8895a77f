"""Coverage and size metrics, the repeated-split experiment harness, and
summary aggregation.

One experiment fixes the probability matrices and varies only the index
split across runs: run r permutes the rows with seed_r, takes the first
block as train and the rest as test, builds the strategy's split, and runs
the full pipeline. Single-score baselines run under a VFCP split with
calibration on I3, so every method sees the same randomness per run.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conformal import run_pipeline, split_conformal
from .core import LabelVector, PredictionSetBatch, ScoreTensor, simplex_grid
from .errors import ConfigError, ContractViolation
from .scores import SCORE_REGISTRY, ScoreMatrix, build_score_tensor, score_by_name
from .splitting import RNG_ALGORITHM, STRATEGIES, make_split


@dataclass(frozen=True)
class RunRecord:
    """One (method, alpha, split) outcome."""

    method: str
    alpha: float
    coverage: float
    avg_size: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.coverage <= 1.0:
            raise ContractViolation(f"coverage {self.coverage} outside [0, 1]")
        if self.avg_size < 0.0:
            raise ContractViolation(f"avg_size {self.avg_size} negative")


@dataclass(frozen=True)
class SummaryRow:
    """Aggregate over runs of one (method, alpha) cell: mean (std)."""

    method: str
    alpha: float
    coverage_mean: float
    coverage_std: float
    size_mean: float
    size_std: float
    n_runs: int

    def __post_init__(self):
        if self.n_runs < 1:
            raise ContractViolation("summary needs at least one run")


@dataclass(frozen=True)
class SelectionRecord:
    """Weight-selection outcome of one weighted run, for audit output.

    best_vertex_size is the smallest selection-set size among the
    single-score vertices, so selection_size <= best_vertex_size by
    construction of the argmin.
    """

    method: str
    alpha: float
    seed: int
    weight: tuple[float, ...]
    selection_size: float
    best_vertex_size: float
    argmin_ties: int


def coverage(sets: PredictionSetBatch, labels) -> float:
    """Fraction of samples whose label is inside its prediction set."""
    if isinstance(labels, LabelVector):
        labels = labels.labels
    return float(sets.contains(np.asarray(labels, dtype=np.int64)).mean())


def avg_size(sets: PredictionSetBatch) -> float:
    """Mean cardinality of the prediction sets."""
    if len(sets) == 0:
        raise ContractViolation("average size of an empty batch is undefined")
    return float(sets.sizes().mean())


def _std(x: np.ndarray) -> float:
    # sample standard deviation; a single run has no spread to estimate
    return float(np.std(x, ddof=1)) if x.size > 1 else 0.0


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    """Aggregate records per (method, alpha), sorted by that key."""
    cells: dict[tuple[str, float], list[RunRecord]] = {}
    for r in records:
        cells.setdefault((r.method, r.alpha), []).append(r)
    rows = []
    for (method, alpha) in sorted(cells):
        cov = np.array([r.coverage for r in cells[(method, alpha)]])
        size = np.array([r.avg_size for r in cells[(method, alpha)]])
        rows.append(
            SummaryRow(
                method=method,
                alpha=alpha,
                coverage_mean=float(cov.mean()),
                coverage_std=_std(cov),
                size_mean=float(size.mean()),
                size_std=_std(size),
                n_runs=cov.size,
            )
        )
    return rows


@dataclass(frozen=True)
class ExperimentResult:
    records: list[RunRecord]
    summaries: list[SummaryRow]
    selections: list[SelectionRecord]
    metadata: dict = field(default_factory=dict)


def build_experiment_tensor(
    matrices: list,
    source_names: list[str],
    score_names: tuple[str, ...],
) -> ScoreTensor:
    """Assemble the score tensor for an experiment.

    One probability source: layers are the named scores of that source.
    Several sources: layers are ONE score applied to each source
    (model-weighting mode), named "score:source".
    """
    if not matrices:
        raise ConfigError("no probability sources")
    for name in score_names:
        if name not in SCORE_REGISTRY:
            raise ConfigError(
                f"unknown score {name!r}; known scores: {sorted(SCORE_REGISTRY)}"
            )
    if len(matrices) == 1:
        layers = [score_by_name(name, matrices[0]) for name in score_names]
        return build_score_tensor(layers)
    if len(score_names) != 1:
        raise ConfigError(
            "model-weighting mode (several sources) takes exactly one score, "
            f"got {list(score_names)}"
        )
    score = score_names[0]
    layers = [
        ScoreMatrix(score_by_name(score, m).values, f"{score}:{src}")
        for m, src in zip(matrices, source_names)
    ]
    return build_score_tensor(layers)


def _single_run(
    tensor: ScoreTensor,
    labels: LabelVector,
    config,
    methods: list[str],
    seed: int,
    n_train: int,
) -> tuple[list[RunRecord], list[SelectionRecord]]:
    n = tensor.n_samples
    n_test = n - n_train
    K = tensor.n_classes
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    tensor_r = ScoreTensor(tensor.values[perm], tensor.score_names)
    labels_r = LabelVector(labels.labels[perm], K)
    test_labels = labels_r.labels[n_train:]
    grid = simplex_grid(tensor.n_scores, config.grid_epsilon)

    records: list[RunRecord] = []
    selections: list[SelectionRecord] = []
    for method in methods:
        if method in STRATEGIES:
            for alpha in config.alphas:
                split = make_split(method, n_train, n_test, config.vfcp_ratio, seed)
                sets, selection, _ = run_pipeline(
                    tensor_r, labels_r, split, grid, alpha, config.alpha_prime
                )
                records.append(
                    RunRecord(method, alpha, coverage(sets, test_labels), avg_size(sets), seed)
                )
                selections.append(
                    SelectionRecord(
                        method=method,
                        alpha=alpha,
                        seed=seed,
                        weight=tuple(float(v) for v in selection.w_hat.values),
                        selection_size=selection.selection_size,
                        best_vertex_size=min(selection.vertex_sizes().values()),
                        argmin_ties=selection.argmin_ties,
                    )
                )
        else:
            j = tensor.score_names.index(method)
            sub = ScoreTensor(tensor_r.values[:, :, j : j + 1], (method,))
            for alpha in config.alphas:
                split = make_split("vfcp", n_train, n_test, config.vfcp_ratio, seed)
                sets = split_conformal(sub, labels_r, split.I3, split.I_test, alpha)
                records.append(
                    RunRecord(method, alpha, coverage(sets, test_labels), avg_size(sets), seed)
                )
    return records, selections


def run_experiment_on(
    tensor: ScoreTensor,
    labels: LabelVector,
    config,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> ExperimentResult:
    """Run the configured methods over repeated seeded splits of the given
    data. Deterministic given the seed list, independent of worker count."""
    n = tensor.n_samples
    if len(labels) != n:
        raise ContractViolation(f"{len(labels)} labels for {n} samples")
    n_train = int(round(n * config.train_test_ratio))
    n_train = min(max(n_train, 2), n - 1)
    if n < 3:
        raise ContractViolation(f"need at least 3 samples, got {n}")

    for method in config.methods:
        if method not in STRATEGIES and method not in tensor.score_names:
            raise ConfigError(
                f"unknown method {method!r}; strategies: {list(STRATEGIES)}, "
                f"score layers: {list(tensor.score_names)}"
            )
    seeds = list(config.seeds) if config.seeds else [config.seed + i for i in range(config.n_runs)]

    methods = list(config.methods)
    done = 0

    def one(seed: int):
        return _single_run(tensor, labels, config, methods, seed, n_train)

    per_run: list[tuple[list[RunRecord], list[SelectionRecord]]]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_run = list(pool.map(one, seeds))
        if progress:
            progress(len(seeds), len(seeds))
    else:
        per_run = []
        for seed in seeds:
            per_run.append(one(seed))
            done += 1
            if progress:
                progress(done, len(seeds))

    records = [r for recs, _ in per_run for r in recs]
    selections = [s for _, sels in per_run for s in sels]
    records.sort(key=lambda r: (r.method, r.alpha, r.seed))
    selections.sort(key=lambda s: (s.method, s.alpha, s.seed))
    metadata = {
        "rng": RNG_ALGORITHM,
        "n_samples": n,
        "n_train": n_train,
        "n_test": n - n_train,
        "n_classes": tensor.n_classes,
        "layers": list(tensor.score_names),
        "grid_epsilon": config.grid_epsilon,
        "methods": methods,
        "alphas": list(config.alphas),
        "seeds": seeds,
    }
    return ExperimentResult(records, summarize(records), selections, metadata)


def run_experiment(config, workers: int = 1, progress=None) -> ExperimentResult:
    """Load the configured datasets, build the score tensor, and run."""
    from . import io as io_mod  # deferred: io imports this module's record types

    matrices, labels, names = io_mod.load_sources(config)
    tensor = build_experiment_tensor(matrices, names, config.scores)
    return run_experiment_on(tensor, labels, config, workers=workers, progress=progress)
