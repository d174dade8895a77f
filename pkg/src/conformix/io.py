"""Dataset and result file formats, and experiment configuration.

Dataset CSV: one `# {json}` header line with at least {"n", "K", "kind"}
(kind "probabilities" or "logits", extra keys allowed and preserved),
then n rows of K comma-separated reals, optionally followed by one integer
label column. Labels may instead come from a separate single-column file.

Results CSVs carry floats at 6 significant digits; dataset files use the
shortest exact decimal so that load -> write -> load is bit-identical.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import LabelVector, ProbabilityMatrix, ROW_SUM_TOL
from .errors import ConfigError, DataError
from .metrics import RunRecord, SelectionRecord, SummaryRow
from .scores import SCORE_REGISTRY

logger = logging.getLogger("conformix.io")

DATASET_KINDS = ("probabilities", "logits")

REQUIRED_HEADER_KEYS = ("n", "K", "kind")


def _fmt6(x: float) -> str:
    return f"{x:.6g}"


def _fmt_exact(x: float) -> str:
    if not math.isfinite(x):
        return str(x)
    return np.format_float_positional(x, unique=True, trim="-")


@dataclass(frozen=True)
class DatasetFile:
    """A parsed dataset: validated probabilities, optional labels, and the
    raw header. renormalized_rows counts rows the loader had to rescale."""

    matrix: ProbabilityMatrix
    labels: LabelVector | None
    header: dict
    path: str
    renormalized_rows: int = 0

    @property
    def model_name(self) -> str:
        name = self.header.get("model_name")
        if name:
            return str(name)
        return os.path.splitext(os.path.basename(self.path))[0]


def _parse_header(path: str, line: str) -> dict:
    if not line.startswith("#"):
        raise DataError(f"{path}: first line must be a '# {{json}}' header")
    try:
        header = json.loads(line.lstrip("#").strip())
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: header is not valid JSON: {e}") from None
    if not isinstance(header, dict):
        raise DataError(f"{path}: header must be a JSON object")
    for key in REQUIRED_HEADER_KEYS:
        if key not in header:
            raise DataError(f"{path}: header missing required key {key!r}")
    if header["kind"] not in DATASET_KINDS:
        raise DataError(
            f"{path}: header kind {header['kind']!r} not in {list(DATASET_KINDS)}"
        )
    n, k = header["n"], header["K"]
    if not (isinstance(n, int) and isinstance(k, int) and n >= 1 and k >= 2):
        raise DataError(f"{path}: header needs integer n >= 1 and K >= 2")
    return header


def _stable_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _read_label_file(path: str, n: int, k: int) -> LabelVector:
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise DataError(f"{path}: row {ln}: label {line!r} is not an integer") from None
    if len(labels) != n:
        raise DataError(f"{path}: {len(labels)} labels for {n} samples")
    arr = np.asarray(labels, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= k):
        bad = int(np.argmax((arr < 0) | (arr >= k)))
        raise DataError(f"{path}: row {bad + 1}: label {arr[bad]} outside [0, {k})")
    return LabelVector(arr, k)


def load_dataset(path: str, labels_path: str | None = None) -> DatasetFile:
    """Parse and validate one dataset file.

    Logits are converted to probabilities by the stable softmax. For the
    "probabilities" kind, any negative entry is a hard error; rows whose
    sums are off by more than 1e-6 are renormalized with a logged warning.
    """
    if not os.path.exists(path):
        raise DataError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        header = _parse_header(path, first)
        n, k = header["n"], header["K"]
        values = np.empty((n, k), dtype=np.float64)
        inline_labels: list[int] | None = None
        row = 0
        for ln, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            if row >= n:
                raise DataError(f"{path}: more than the declared {n} data rows")
            fields = line.split(",")
            if len(fields) not in (k, k + 1):
                raise DataError(
                    f"{path}: row {row}: expected {k} or {k + 1} fields, got {len(fields)}"
                )
            has_label = len(fields) == k + 1
            if row == 0:
                inline_labels = [] if has_label else None
            elif has_label != (inline_labels is not None):
                raise DataError(
                    f"{path}: row {row}: label column present in some rows but not others"
                )
            for j in range(k):
                try:
                    values[row, j] = float(fields[j])
                except ValueError:
                    raise DataError(
                        f"{path}: row {row}, column {j}: {fields[j]!r} is not a number"
                    ) from None
            if has_label:
                try:
                    inline_labels.append(int(fields[k]))
                except ValueError:
                    raise DataError(
                        f"{path}: row {row}, column {k}: label {fields[k]!r} "
                        "is not an integer"
                    ) from None
            row += 1
    if row != n:
        raise DataError(f"{path}: {row} data rows for declared n={n}")

    bad = ~np.isfinite(values)
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad)), values.shape)
        raise DataError(f"{path}: row {i}, column {j}: non-finite value")

    renormalized = 0
    if header["kind"] == "logits":
        values = _stable_softmax(values)
    else:
        neg = values < 0
        if neg.any():
            i, j = np.unravel_index(int(np.argmax(neg)), values.shape)
            raise DataError(
                f"{path}: row {i}, column {j}: negative probability {values[i, j]}"
            )
        sums = values.sum(axis=1)
        if (sums <= 0).any():
            i = int(np.argmax(sums <= 0))
            raise DataError(f"{path}: row {i}: probabilities sum to zero")
        off = np.abs(sums - 1.0) > ROW_SUM_TOL
        renormalized = int(off.sum())
        if renormalized:
            logger.warning(
                "%s: renormalized %d row(s) whose sums were off by more than %g "
                "(first: row %d, sum %.8f)",
                path,
                renormalized,
                ROW_SUM_TOL,
                int(np.argmax(off)),
                sums[np.argmax(off)],
            )
            values = values / sums[:, None]

    labels: LabelVector | None = None
    if inline_labels is not None:
        if labels_path is not None:
            raise DataError(
                f"{path}: labels given both inline and in {labels_path}"
            )
        arr = np.asarray(inline_labels, dtype=np.int64)
        if arr.min() < 0 or arr.max() >= k:
            bad_i = int(np.argmax((arr < 0) | (arr >= k)))
            raise DataError(
                f"{path}: row {bad_i}: label {arr[bad_i]} outside [0, {k})"
            )
        labels = LabelVector(arr, k)
    elif labels_path is not None:
        if not os.path.exists(labels_path):
            raise DataError(f"{labels_path}: no such file")
        labels = _read_label_file(labels_path, n, k)

    return DatasetFile(
        matrix=ProbabilityMatrix(values),
        labels=labels,
        header=header,
        path=path,
        renormalized_rows=renormalized,
    )


def write_dataset(
    path: str,
    matrix: ProbabilityMatrix,
    labels: LabelVector | None = None,
    kind: str = "probabilities",
    model_name: str | None = None,
    extra: dict | None = None,
) -> str:
    """Write a dataset file; values use the shortest exact decimal form."""
    if kind not in DATASET_KINDS:
        raise ConfigError(f"kind {kind!r} not in {list(DATASET_KINDS)}")
    header = {"n": matrix.n_samples, "K": matrix.n_classes, "kind": kind}
    if model_name:
        header["model_name"] = model_name
    if extra:
        header.update(extra)
    lines = ["# " + json.dumps(header, sort_keys=True)]
    lab = labels.labels if labels is not None else None
    for i, row in enumerate(matrix.values):
        cells = [_fmt_exact(v) for v in row]
        if lab is not None:
            cells.append(str(int(lab[i])))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


_CONFIG_DEFAULTS = dict(
    datasets=None,
    labels=None,
    test_datasets=None,
    reference=None,
    scores=("thr", "aps", "rank"),
    methods=("vfcp", "efcp", "dlcp", "dlcp+"),
    alphas=(0.05, 0.1),
    alpha_prime=None,
    n_runs=100,
    seeds=None,
    vfcp_ratio=0.5,
    train_test_ratio=0.8,
    grid_epsilon=0.01,
    seed=0,
    output_dir="results",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings; unknown keys are rejected upstream."""

    datasets: tuple[str, ...]
    labels: str | None = None
    test_datasets: tuple[str, ...] | None = None
    reference: str | None = None
    scores: tuple[str, ...] = ("thr", "aps", "rank")
    methods: tuple[str, ...] = ("vfcp", "efcp", "dlcp", "dlcp+")
    alphas: tuple[float, ...] = (0.05, 0.1)
    alpha_prime: float | None = None
    n_runs: int = 100
    seeds: tuple[int, ...] | None = None
    vfcp_ratio: float = 0.5
    train_test_ratio: float = 0.8
    grid_epsilon: float = 0.01
    seed: int = 0
    output_dir: str = "results"

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("config needs at least one dataset path")
        if not self.scores:
            raise ConfigError("config needs at least one score name")
        for s in self.scores:
            if s not in SCORE_REGISTRY:
                raise ConfigError(
                    f"unknown score {s!r}; known scores: {sorted(SCORE_REGISTRY)}"
                )
        if not self.methods:
            raise ConfigError("config needs at least one method")
        if not self.alphas:
            raise ConfigError("config needs at least one alpha")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise ConfigError(f"alpha {a} outside (0, 1)")
        if self.alpha_prime is not None:
            if not 0.0 < self.alpha_prime < 1.0:
                raise ConfigError(f"alpha_prime {self.alpha_prime} outside (0, 1)")
            if self.alpha_prime > min(self.alphas):
                raise ConfigError(
                    f"alpha_prime {self.alpha_prime} exceeds the smallest alpha "
                    f"{min(self.alphas)}"
                )
        for name, value in (
            ("vfcp_ratio", self.vfcp_ratio),
            ("train_test_ratio", self.train_test_ratio),
        ):
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} {value} outside (0, 1)")
        if not 0.0 < self.grid_epsilon <= 1.0:
            raise ConfigError(f"grid_epsilon {self.grid_epsilon} outside (0, 1]")
        if self.n_runs < 1:
            raise ConfigError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.seeds is not None and len(self.seeds) != self.n_runs:
            raise ConfigError(
                f"{len(self.seeds)} seeds for n_runs={self.n_runs}"
            )


def _coerce_config(raw: dict, base_dir: str) -> ExperimentConfig:
    unknown = set(raw) - set(_CONFIG_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def _resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base_dir, p)

    merged = dict(_CONFIG_DEFAULTS, **raw)
    datasets = merged["datasets"]
    if isinstance(datasets, str):
        datasets = [datasets]
    if not isinstance(datasets, (list, tuple)) or not datasets:
        raise ConfigError("'datasets' must be a nonempty list of paths")
    merged["datasets"] = tuple(_resolve(str(p)) for p in datasets)
    if merged["labels"] is not None:
        merged["labels"] = _resolve(str(merged["labels"]))
    if merged["reference"] is not None:
        merged["reference"] = _resolve(str(merged["reference"]))
    if merged["test_datasets"] is not None:
        tds = merged["test_datasets"]
        if isinstance(tds, str):
            tds = [tds]
        merged["test_datasets"] = tuple(_resolve(str(p)) for p in tds)
    for key in ("scores", "methods"):
        merged[key] = tuple(str(x) for x in merged[key])
    merged["alphas"] = tuple(float(a) for a in merged["alphas"])
    if merged["seeds"] is not None:
        merged["seeds"] = tuple(int(s) for s in merged["seeds"])
    for key in ("vfcp_ratio", "train_test_ratio", "grid_epsilon"):
        merged[key] = float(merged[key])
    if merged["alpha_prime"] is not None:
        merged["alpha_prime"] = float(merged["alpha_prime"])
    merged["n_runs"] = int(merged["n_runs"])
    merged["seed"] = int(merged["seed"])
    merged["output_dir"] = str(merged["output_dir"])
    try:
        return ExperimentConfig(**merged)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config; unknown keys fail closed. Dataset-ish paths are
    resolved relative to the config file's directory."""
    if not os.path.exists(path):
        raise ConfigError(f"{path}: no such config file")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    if overrides:
        unknown = set(overrides) - set(_CONFIG_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config overrides: {sorted(unknown)}")
        raw = dict(raw, **overrides)
    return _coerce_config(raw, os.path.dirname(os.path.abspath(path)))


def load_sources(config: ExperimentConfig):
    """Load every configured dataset; all must agree on labels.

    Returns (matrices, labels, source_names). Labels must be present (from
    inline columns or the shared label file) and identical across sources.
    """
    label_file = config.labels
    matrices, names = [], []
    labels: LabelVector | None = None
    for path in config.datasets:
        ds = load_dataset(path, labels_path=label_file if labels is None else None)
        matrices.append(ds.matrix)
        names.append(ds.model_name)
        if ds.labels is not None:
            if labels is None:
                labels = ds.labels
            elif not np.array_equal(labels.labels, ds.labels.labels):
                raise DataError(f"{path}: labels disagree with the first source")
    if labels is None:
        raise DataError("no labels found in datasets or labels file")
    for path, m in zip(config.datasets, matrices):
        if m.n_samples != len(labels) or m.n_classes != matrices[0].n_classes:
            raise DataError(f"{path}: shape {m.values.shape} disagrees with the others")
    return matrices, labels, names


RECORD_COLUMNS = ("method", "alpha", "coverage", "avg_size", "seed")
SUMMARY_COLUMNS = (
    "method",
    "alpha",
    "coverage_mean",
    "coverage_std",
    "size_mean",
    "size_std",
    "n_runs",
)
SELECTION_COLUMNS = (
    "method",
    "alpha",
    "seed",
    "weight",
    "selection_size",
    "best_vertex_size",
    "argmin_ties",
)


def _record_line(r: RunRecord) -> str:
    return ",".join(
        [r.method, _fmt6(r.alpha), _fmt6(r.coverage), _fmt6(r.avg_size), str(r.seed)]
    )


def _summary_line(s: SummaryRow) -> str:
    return ",".join(
        [
            s.method,
            _fmt6(s.alpha),
            _fmt6(s.coverage_mean),
            _fmt6(s.coverage_std),
            _fmt6(s.size_mean),
            _fmt6(s.size_std),
            str(s.n_runs),
        ]
    )


def _selection_line(s: SelectionRecord) -> str:
    weight = "|".join(_fmt6(v) for v in s.weight)
    return ",".join(
        [
            s.method,
            _fmt6(s.alpha),
            str(s.seed),
            weight,
            _fmt6(s.selection_size),
            _fmt6(s.best_vertex_size),
            str(s.argmin_ties),
        ]
    )


def write_results(
    records: list[RunRecord],
    summaries: list[SummaryRow],
    out_dir: str,
    selections: list[SelectionRecord] | None = None,
    metadata: dict | None = None,
) -> dict[str, str]:
    """Write records.csv, summary.csv, the plot-ready long.csv, and
    optionally selections.csv and meta.json. Returns {name: path}."""
    if not records:
        raise ConfigError("no records to write")
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    paths["records"] = os.path.join(out_dir, "records.csv")
    with open(paths["records"], "w", encoding="utf-8") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for r in records:
            fh.write(_record_line(r) + "\n")

    paths["summary"] = os.path.join(out_dir, "summary.csv")
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for s in summaries:
            fh.write(_summary_line(s) + "\n")

    paths["long"] = os.path.join(out_dir, "long.csv")
    with open(paths["long"], "w", encoding="utf-8") as fh:
        fh.write("method,alpha,metric,value\n")
        for r in records:
            fh.write(f"{r.method},{_fmt6(r.alpha)},coverage,{_fmt6(r.coverage)}\n")
            fh.write(f"{r.method},{_fmt6(r.alpha)},avg_size,{_fmt6(r.avg_size)}\n")

    if selections is not None:
        paths["selections"] = os.path.join(out_dir, "selections.csv")
        with open(paths["selections"], "w", encoding="utf-8") as fh:
            fh.write(",".join(SELECTION_COLUMNS) + "\n")
            for s in selections:
                fh.write(_selection_line(s) + "\n")

    if metadata is not None:
        paths["meta"] = os.path.join(out_dir, "meta.json")
        with open(paths["meta"], "w", encoding="utf-8") as fh:
            json.dump(metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return paths


def _read_csv(path: str, columns: tuple[str, ...]) -> list[list[str]]:
    if not os.path.exists(path):
        raise DataError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.readline().strip()
        if head != ",".join(columns):
            raise DataError(f"{path}: unexpected columns {head!r}")
        rows = []
        for ln, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != len(columns):
                raise DataError(f"{path}: row {ln}: expected {len(columns)} fields")
            rows.append(fields)
    return rows


def read_records(path: str) -> list[RunRecord]:
    return [
        RunRecord(m, float(a), float(c), float(s), int(seed))
        for m, a, c, s, seed in _read_csv(path, RECORD_COLUMNS)
    ]


def read_summaries(path: str) -> list[SummaryRow]:
    return [
        SummaryRow(m, float(a), float(cm), float(cs), float(sm), float(ss), int(n))
        for m, a, cm, cs, sm, ss, n in _read_csv(path, SUMMARY_COLUMNS)
    ]


def write_prediction_sets(path: str, batch, offset: int = 0) -> str:
    """One line per sample: index, threshold, set size, member labels
    joined by '|' (empty field for an empty set)."""
    q = batch.threshold.q
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,threshold,size,labels\n")
        for i, members in enumerate(batch.label_lists()):
            fh.write(
                f"{offset + i},{_fmt6(q)},{len(members)},"
                + "|".join(str(y) for y in members)
                + "\n"
            )
    return path


def write_deviation_report(report, out_dir: str, delta: float) -> dict[str, str]:
    """Emit a DeviationReport as both JSON and a one-row CSV."""
    os.makedirs(out_dir, exist_ok=True)
    payload = dataclasses.asdict(report)
    payload["delta"] = delta
    payload["bound_eta"] = report.bound_eta(delta)
    payload["bound_xi"] = report.bound_xi(delta)
    paths = {
        "json": os.path.join(out_dir, "deviation.json"),
        "csv": os.path.join(out_dir, "deviation.csv"),
    }
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cols = (
        "eta_hat",
        "xi_hat",
        "n",
        "d",
        "n_classes",
        "grid_size",
        "reference_size",
        "delta",
        "bound_eta",
        "bound_xi",
    )
    with open(paths["csv"], "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        fh.write(
            ",".join(
                _fmt6(payload[c]) if isinstance(payload[c], float) else str(payload[c])
                for c in cols
            )
            + "\n"
        )
    return paths
