"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
invariant violation. Progress goes to standard error; machine-readable
output goes to files or standard output, never interleaved.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .conformal import calibrate, evaluate, run_pipeline
from .core import (
    LabelVector,
    ProbabilityMatrix,
    WeightVector,
    grid_cardinality,
    simplex_grid,
)
from .diagnostics import deviation_report
from .errors import ConfigError, ConformixError, DataError
from .figures import render_figures
from .io import (
    load_config,
    load_dataset,
    load_sources,
    write_dataset,
    write_deviation_report,
    write_prediction_sets,
    write_results,
)
from .metrics import build_experiment_tensor, run_experiment
from .splitting import STRATEGIES, make_split
from .synthetic import SyntheticSpec, generate

DATASET_FORMAT_HELP = """\
dataset file format:
  line 1: # {"n": <rows>, "K": <classes>, "kind": "probabilities"|"logits",
             "model_name": <optional>, ...extra keys allowed}
  lines 2..n+1: K comma-separated reals, optionally followed by one integer
  label column. Labels may instead live in a separate one-column file named
  by the config key "labels". Logits are converted by a stable softmax;
  probability rows are renormalized (with a warning) when their sums are
  off by more than 1e-6, and negative entries are rejected.
"""


def _progress(done: int, total: int) -> None:
    if total >= 10 and done % max(1, total // 10) and done != total:
        return
    print(f"run {done}/{total}", file=sys.stderr)


def _print_summary_table(summaries) -> None:
    print(f"{'method':<12}{'alpha':>8}  {'coverage':>18}  {'size':>18}  {'runs':>5}")
    for s in summaries:
        cov = f"{s.coverage_mean:.4f} ({s.coverage_std:.4f})"
        size = f"{s.size_mean:.4f} ({s.size_std:.4f})"
        print(f"{s.method:<12}{s.alpha:>8g}  {cov:>18}  {size:>18}  {s.n_runs:>5}")


def _collect_overrides(args, keys: dict[str, str]) -> dict:
    overrides = {}
    for attr, key in keys.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    return overrides


_RUN_OVERRIDES = {
    "n_runs": "n_runs",
    "seed": "seed",
    "alphas": "alphas",
    "methods": "methods",
    "scores": "scores",
    "epsilon": "grid_epsilon",
    "alpha_prime": "alpha_prime",
    "vfcp_ratio": "vfcp_ratio",
    "train_test_ratio": "train_test_ratio",
    "output_dir": "output_dir",
}


def cmd_run(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args, _RUN_OVERRIDES))
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    result = run_experiment(cfg, workers=workers, progress=_progress)
    paths = write_results(
        result.records,
        result.summaries,
        cfg.output_dir,
        selections=result.selections,
        metadata=result.metadata,
    )
    if not args.no_figures:
        for p in render_figures(result.summaries, cfg.output_dir):
            paths[os.path.basename(p)] = p
    for name in sorted(paths):
        print(f"wrote {paths[name]}", file=sys.stderr)
    _print_summary_table(result.summaries)
    return 0


def cmd_predict(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args, {"output_dir": "output_dir"}))
    if not cfg.test_datasets:
        raise ConfigError("predict needs 'test_datasets' in the config")
    if len(cfg.test_datasets) != len(cfg.datasets):
        raise ConfigError(
            f"{len(cfg.test_datasets)} test datasets for {len(cfg.datasets)} "
            "calibration datasets"
        )
    matrices, labels, names = load_sources(cfg)
    test_sets = [load_dataset(p) for p in cfg.test_datasets]
    n_cal = matrices[0].n_samples
    n_test = test_sets[0].matrix.n_samples
    combined = []
    for m, t in zip(matrices, test_sets):
        if t.matrix.n_classes != m.n_classes or t.matrix.n_samples != n_test:
            raise DataError(f"{t.path}: shape disagrees with the other sources")
        combined.append(ProbabilityMatrix(np.vstack([m.values, t.matrix.values])))
    tensor = build_experiment_tensor(combined, names, cfg.scores)
    # test label slots are placeholders; the pipeline never reads them
    labels_full = LabelVector(
        np.concatenate([labels.labels, np.zeros(n_test, dtype=np.int64)]),
        tensor.n_classes,
    )
    alpha = args.alpha if args.alpha is not None else cfg.alphas[0]
    cal_idx = np.arange(n_cal)
    test_idx = np.arange(n_cal, n_cal + n_test)

    if args.weights:
        w = WeightVector.from_floats([float(x) for x in args.weights.split(",")])
        if w.d != tensor.n_scores:
            raise ConfigError(f"{w.d} weights for {tensor.n_scores} score layers")
        q = calibrate(tensor, labels_full, w, cal_idx, alpha)
        sets = evaluate(tensor, w, test_idx, q)
    else:
        strategy = next((m for m in cfg.methods if m in STRATEGIES), None)
        if strategy is None:
            raise ConfigError(
                f"no splitting strategy among methods {list(cfg.methods)}"
            )
        split = make_split(strategy, n_cal, n_test, cfg.vfcp_ratio, cfg.seed)
        grid = simplex_grid(tensor.n_scores, cfg.grid_epsilon)
        sets, _, _ = run_pipeline(tensor, labels_full, split, grid, alpha, cfg.alpha_prime)

    os.makedirs(cfg.output_dir, exist_ok=True)
    path = write_prediction_sets(os.path.join(cfg.output_dir, "predictions.csv"), sets)
    print(path)
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_classes=args.classes,
        n_samples=args.samples,
        concentration=args.concentration,
        miscalibration=args.miscalibration,
        seed=args.seed,
    )
    p_hat, labels, _ = generate(spec)
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    write_dataset(
        args.out,
        p_hat,
        labels,
        kind="probabilities",
        model_name="synthetic",
        extra={
            "concentration": spec.concentration,
            "miscalibration": spec.miscalibration,
            "seed": spec.seed,
        },
    )
    print(args.out)
    return 0


def cmd_diagnose(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args, {"output_dir": "output_dir"}))
    if cfg.reference is None:
        raise ConfigError("diagnose needs a 'reference' dataset path in the config")
    if len(cfg.datasets) != 1:
        raise ConfigError("diagnose supports a single dataset source")
    matrices, labels, names = load_sources(cfg)
    ref = load_dataset(cfg.reference)
    if ref.labels is None:
        raise DataError(f"{cfg.reference}: reference needs labels")
    tensor = build_experiment_tensor(matrices, names, cfg.scores)
    ref_tensor = build_experiment_tensor([ref.matrix], [ref.model_name], cfg.scores)
    n = tensor.n_samples
    subset = min(args.subset_size, n) if args.subset_size else n
    rng = np.random.default_rng(args.seed if args.seed is not None else cfg.seed)
    I = np.sort(rng.choice(n, size=subset, replace=False))
    grid = simplex_grid(tensor.n_scores, cfg.grid_epsilon)
    report = deviation_report(tensor, labels, I, (ref_tensor, ref.labels), grid)
    paths = write_deviation_report(report, cfg.output_dir, delta=args.delta)
    for p in paths.values():
        print(f"wrote {p}", file=sys.stderr)
    print(
        f"eta_hat {report.eta_hat:.6g} (bound {report.bound_eta(args.delta):.6g})\n"
        f"xi_hat {report.xi_hat:.6g} (bound {report.bound_xi(args.delta):.6g})"
    )
    return 0


def cmd_grid_info(args) -> int:
    if args.d < 1:
        raise ConfigError(f"d must be >= 1, got {args.d}")
    if not 0.0 < args.epsilon <= 1.0:
        raise ConfigError(f"epsilon must be in (0, 1], got {args.epsilon}")
    denom = int(math.floor(1.0 / args.epsilon))
    count = grid_cardinality(args.d, args.epsilon)
    first = WeightVector(tuple([0] * (args.d - 1) + [denom]), denom)
    last = WeightVector(tuple([denom] + [0] * (args.d - 1)), denom)
    print(f"size {count}")
    print(f"first {first}")
    print(f"last {last}")
    return 0


def _csv_strs(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformix",
        description=(
            "Prediction sets for multi-class classifiers from weighted "
            "combinations of non-conformity scores."
        ),
        epilog=DATASET_FORMAT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a repeated-split experiment from a config")
    run.add_argument("config", help="JSON experiment config")
    run.add_argument("--n-runs", dest="n_runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--alphas", type=_csv_floats)
    run.add_argument("--methods", type=_csv_strs)
    run.add_argument("--scores", type=_csv_strs)
    run.add_argument("--epsilon", type=float, help="weight grid resolution")
    run.add_argument("--alpha-prime", dest="alpha_prime", type=float)
    run.add_argument("--vfcp-ratio", dest="vfcp_ratio", type=float)
    run.add_argument("--train-test-ratio", dest="train_test_ratio", type=float)
    run.add_argument("--output-dir", dest="output_dir")
    run.add_argument("--workers", type=int, help="parallel runs (default: cpu count)")
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    run.set_defaults(func=cmd_run)

    predict = sub.add_parser("predict", help="emit prediction sets for test rows")
    predict.add_argument("config", help="JSON config with datasets and test_datasets")
    predict.add_argument("--weights", help="explicit comma-separated weights; skips selection")
    predict.add_argument("--alpha", type=float, help="level (default: first config alpha)")
    predict.add_argument("--output-dir", dest="output_dir")
    predict.set_defaults(func=cmd_predict)

    synth = sub.add_parser("synth", help="generate a synthetic dataset file")
    synth.add_argument("--classes", type=int, required=True)
    synth.add_argument("--samples", type=int, required=True)
    synth.add_argument("--concentration", type=float, default=2.0)
    synth.add_argument("--miscalibration", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    diagnose = sub.add_parser("diagnose", help="measure deviation gaps vs a reference")
    diagnose.add_argument("config", help="JSON config with a 'reference' dataset")
    diagnose.add_argument("--subset-size", dest="subset_size", type=int)
    diagnose.add_argument("--delta", type=float, default=0.05)
    diagnose.add_argument("--seed", type=int)
    diagnose.add_argument("--output-dir", dest="output_dir")
    diagnose.set_defaults(func=cmd_diagnose)

    grid_info = sub.add_parser("grid-info", help="weight grid cardinality and extremes")
    grid_info.add_argument("d", type=int, help="number of score layers")
    grid_info.add_argument("epsilon", type=float, help="grid resolution")
    grid_info.set_defaults(func=cmd_grid_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except ConformixError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # anything else is an invariant violation
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
