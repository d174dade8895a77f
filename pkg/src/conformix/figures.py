"""Report figures rendered next to the result CSVs.

Uses the non-interactive backend so rendering works headless; each figure
aggregates the summary rows, one line per method across alphas.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import SummaryRow


def _by_method(summaries: list[SummaryRow]) -> dict[str, list[SummaryRow]]:
    grouped: dict[str, list[SummaryRow]] = {}
    for s in summaries:
        grouped.setdefault(s.method, []).append(s)
    for rows in grouped.values():
        rows.sort(key=lambda s: s.alpha)
    return grouped


def _errorbar_plot(grouped, value, err, ylabel, title, path, reference=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for method, rows in sorted(grouped.items()):
        alphas = [s.alpha for s in rows]
        ax.errorbar(
            alphas,
            [value(s) for s in rows],
            yerr=[err(s) for s in rows],
            marker="o",
            capsize=3,
            label=method,
        )
    if reference is not None:
        alphas = sorted({s.alpha for rows in grouped.values() for s in rows})
        ax.plot(alphas, [reference(a) for a in alphas], "k--", lw=1, label="target")
    ax.set_xlabel("alpha")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_figures(summaries: list[SummaryRow], out_dir: str) -> list[str]:
    """Write coverage_vs_alpha.png and size_vs_alpha.png; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    grouped = _by_method(summaries)
    paths = [
        _errorbar_plot(
            grouped,
            value=lambda s: s.coverage_mean,
            err=lambda s: s.coverage_std,
            ylabel="test coverage",
            title="Coverage by method",
            path=os.path.join(out_dir, "coverage_vs_alpha.png"),
            reference=lambda a: 1.0 - a,
        ),
        _errorbar_plot(
            grouped,
            value=lambda s: s.size_mean,
            err=lambda s: s.size_std,
            ylabel="average set size",
            title="Prediction-set size by method",
            path=os.path.join(out_dir, "size_vs_alpha.png"),
        ),
    ]
    return paths
