"""Figure rendering for evaluation reports and grid searches.

Everything draws through the Agg backend and writes PNG files next to the
delimited report output; nothing here opens a window.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import STAGES, EvaluationReport, GridResult  # noqa: E402


def save_accuracy_figure(report: EvaluationReport, path: str | Path) -> Path:
    """Per-subject accuracy bars with the mean overlaid."""
    path = Path(path)
    labels = list(report.subject_accuracy.keys())
    values = list(report.subject_accuracy.values())
    fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(labels) + 2), 4.0))
    ax.bar(range(len(labels)), values, color="#4878a8")
    ax.axhline(report.mean_accuracy, color="#b0413e", linestyle="--", label=f"mean {report.mean_accuracy:.2f}%")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title(f"Per-subject accuracy ({report.protocol})")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_latency_figure(report: EvaluationReport, path: str | Path) -> Path:
    """Mean per-trial latency broken down by pipeline stage."""
    path = Path(path)
    values = [report.stage_latency_ms.get(stage, 0.0) for stage in STAGES]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(range(len(STAGES)), values, color="#6a9a58")
    ax.set_xticks(range(len(STAGES)))
    ax.set_xticklabels(STAGES)
    ax.set_ylabel("Mean latency (ms)")
    ax.set_title(f"Decision latency by stage (median total {report.latency_ms_median:.2f} ms)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_grid_figure(result: GridResult, path: str | Path, top_n: int = 15) -> Path:
    """Accuracy of the best parameter combinations, best first."""
    path = Path(path)
    rows = result.rows[:top_n]
    labels = [f"{r.nfft}/{r.segment_len}/{r.overlap:g}" for r in rows]
    values = [r.mean_accuracy for r in rows]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.5 * len(rows) + 2), 4.0))
    ax.bar(range(len(rows)), values, color="#8a6fa8")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("Mean accuracy (%)")
    ax.set_xlabel("nfft / segment / overlap")
    ax.set_title("Spectral parameter search")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
