"""Accuracy-curve figures rendered next to the report CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_accuracy_curve(metrics, path, title=None) -> None:
    """Plot per-block accuracy and its running mean, save as an image file."""
    blocks = [m.block_index for m in metrics]
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(blocks, [m.accuracy for m in metrics],
            lw=0.9, alpha=0.75, label="block accuracy")
    ax.plot(blocks, [m.cumulative_mean_accuracy for m in metrics],
            lw=1.8, label="running mean")
    ax.set_xlabel("block")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower left")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_comparison_curve(named_metrics, path, title=None) -> None:
    """Overlay several runs' per-block accuracies, e.g. pdsrf vs a baseline.

    ``named_metrics`` maps a legend label to its list of BlockMetrics.
    """
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for name, metrics in named_metrics.items():
        ax.plot([m.block_index for m in metrics],
                [m.accuracy for m in metrics], lw=0.9, alpha=0.8, label=name)
    ax.set_xlabel("block")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower left")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
