"""Block-based test-then-train evaluation and report files.

Each block first tests the current model on every one of its samples, then
trains it; the first block only trains (there is nothing to test yet) and is
excluded from all accuracy statistics. The harness is a plain sequential
driver, so the scoring-before-update ordering is structural rather than
policed at runtime.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import math
import time

import numpy as np

from .errors import ConfigError
from .stream import chunk


@dataclass
class BlockMetrics:
    """Per-block result row. Accuracy is exactly correct / sample_count."""

    block_index: int
    accuracy: float
    sample_count: int
    replacements: int
    cumulative_mean_accuracy: float
    wall_time_ms: float


def run_block_evaluation(classifier, samples, block_size: int,
                         progress=None) -> list[BlockMetrics]:
    """Drive one classifier through a sample stream, block by block.

    ``classifier`` must expose initialize(block), classify_block(X) and
    update_with_block(block). ``samples`` is any iterable of LabeledSample.
    Returns one BlockMetrics per scored block (the first block never scores).
    ``progress`` is an optional callable receiving each BlockMetrics as it is
    produced.
    """
    metrics: list[BlockMetrics] = []
    accuracies: list[float] = []
    first = True
    for block in chunk(samples, block_size):
        if first:
            if block.size < 2:
                raise ConfigError("first block is too small to train on")
            classifier.initialize(block)
            first = False
            continue
        started = time.perf_counter()
        predicted = np.asarray(classifier.classify_block(block.features_matrix()))
        correct = int(np.count_nonzero(predicted == block.labels()))
        report = classifier.update_with_block(block)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        accuracy = correct / block.size
        accuracies.append(accuracy)
        row = BlockMetrics(
            block_index=block.index,
            accuracy=accuracy,
            sample_count=block.size,
            replacements=len(getattr(report, "replaced_indices", ())),
            cumulative_mean_accuracy=math.fsum(accuracies) / len(accuracies),
            wall_time_ms=elapsed_ms,
        )
        metrics.append(row)
        if progress is not None:
            progress(row)
    if first:
        raise ConfigError("stream is empty; need at least two blocks")
    if not metrics:
        raise ConfigError("stream has a single block; nothing can be scored")
    return metrics


def mean_accuracy(metrics: list[BlockMetrics]) -> float:
    """Unweighted mean of the per-block accuracies."""
    if not metrics:
        raise ValueError("no scored blocks to average")
    return math.fsum(m.accuracy for m in metrics) / len(metrics)


REPORT_HEADER = "block,accuracy,cum_mean,replacements,ms"


def emit_report(metrics: list[BlockMetrics], path) -> None:
    """Write the per-block CSV behind accuracy-curve plots."""
    with open(path, "w", newline="") as fh:
        fh.write(REPORT_HEADER + "\n")
        for m in metrics:
            fh.write(f"{m.block_index},{m.accuracy!r},"
                     f"{m.cumulative_mean_accuracy!r},{m.replacements},"
                     f"{m.wall_time_ms!r}\n")


def load_report(path) -> list[dict]:
    """Parse a report CSV back into typed row dictionaries."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = REPORT_HEADER.split(",")
        if reader.fieldnames != expected:
            raise ValueError(f"unexpected report header {reader.fieldnames}")
        for rec in reader:
            rows.append({"block": int(rec["block"]),
                         "accuracy": float(rec["accuracy"]),
                         "cum_mean": float(rec["cum_mean"]),
                         "replacements": int(rec["replacements"]),
                         "ms": float(rec["ms"])})
    return rows
