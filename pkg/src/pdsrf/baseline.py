"""Comparison classifiers: a plain replace-the-loser forest and a majority floor.

The forest baseline reuses the streaming classifier wholesale with proximity
weighting switched off and the temporal decay rate pinned to zero, so any
accuracy gap against the proximity-driven variant is attributable to the two
weighting mechanisms rather than to incidental implementation differences.
"""

from __future__ import annotations

import numpy as np

from .classifier import PdsrfConfig, StreamingForestClassifier, UpdateReport
from .errors import ConfigError
from .stream import Block


class RfRtlClassifier(StreamingForestClassifier):
    """Random forest with replace-the-loser forgetting and unweighted votes."""

    def __init__(self, config: PdsrfConfig, n_classes: int, n_features: int):
        super().__init__(config, n_classes, n_features,
                         proximity_weighted=False, temporal_alpha=0.0)


class MajorityClassifier:
    """Predicts the most frequent label seen so far; a sanity floor.

    Before any training sample arrives every prediction is class 0, which is
    also what the tie rule (lowest index wins) yields on an empty count table.
    """

    def __init__(self, n_classes: int):
        if n_classes < 1:
            raise ConfigError("need at least one class")
        self.n_classes = int(n_classes)
        self.counts = np.zeros(self.n_classes, dtype=np.int64)
        self.current_block = -1

    @property
    def majority_label(self) -> int:
        return int(self.counts.argmax())

    def initialize(self, block: Block) -> None:
        self._ingest(block)

    def update_with_block(self, block: Block) -> UpdateReport:
        self._ingest(block)
        return UpdateReport(block_index=block.index)

    def _ingest(self, block: Block) -> None:
        if block.size:
            self.counts += np.bincount(block.labels(), minlength=self.n_classes)
        self.current_block = block.index

    def predict(self, features) -> np.ndarray:
        out = np.zeros(self.n_classes)
        out[self.majority_label] = 1.0
        return out

    def classify(self, features) -> int:
        return self.majority_label

    def predict_block(self, X) -> np.ndarray:
        return np.tile(self.predict(None), (len(X), 1))

    def classify_block(self, X) -> np.ndarray:
        return np.full(len(X), self.majority_label, dtype=np.int64)
