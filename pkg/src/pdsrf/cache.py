"""Fixed-capacity sliding window of recent samples with cached routing results.

Each window entry stores the sample itself, its leaf signature under the
current forest, and one correctness flag per tree (did that tree classify
the sample right). Keeping these materialized turns the per-prediction
neighbor scan into integer comparisons and the per-tree neighborhood error
into a boolean mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StaleSignatureError
from .forest import Forest, LeafSignature
from .stream import Block, LabeledSample


@dataclass
class CachedSample:
    sample: LabeledSample
    signature: LeafSignature
    correct: np.ndarray  # bool per tree


class WindowCache:
    """Ring of the most recent samples, evicting strictly oldest-first."""

    def __init__(self, capacity: int, forest_epoch: int = 0):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.forest_epoch = forest_epoch
        self.ids = np.empty(0, dtype=np.int64)
        self.X = None
        self.labels = np.empty(0, dtype=np.int64)
        self.arrival_blocks = np.empty(0, dtype=np.int64)
        self.signatures = None  # (size, n_trees) int32
        self.correct = None  # (size, n_trees) bool

    @property
    def size(self) -> int:
        return len(self.ids)

    def push_block(self, block: Block, forest: Forest) -> None:
        """Annotate a block against the forest and append it, evicting the oldest."""
        if forest.epoch != self.forest_epoch:
            raise StaleSignatureError(
                f"cache is at forest epoch {self.forest_epoch}, forest at {forest.epoch}; "
                "refresh_for_replacement must run after every replacement")
        if block.size == 0:
            return
        Xb = block.features_matrix()
        sigs = forest.apply(Xb)
        yb = block.labels()
        flags = np.empty((block.size, forest.n_trees), dtype=bool)
        for i, t in enumerate(forest.trees):
            flags[:, i] = t.leaf_argmax[sigs[:, i]] == yb

        if self.X is None:
            self.ids, self.X, self.labels = block.ids(), Xb.copy(), yb.copy()
            self.arrival_blocks = np.full(block.size, block.index, dtype=np.int64)
            self.signatures, self.correct = sigs, flags
        else:
            self.ids = np.concatenate([self.ids, block.ids()])
            self.X = np.vstack([self.X, Xb])
            self.labels = np.concatenate([self.labels, yb])
            self.arrival_blocks = np.concatenate(
                [self.arrival_blocks, np.full(block.size, block.index, dtype=np.int64)])
            self.signatures = np.vstack([self.signatures, sigs])
            self.correct = np.vstack([self.correct, flags])
        if self.size > self.capacity:
            keep = slice(self.size - self.capacity, None)
            self.ids = self.ids[keep]
            self.X = self.X[keep]
            self.labels = self.labels[keep]
            self.arrival_blocks = self.arrival_blocks[keep]
            self.signatures = self.signatures[keep]
            self.correct = self.correct[keep]

    def refresh_for_replacement(self, tree_index: int, forest: Forest) -> None:
        """Recompute one signature column and its flags after a single replacement."""
        if forest.epoch != self.forest_epoch + 1:
            raise StaleSignatureError(
                f"cache epoch {self.forest_epoch} cannot catch up to forest epoch "
                f"{forest.epoch} by refreshing one tree")
        if not 0 <= tree_index < forest.n_trees:
            raise ValueError(f"tree index {tree_index} out of range")
        if self.size:
            tree = forest.trees[tree_index]
            leaves = tree.apply(self.X)
            self.signatures[:, tree_index] = leaves
            self.correct[:, tree_index] = tree.leaf_argmax[leaves] == self.labels
        self.forest_epoch = forest.epoch

    def entry(self, i: int) -> CachedSample:
        sample = LabeledSample(id=int(self.ids[i]), features=self.X[i].copy(),
                               label=int(self.labels[i]),
                               arrival_block=int(self.arrival_blocks[i]))
        sig = LeafSignature(leaf_ids=self.signatures[i].copy(), epoch=self.forest_epoch)
        return CachedSample(sample=sample, signature=sig, correct=self.correct[i].copy())

    def _sort_keys(self, counts) -> np.ndarray:
        # proximity descending, then newer (larger id) first; ids are unique
        # so the key is a total order
        stride = int(self.ids[-1]) + 1
        return counts.astype(np.int64) * stride + self.ids

    def k_nearest(self, query: LeafSignature, k: int) -> list[CachedSample]:
        """The min(k, size) entries most proximate to the query signature."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if query.epoch != self.forest_epoch:
            raise StaleSignatureError(
                f"query signature epoch {query.epoch} does not match cache epoch "
                f"{self.forest_epoch}")
        if self.size == 0:
            return []
        counts = (self.signatures == query.leaf_ids).sum(axis=1)
        order = np.argsort(-self._sort_keys(counts))
        return [self.entry(int(i)) for i in order[:min(k, self.size)]]

    def nearest_indices(self, leaf_matrix, k: int) -> np.ndarray:
        """Batch top-k window indices for pre-routed queries.

        ``leaf_matrix`` is (n_queries, n_trees) at the current epoch. Returns
        an (n_queries, min(k, size)) index array ordered exactly like
        ``k_nearest``.
        """
        if self.size == 0:
            raise ValueError("cache is empty")
        # accumulate agreement counts tree by tree over contiguous rows;
        # the (queries, size, trees) broadcast equivalent is ~4x slower
        cached = np.ascontiguousarray(self.signatures.T)
        queried = np.ascontiguousarray(np.asarray(leaf_matrix).T)
        counts = np.zeros((queried.shape[1], self.size), dtype=np.int16)
        for t in range(cached.shape[0]):
            counts += cached[t][None, :] == queried[t][:, None]
        keys = self._sort_keys(counts)
        kk = min(k, self.size)
        if kk == self.size:
            return np.argsort(-keys, axis=1)
        part = np.argpartition(-keys, kk - 1, axis=1)[:, :kk]
        sub = np.take_along_axis(keys, part, axis=1)
        inner = np.argsort(-sub, axis=1)
        return np.take_along_axis(part, inner, axis=1)
