"""Tree ensembles: leaf signatures, proximity, vote aggregation, member replacement.

A sample's leaf signature is the vector of leaf ids it reaches across the
ensemble; the proximity of two samples is the fraction of trees routing them
to the same leaf. Signatures carry the forest epoch, which increments on
every tree replacement, so stale signatures are detected instead of silently
compared against a different ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StaleSignatureError
from .tree import Tree


@dataclass
class LeafSignature:
    leaf_ids: np.ndarray  # one leaf id per tree, in ensemble order
    epoch: int


def proximity(a: LeafSignature, b: LeafSignature) -> float:
    """Fraction of trees in which the two signatures share a leaf."""
    if a.epoch != b.epoch:
        raise StaleSignatureError(
            f"signatures from different forest epochs ({a.epoch} vs {b.epoch})")
    if len(a.leaf_ids) != len(b.leaf_ids):
        raise ValueError("signature lengths differ")
    return float(np.mean(a.leaf_ids == b.leaf_ids))


def weighted_vote(distributions, weights) -> np.ndarray:
    """Combine per-tree class distributions by non-negative weights.

    Returns the normalized weighted sum. An all-zero weight vector falls back
    to uniform weights so prediction never halts on a degenerate weighting.
    """
    dists = np.asarray(distributions, dtype=float)
    w = np.asarray(weights, dtype=float)
    if dists.ndim != 2 or len(dists) == 0:
        raise ValueError("need a non-empty (n_trees, n_classes) distribution matrix")
    if w.shape != (len(dists),):
        raise ValueError("one weight per distribution required")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if w.sum() == 0:
        w = np.ones_like(w)
    combined = w @ dists
    return combined / combined.sum()


class Forest:
    """Ordered ensemble of trees sharing one feature and class space."""

    def __init__(self, trees: list[Tree], n_classes: int, n_features: int, epoch: int = 0):
        if len(trees) < 1:
            raise ValueError("a forest needs at least one tree")
        for t in trees:
            if t.n_classes != n_classes or t.n_features != n_features:
                raise ValueError("all trees must share the forest's class and feature counts")
        self.trees = list(trees)
        self.n_classes = n_classes
        self.n_features = n_features
        self.epoch = epoch

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def signature(self, features) -> LeafSignature:
        ids = np.fromiter((t.predict_leaf(features) for t in self.trees),
                          dtype=np.int32, count=self.n_trees)
        return LeafSignature(leaf_ids=ids, epoch=self.epoch)

    def apply(self, X) -> np.ndarray:
        """Batch leaf signatures as an (n_samples, n_trees) matrix."""
        X = np.asarray(X, dtype=float)
        out = np.empty((len(X), self.n_trees), dtype=np.int32)
        for i, t in enumerate(self.trees):
            out[:, i] = t.apply(X)
        return out

    def vote_from_leaves(self, leaf_matrix, weights=None) -> np.ndarray:
        """Aggregate per-tree leaf distributions for pre-routed samples.

        ``weights`` is an optional (n_samples, n_trees) matrix of non-negative
        per-sample tree weights; None means the plain unweighted mean. Rows
        whose weights sum to zero fall back to the unweighted mean.
        """
        leaf_matrix = np.asarray(leaf_matrix)
        n = len(leaf_matrix)
        out = np.zeros((n, self.n_classes))
        if weights is None:
            for i, t in enumerate(self.trees):
                out += t.leaf_probs[leaf_matrix[:, i]]
            out /= self.n_trees
            return out
        weights = np.asarray(weights, dtype=float)
        for i, t in enumerate(self.trees):
            out += weights[:, i, None] * t.leaf_probs[leaf_matrix[:, i]]
        degenerate = weights.sum(axis=1) <= 0
        if np.any(degenerate):
            out[degenerate] = self.vote_from_leaves(leaf_matrix[degenerate])
        return out / out.sum(axis=1, keepdims=True)

    def vote_block(self, X, weights=None) -> np.ndarray:
        return self.vote_from_leaves(self.apply(X), weights)

    def unweighted_vote(self, features) -> np.ndarray:
        """Mean of the per-tree class distributions for one sample."""
        return self.vote_block(np.asarray(features, dtype=float)[None, :])[0]

    def replace_tree(self, index: int, new_tree: Tree) -> None:
        """Swap in a new tree and advance the epoch, invalidating old signatures."""
        if not 0 <= index < self.n_trees:
            raise ValueError(f"tree index {index} out of range [0, {self.n_trees})")
        if new_tree.n_classes != self.n_classes or new_tree.n_features != self.n_features:
            raise ValueError("replacement tree has a different class or feature count")
        self.trees[index] = new_tree
        self.epoch += 1

    def serialize(self) -> str:
        head = (f"forest epoch={self.epoch} trees={self.n_trees} "
                f"classes={self.n_classes} features={self.n_features}\n")
        return head + "".join(t.serialize() for t in self.trees)
