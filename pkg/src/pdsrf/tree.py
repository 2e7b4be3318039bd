"""Randomized decision trees with weighted-Gini split selection.

Each node draws ``mtry`` candidate features (uniformly, from the features
that are non-constant at the node) and one uniform threshold per candidate,
then keeps the candidate minimizing the weighted child Gini impurity. Trees
are unpruned and stored as flat preorder arrays so batch routing is a few
vectorized passes instead of per-sample recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class GrowthConfig:
    n_classes: int
    n_features: int
    mtry: int | None = None  # None resolves to round(sqrt(n_features)), at least 1
    min_leaf_size: int = 1
    max_depth: int | None = None

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.mtry is not None and not 1 <= self.mtry <= self.n_features:
            raise ValueError(f"mtry must lie in [1, {self.n_features}], got {self.mtry}")
        if self.min_leaf_size < 1:
            raise ValueError("min_leaf_size must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def resolved_mtry(self) -> int:
        if self.mtry is not None:
            return self.mtry
        return max(1, round(math.sqrt(self.n_features)))


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float  # samples with value < threshold go left


def gini_impurity(class_weights) -> float:
    """Gini impurity 1 - sum(p_i^2) of a class-weight vector.

    Proportions are computed from the normalized weights, so the result is
    invariant under scaling all weights by a common factor.
    """
    w = np.asarray(class_weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("class weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("at least one class weight must be positive")
    p = w / total
    return float(1.0 - p @ p)


def propose_splits(X_node, growth: GrowthConfig, rng) -> list[SplitCandidate]:
    """Draw up to ``mtry`` random split candidates for the samples at a node.

    ``X_node`` holds the feature rows present at the node. Candidate features
    are sampled without replacement from those with more than one distinct
    value; each gets one threshold drawn uniformly inside its (min, max)
    range, which guarantees both children are non-empty. Returns an empty
    list when every feature is constant, signaling "make a leaf".
    """
    X_node = np.asarray(X_node, dtype=float)
    lo = X_node.min(axis=0)
    hi = X_node.max(axis=0)
    usable = np.flatnonzero(hi > lo)
    if usable.size == 0:
        return []
    m = min(growth.resolved_mtry(), usable.size)
    chosen = rng.choice(usable, size=m, replace=False)
    candidates = []
    for f in chosen:
        t = rng.uniform(lo[f], hi[f])
        # uniform() can land exactly on the lower edge, which would leave the
        # left child empty; such a draw yields no candidate
        if lo[f] < t:
            candidates.append(SplitCandidate(int(f), float(t)))
    return candidates


class Tree:
    """An immutable trained tree over flat preorder node arrays.

    ``feature[i] == -1`` marks node ``i`` as a leaf; ``leaf_id[i]`` then holds
    its dense leaf index. ``leaf_class_weights[k]`` is the per-class training
    weight that reached leaf ``k``.
    """

    def __init__(self, feature, threshold, left, right, leaf_id,
                 leaf_class_weights, tree_seed, n_features):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.leaf_id = np.asarray(leaf_id, dtype=np.int32)
        self.leaf_class_weights = np.asarray(leaf_class_weights, dtype=float)
        self.tree_seed = int(tree_seed)
        self.n_features = int(n_features)
        totals = self.leaf_class_weights.sum(axis=1, keepdims=True)
        self.leaf_probs = self.leaf_class_weights / totals
        self.leaf_argmax = self.leaf_class_weights.argmax(axis=1)

    @property
    def num_leaves(self) -> int:
        return len(self.leaf_class_weights)

    @property
    def n_classes(self) -> int:
        return self.leaf_class_weights.shape[1]

    @property
    def num_nodes(self) -> int:
        return len(self.feature)

    def predict_leaf(self, features) -> int:
        """Route one feature vector to its leaf id (< threshold goes left)."""
        x = np.asarray(features, dtype=float)
        i = 0
        while self.feature[i] >= 0:
            if x[self.feature[i]] < self.threshold[i]:
                i = self.left[i]
            else:
                i = self.right[i]
        return int(self.leaf_id[i])

    def apply(self, X) -> np.ndarray:
        """Vectorized routing of a sample matrix to leaf ids."""
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int32)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] < self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return self.leaf_id[node]

    def predict_distribution(self, features) -> np.ndarray:
        """Normalized class weights of the reached leaf."""
        return self.leaf_probs[self.predict_leaf(features)]

    def serialize(self) -> str:
        """Deterministic flat text form, one preorder node per line."""
        lines = [f"tree seed={self.tree_seed} nodes={self.num_nodes} "
                 f"leaves={self.num_leaves} classes={self.n_classes}"]
        for i in range(self.num_nodes):
            if self.feature[i] >= 0:
                lines.append(f"{i} split f={self.feature[i]} t={self.threshold[i]!r} "
                             f"l={self.left[i]} r={self.right[i]}")
            else:
                w = ",".join(repr(float(v)) for v in self.leaf_class_weights[self.leaf_id[i]])
                lines.append(f"{i} leaf id={self.leaf_id[i]} w={w}")
        return "\n".join(lines) + "\n"


def build_tree(X, y, sample_weight, growth: GrowthConfig, seed) -> Tree:
    """Grow an unpruned tree on weighted samples, deterministically for a seed.

    Splitting recurses preorder (left subtree first). A node becomes a leaf
    when it is pure, holds fewer than ``2 * min_leaf_size`` samples, sits at
    ``max_depth``, or no split candidate exists. Among candidates the one
    with the lowest weighted child impurity wins, ties going to the earliest
    candidate in draw order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    w = np.asarray(sample_weight, dtype=float)
    if len(X) == 0:
        raise ValueError("cannot build a tree from an empty sample set")
    if X.ndim != 2 or X.shape[1] != growth.n_features:
        raise ValueError(f"expected {growth.n_features} feature columns")
    if len(y) != len(X) or len(w) != len(X):
        raise ValueError("X, y and sample_weight lengths differ")
    if np.any(w <= 0):
        raise ValueError("sample weights must be positive")
    if np.any(y < 0) or np.any(y >= growth.n_classes):
        raise ValueError("labels outside [0, n_classes)")

    rng = np.random.default_rng(seed)
    C = growth.n_classes
    feature, threshold, left, right, leaf_id = [], [], [], [], []
    leaf_weights = []

    # explicit preorder stack; children are patched into the parent slot
    stack = [(np.arange(len(X)), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node

        y_node = y[idx]
        w_node = w[idx]
        counts = np.bincount(y_node, weights=w_node, minlength=C)
        n = idx.size
        grown = (np.count_nonzero(counts) > 1
                 and n >= 2 * growth.min_leaf_size
                 and (growth.max_depth is None or depth < growth.max_depth))
        best = None
        if grown:
            X_node = X[idx]
            cands = propose_splits(X_node, growth, rng)
            if cands:
                best = _best_candidate(X_node, y_node, w_node, counts, cands, C)
        if best is None:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            leaf_id.append(len(leaf_weights))
            leaf_weights.append(counts)
            continue

        feature.append(best.feature)
        threshold.append(best.threshold)
        left.append(-1)
        right.append(-1)
        leaf_id.append(-1)
        mask = X_node[:, best.feature] < best.threshold
        # right pushed first so the left child is popped (and numbered) next
        stack.append((idx[~mask], depth + 1, node, False))
        stack.append((idx[mask], depth + 1, node, True))

    return Tree(feature, threshold, left, right, leaf_id,
                np.vstack(leaf_weights), seed if np.isscalar(seed) else 0,
                growth.n_features)


def _best_candidate(X_node, y_node, w_node, total_counts, cands, C):
    """Pick the candidate with minimal weighted child impurity, or None."""
    n = len(X_node)
    feats = np.array([c.feature for c in cands])
    thresholds = np.array([c.threshold for c in cands])
    masks = X_node[:, feats] < thresholds  # (n, m)

    weighted_onehot = np.zeros((n, C))
    weighted_onehot[np.arange(n), y_node] = w_node
    left_counts = masks.T.astype(float) @ weighted_onehot  # (m, C)
    right_counts = total_counts - left_counts

    wl = left_counts.sum(axis=1)
    wr = right_counts.sum(axis=1)
    valid = (wl > 0) & (wr > 0)
    if not np.any(valid):
        return None
    with np.errstate(invalid="ignore", divide="ignore"):
        gl = 1.0 - np.einsum("mc,mc->m", left_counts, left_counts) / (wl * wl)
        gr = 1.0 - np.einsum("mc,mc->m", right_counts, right_counts) / (wr * wr)
        score = (wl * gl + wr * gr) / (wl + wr)
    score[~valid] = np.inf
    return cands[int(np.argmin(score))]
