"""Streaming forest classifier with proximity-weighted voting and forgetting.

The core loop per arriving block: score (done by the harness before update),
push the block into the sliding window cache, then iteratively replace the
worst tree while the ensemble error on the new block stays above a threshold.
New trees learn from a weighted bootstrap of the window in which sample
weights decay exponentially with age in blocks.

Both weighting policies are injectable. With proximity weighting off and the
temporal decay rate forced to zero, the exact same code path is a plain
replace-the-loser random forest, which keeps baseline comparisons honest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cache import WindowCache
from .errors import ConfigError
from .forest import Forest
from .stream import Block
from .tree import GrowthConfig, build_tree
from .weighting import WeightingParams, classifier_weight, temporal_weight

# seed-derivation tags, so initial trees and replacement trees never share
# an RNG stream no matter how the block/tree indices collide
_INIT_TREES = 0
_REPLACEMENT_TREES = 1


@dataclass
class PdsrfConfig:
    """Hyperparameters for the streaming forest and its forgetting policies."""

    block_size: int = 300
    window_size: int = 1500
    k_neighbors: int = 20
    n_trees: int = 30
    mtry: int | None = None
    min_leaf_size: int = 1
    max_depth: int | None = None
    epsilon: float = 0.01
    alpha: float = 0.05
    replacement_threshold: float = 0.3
    max_replacements_per_block: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1")
        if self.window_size < self.block_size:
            raise ConfigError(
                f"window_size ({self.window_size}) must be >= block_size "
                f"({self.block_size})")
        if not 1 <= self.k_neighbors <= self.window_size:
            raise ConfigError(
                f"k_neighbors must lie in [1, window_size], got {self.k_neighbors}")
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if not 0.0 <= self.replacement_threshold <= 1.0:
            raise ConfigError("replacement_threshold must lie in [0, 1]")
        if not 0 <= self.max_replacements_per_block <= self.n_trees:
            raise ConfigError(
                "max_replacements_per_block must lie in [0, n_trees]")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        # delegate range checks on the weighting constants
        WeightingParams(epsilon=self.epsilon, alpha=self.alpha)

    def growth(self, n_classes: int, n_features: int) -> GrowthConfig:
        return GrowthConfig(n_classes=n_classes, n_features=n_features,
                            mtry=self.mtry, min_leaf_size=self.min_leaf_size,
                            max_depth=self.max_depth)

    def as_text(self) -> str:
        parts = [f"block_size={self.block_size}",
                 f"window_size={self.window_size}",
                 f"k_neighbors={self.k_neighbors}",
                 f"n_trees={self.n_trees}",
                 f"mtry={self.mtry}",
                 f"min_leaf_size={self.min_leaf_size}",
                 f"max_depth={self.max_depth}",
                 f"epsilon={self.epsilon!r}",
                 f"alpha={self.alpha!r}",
                 f"replacement_threshold={self.replacement_threshold!r}",
                 f"max_replacements_per_block={self.max_replacements_per_block}",
                 f"seed={self.seed}"]
        return " ".join(parts)


@dataclass
class UpdateReport:
    """What one block update did.

    ``block_errors[0]`` is the ensemble error on the block before any
    replacement and ``block_errors[-1]`` after the last one; entries in
    between track the loop. ``replaced_indices`` lists the loser tree of each
    iteration in order.
    """

    block_index: int
    replaced_indices: list[int] = field(default_factory=list)
    block_errors: list[float] = field(default_factory=list)

    @property
    def n_replacements(self) -> int:
        return len(self.replaced_indices)


class StreamingForestClassifier:
    """Block-streaming forest with replace-the-loser forgetting.

    ``proximity_weighted`` turns per-sample tree weighting from neighborhood
    errors on and off; ``temporal_alpha`` sets the training-weight decay rate
    (None takes it from the config). The plain baseline is this class with
    proximity weighting off and decay zero.
    """

    def __init__(self, config: PdsrfConfig, n_classes: int, n_features: int,
                 *, proximity_weighted: bool = True,
                 temporal_alpha: float | None = None):
        if n_classes < 2:
            raise ConfigError("need at least two classes")
        self.config = config
        self.n_classes = int(n_classes)
        self.n_features = int(n_features)
        self.proximity_weighted = bool(proximity_weighted)
        self.temporal_alpha = config.alpha if temporal_alpha is None else float(temporal_alpha)
        if self.temporal_alpha < 0:
            raise ConfigError("temporal decay rate must be >= 0")
        self._growth = config.growth(self.n_classes, self.n_features)
        self.forest: Forest | None = None
        self.cache = WindowCache(capacity=config.window_size)
        self.current_block = -1

    @property
    def initialized(self) -> bool:
        return self.forest is not None

    # -- training ---------------------------------------------------------

    def initialize(self, block: Block) -> None:
        """Train the initial ensemble on the first block and seed the cache."""
        if self.initialized:
            raise ConfigError("classifier is already initialized")
        if block.size < 2:
            raise ConfigError(
                f"first block has {block.size} samples; need at least 2")
        X = block.features_matrix()
        y = block.labels()
        weights = np.ones(block.size)
        trees = [self._grow_member(X, y, weights, (_INIT_TREES, t))
                 for t in range(self.config.n_trees)]
        self.forest = Forest(trees, n_classes=self.n_classes,
                             n_features=self.n_features)
        self.cache = WindowCache(capacity=self.config.window_size,
                                 forest_epoch=self.forest.epoch)
        self.cache.push_block(block, self.forest)
        self.current_block = block.index

    def update_with_block(self, block: Block) -> UpdateReport:
        """Fold a tested block into the model, replacing losers while too wrong.

        The block enters the cache first: its cached flags feed both the
        per-tree error scans of the replacement loop and the proximity
        weighting of whatever queries come next.
        """
        if not self.initialized:
            raise ConfigError("initialize must run before updates")
        report = UpdateReport(block_index=block.index)
        if block.size == 0:
            self.current_block = block.index
            return report
        self.cache.push_block(block, self.forest)
        m = min(block.size, self.cache.size)
        cfg = self.config
        error = self._scored_error(m)
        report.block_errors.append(error)
        while (error > cfg.replacement_threshold
               and len(report.replaced_indices) < cfg.max_replacements_per_block):
            per_tree_error = 1.0 - self.cache.correct[-m:].mean(axis=0)
            loser = self._select_loser(per_tree_error)
            ages = block.index - self.cache.arrival_blocks
            weights = temporal_weight(ages, self.temporal_alpha)
            tag = (_REPLACEMENT_TREES, block.index, len(report.replaced_indices))
            new_tree = self._grow_member(self.cache.X, self.cache.labels,
                                         weights, tag)
            self.forest.replace_tree(loser, new_tree)
            self.cache.refresh_for_replacement(loser, self.forest)
            report.replaced_indices.append(loser)
            error = self._scored_error(m)
            report.block_errors.append(error)
        self.current_block = block.index
        return report

    def _select_loser(self, per_tree_error) -> int:
        # ties go to the lowest tree index (argmax returns the first maximum)
        return int(np.argmax(per_tree_error))

    def _grow_member(self, X, y, weights, tag):
        """One tree from a weighted bootstrap, reproducible from (seed, tag)."""
        ss = np.random.SeedSequence([self.config.seed, *tag])
        bootstrap_seed, growth_seed = (int(s) for s in ss.generate_state(2))
        rng = np.random.default_rng(bootstrap_seed)
        idx = rng.choice(len(y), size=len(y), replace=True, p=weights / weights.sum())
        return build_tree(X[idx], y[idx], sample_weight=weights[idx],
                          growth=self._growth, seed=growth_seed)

    # -- prediction -------------------------------------------------------

    def predict_block(self, X) -> np.ndarray:
        """Class distributions for a feature matrix, one row per sample."""
        if not self.initialized:
            raise ConfigError("initialize must run before predictions")
        X = np.asarray(X, dtype=float)
        return self._vote_from_signatures(self.forest.apply(X))

    def predict(self, features) -> np.ndarray:
        return self.predict_block(np.asarray(features, dtype=float)[None, :])[0]

    def classify_block(self, X) -> np.ndarray:
        # argmax takes the first maximum, i.e. ties break to the lowest class
        return self.predict_block(X).argmax(axis=1)

    def classify(self, features) -> int:
        return int(self.predict(features).argmax())

    def _vote_from_signatures(self, leaf_matrix) -> np.ndarray:
        if self.proximity_weighted and self.cache.size > 0:
            neighbors = self.cache.nearest_indices(leaf_matrix,
                                                   self.config.k_neighbors)
            neighborhood_error = 1.0 - self.cache.correct[neighbors].mean(axis=1)
            weights = classifier_weight(neighborhood_error, self.config.epsilon)
            return self.forest.vote_from_leaves(leaf_matrix, weights)
        return self.forest.vote_from_leaves(leaf_matrix)

    def _scored_error(self, m: int) -> float:
        """Unweighted ensemble error on the newest m cached samples.

        The replacement loop asks whether the forest itself still fits the
        stream. The proximity-weighted vote is the wrong probe for that: it
        compensates for bad trees at prediction time, so measuring with it
        stops replacements while most of the ensemble is still trained on a
        dead concept, and recovery stalls far below pre-drift accuracy. The
        plain vote keeps the pressure on until the trees are actually fixed.
        """
        votes = self.forest.vote_from_leaves(self.cache.signatures[-m:])
        predicted = votes.argmax(axis=1)
        return float(np.mean(predicted != self.cache.labels[-m:]))

    # -- introspection ----------------------------------------------------

    def snapshot(self) -> str:
        """Deterministic text form of config, position and the whole forest."""
        if not self.initialized:
            raise ConfigError("nothing to snapshot before initialization")
        return (f"config {self.config.as_text()}\n"
                f"current_block {self.current_block}\n"
                + self.forest.serialize())


class PdsrfClassifier(StreamingForestClassifier):
    """Proximity-driven streaming random forest: both policies enabled."""

    def __init__(self, config: PdsrfConfig, n_classes: int, n_features: int):
        super().__init__(config, n_classes, n_features,
                         proximity_weighted=True, temporal_alpha=config.alpha)
