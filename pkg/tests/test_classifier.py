import numpy as np
import pytest

from pdsrf.cache import WindowCache
from pdsrf.classifier import (PdsrfClassifier, PdsrfConfig,
                              StreamingForestClassifier)
from pdsrf.errors import ConfigError
from pdsrf.forest import Forest
from pdsrf.stream import (DriftSpec, LabeledSample, chunk,
                          generate_drift_stream)
from pdsrf.tree import Tree


def small_config(**overrides):
    base = dict(block_size=30, window_size=90, k_neighbors=10, n_trees=10,
                seed=7)
    base.update(overrides)
    return PdsrfConfig(**base)


def random_blocks(n, block_size, n_features=4, n_classes=2, seed=0):
    rng = np.random.default_rng(seed)
    samples = [LabeledSample(id=i, features=rng.uniform(size=n_features),
                             label=int(rng.integers(n_classes)))
               for i in range(n)]
    return list(chunk(samples, block_size))


def concept_blocks(n, block_size, seed=0, **drift):
    spec = DriftSpec(n_samples=n, **drift)
    return list(chunk(generate_drift_stream(spec, seed=seed), block_size))


def trained(config=None, blocks=None, cls=PdsrfClassifier, n_features=4,
            n_classes=2):
    config = config or small_config()
    blocks = blocks if blocks is not None else random_blocks(90, 30)
    clf = cls(config, n_classes, n_features)
    clf.initialize(blocks[0])
    for b in blocks[1:]:
        clf.update_with_block(b)
    return clf


def leaf_only_tree(class_weights, n_features):
    return Tree(feature=[-1], threshold=[0.0], left=[-1], right=[-1],
                leaf_id=[0], leaf_class_weights=[class_weights],
                tree_seed=0, n_features=n_features)


class TestConfig:

    def test_defaults(self):
        c = PdsrfConfig()
        assert (c.block_size, c.window_size, c.k_neighbors, c.n_trees) == \
               (300, 1500, 20, 30)
        assert (c.epsilon, c.alpha) == (0.01, 0.05)
        assert c.max_replacements_per_block == 5
        assert c.seed == 42

    def test_validation(self):
        with pytest.raises(ConfigError):
            PdsrfConfig(block_size=0)
        with pytest.raises(ConfigError):
            PdsrfConfig(block_size=500, window_size=400)
        with pytest.raises(ConfigError):
            PdsrfConfig(k_neighbors=0)
        with pytest.raises(ConfigError):
            PdsrfConfig(k_neighbors=1501, window_size=1500)
        with pytest.raises(ConfigError):
            PdsrfConfig(n_trees=0)
        with pytest.raises(ConfigError):
            PdsrfConfig(replacement_threshold=1.2)
        with pytest.raises(ConfigError):
            PdsrfConfig(replacement_threshold=-0.1)
        with pytest.raises(ConfigError):
            PdsrfConfig(max_replacements_per_block=31, n_trees=30)
        with pytest.raises(ConfigError):
            PdsrfConfig(max_replacements_per_block=-1)
        with pytest.raises(ConfigError):
            PdsrfConfig(seed=-1)
        with pytest.raises(ValueError):
            PdsrfConfig(epsilon=0.0)
        with pytest.raises(ValueError):
            PdsrfConfig(alpha=-0.5)

    def test_as_text_lists_every_field(self):
        text = small_config().as_text()
        for key in ("block_size", "window_size", "k_neighbors", "n_trees",
                    "mtry", "min_leaf_size", "max_depth", "epsilon", "alpha",
                    "replacement_threshold", "max_replacements_per_block",
                    "seed"):
            assert f"{key}=" in text


class TestLifecycle:

    def test_initialize_builds_full_ensemble(self):
        blocks = random_blocks(90, 30)
        clf = PdsrfClassifier(small_config(), 2, 4)
        assert not clf.initialized
        clf.initialize(blocks[0])
        assert clf.initialized
        assert clf.forest.n_trees == 10
        assert clf.cache.size == 30
        assert clf.current_block == 0

    def test_initialize_twice_rejected(self):
        blocks = random_blocks(60, 30)
        clf = PdsrfClassifier(small_config(), 2, 4)
        clf.initialize(blocks[0])
        with pytest.raises(ConfigError):
            clf.initialize(blocks[1])

    def test_tiny_first_block_rejected(self):
        clf = PdsrfClassifier(small_config(), 2, 4)
        (block,) = random_blocks(1, 30)
        with pytest.raises(ConfigError):
            clf.initialize(block)

    def test_update_before_initialize_rejected(self):
        clf = PdsrfClassifier(small_config(), 2, 4)
        with pytest.raises(ConfigError):
            clf.update_with_block(random_blocks(30, 30)[0])

    def test_predict_before_initialize_rejected(self):
        clf = PdsrfClassifier(small_config(), 2, 4)
        with pytest.raises(ConfigError):
            clf.predict(np.zeros(4))
        with pytest.raises(ConfigError):
            clf.snapshot()

    def test_same_seed_same_snapshot(self):
        blocks = random_blocks(90, 30)
        a = trained(small_config(seed=11), blocks)
        b = trained(small_config(seed=11), blocks)
        assert a.snapshot() == b.snapshot()

    def test_different_seed_different_forest(self):
        blocks = random_blocks(90, 30)
        a = trained(small_config(seed=11), blocks)
        b = trained(small_config(seed=12), blocks)
        assert a.snapshot() != b.snapshot()

    def test_empty_block_update_is_a_recorded_no_op(self):
        clf = trained()
        before = clf.snapshot()
        (empty,) = list(chunk([], 1)) or [None]
        # chunk drops empty streams; build the empty block directly
        from pdsrf.stream import Block
        report = clf.update_with_block(Block(index=9, samples=[]))
        assert report.n_replacements == 0
        assert report.block_errors == []
        assert clf.current_block == 9
        assert clf.snapshot() != before  # only the block counter moved
        assert clf.forest.serialize() in before

    def test_cache_absorbs_each_block(self):
        blocks = random_blocks(90, 30)
        clf = PdsrfClassifier(small_config(), 2, 4)
        clf.initialize(blocks[0])
        clf.update_with_block(blocks[1])
        assert clf.cache.size == 60
        assert set(blocks[1].ids()).issubset(set(clf.cache.ids))
        clf.update_with_block(blocks[2])
        assert clf.cache.size == 90

    def test_epoch_stays_consistent(self):
        blocks = concept_blocks(240, 30, seed=3, drift="sudden",
                                drift_start=120, noise=0.05)
        clf = PdsrfClassifier(small_config(replacement_threshold=0.2), 2, 5)
        clf.initialize(blocks[0])
        assert clf.cache.forest_epoch == clf.forest.epoch
        for b in blocks[1:]:
            clf.update_with_block(b)
            assert clf.cache.forest_epoch == clf.forest.epoch
            clf.predict(np.full(5, 0.5))
            assert clf.cache.forest_epoch == clf.forest.epoch


class TestPrediction:

    def test_single_tree_forest_predicts_that_tree(self):
        blocks = random_blocks(60, 30)
        clf = trained(small_config(n_trees=1, max_replacements_per_block=0),
                      blocks)
        rng = np.random.default_rng(5)
        for x in rng.uniform(size=(20, 4)):
            expect = clf.forest.trees[0].predict_distribution(x)
            assert np.all(np.abs(clf.predict(x) - expect) <= 1e-12)

    def test_equal_flags_reduce_to_unweighted_vote(self):
        # when every tree has the same correctness column, neighborhood
        # errors agree, so the weighted vote must equal the plain mean
        clf = trained()
        rng = np.random.default_rng(6)
        shared = rng.random(clf.cache.size) < 0.5
        clf.cache.correct = np.tile(shared[:, None], (1, clf.forest.n_trees))
        X = rng.uniform(size=(25, 4))
        weighted = clf.predict_block(X)
        plain = clf.forest.vote_block(X)
        assert np.all(np.abs(weighted - plain) <= 1e-12)

    def test_two_tree_blend_hand_computed(self):
        # tree 0 always right (error 0 -> weight 1/eps = 100), tree 1 always
        # wrong (error 1 -> weight 1/1.01); the vote is their weighted mix
        blocks = random_blocks(60, 30)
        clf = trained(small_config(n_trees=2, max_replacements_per_block=0),
                      blocks)
        flags = np.zeros((clf.cache.size, 2), dtype=bool)
        flags[:, 0] = True
        clf.cache.correct = flags
        w0, w1 = 100.0, 1.0 / 1.01
        rng = np.random.default_rng(7)
        for x in rng.uniform(size=(15, 4)):
            d0 = clf.forest.trees[0].predict_distribution(x)
            d1 = clf.forest.trees[1].predict_distribution(x)
            expect = (w0 * d0 + w1 * d1) / (w0 + w1)
            assert np.all(np.abs(clf.predict(x) - expect) <= 1e-12)

    def test_empty_cache_falls_back_to_unweighted(self):
        clf = trained()
        stashed = clf.cache
        clf.cache = WindowCache(capacity=clf.config.window_size,
                                forest_epoch=clf.forest.epoch)
        rng = np.random.default_rng(8)
        X = rng.uniform(size=(10, 4))
        assert np.allclose(clf.predict_block(X), clf.forest.vote_block(X))
        clf.cache = stashed

    def test_classify_is_argmax_with_low_class_ties(self):
        config = small_config(n_trees=2, max_replacements_per_block=2)
        clf = StreamingForestClassifier(config, 2, 3)
        clf.forest = Forest([leaf_only_tree([4.0, 0.0], 3),
                             leaf_only_tree([0.0, 4.0], 3)], 2, 3)
        clf.cache = WindowCache(capacity=config.window_size, forest_epoch=0)
        x = np.array([0.2, 0.2, 0.2])
        assert np.allclose(clf.predict(x), [0.5, 0.5])
        assert clf.classify(x) == 0

    def test_classify_block_matches_scalar_classify(self):
        clf = trained()
        rng = np.random.default_rng(9)
        X = rng.uniform(size=(40, 4))
        assert clf.classify_block(X).tolist() == [clf.classify(x) for x in X]

    def test_predictions_are_distributions(self):
        clf = trained()
        rng = np.random.default_rng(10)
        dists = clf.predict_block(rng.uniform(size=(30, 4)))
        assert np.all(dists >= 0)
        assert np.allclose(dists.sum(axis=1), 1.0, atol=1e-9)


class TestReplacementLoop:

    def test_threshold_one_never_replaces(self):
        blocks = random_blocks(300, 30, seed=20)  # labels are pure noise
        clf = PdsrfClassifier(small_config(replacement_threshold=1.0), 2, 4)
        clf.initialize(blocks[0])
        initial = clf.forest.serialize()
        for b in blocks[1:]:
            report = clf.update_with_block(b)
            assert report.n_replacements == 0
            assert len(report.block_errors) == 1
        assert clf.forest.serialize() == initial
        assert clf.forest.epoch == 0

    def test_threshold_zero_replaces_at_the_cap_every_block(self):
        # random labels keep the block error strictly positive, so theta=0
        # always drives the loop to its replacement budget
        blocks = random_blocks(300, 30, seed=21)
        clf = PdsrfClassifier(small_config(replacement_threshold=0.0), 2, 4)
        clf.initialize(blocks[0])
        for b in blocks[1:]:
            report = clf.update_with_block(b)
            assert report.n_replacements == 5
            assert len(report.block_errors) == 6
        assert clf.forest.epoch == 9 * 5

    def test_loser_is_the_worst_tree_lowest_index_on_ties(self):
        chosen = []
        errors_seen = []

        class Recording(PdsrfClassifier):
            def _select_loser(self, per_tree_error):
                loser = super()._select_loser(per_tree_error)
                chosen.append(loser)
                errors_seen.append(np.array(per_tree_error, copy=True))
                return loser

        blocks = concept_blocks(300, 30, seed=22, drift="sudden",
                                drift_start=90, noise=0.1)
        clf = Recording(small_config(), 2, 5)
        clf.initialize(blocks[0])
        for b in blocks[1:]:
            clf.update_with_block(b)
        assert chosen, "drifted noisy stream should force replacements"
        for loser, e in zip(chosen, errors_seen):
            ties = np.flatnonzero(e == e.max())
            assert loser == ties[0]

    def test_report_replaced_indices_are_valid(self):
        blocks = concept_blocks(300, 30, seed=23, drift="sudden",
                                drift_start=90)
        clf = PdsrfClassifier(small_config(), 2, 5)
        clf.initialize(blocks[0])
        total = 0
        for b in blocks[1:]:
            report = clf.update_with_block(b)
            assert report.block_index == b.index
            assert 0 <= report.n_replacements <= 5
            assert len(report.block_errors) == report.n_replacements + 1
            assert all(0 <= i < 10 for i in report.replaced_indices)
            assert all(0.0 <= e <= 1.0 for e in report.block_errors)
            total += report.n_replacements
        assert clf.forest.epoch == total

    def test_loop_errors_stop_above_threshold_or_at_cap(self):
        blocks = concept_blocks(300, 30, seed=24, drift="sudden",
                                drift_start=90, noise=0.05)
        clf = PdsrfClassifier(small_config(), 2, 5)
        clf.initialize(blocks[0])
        theta = clf.config.replacement_threshold
        for b in blocks[1:]:
            report = clf.update_with_block(b)
            if report.n_replacements < 5:
                assert report.block_errors[-1] <= theta
            for e in report.block_errors[:-1]:
                assert e > theta

    def test_sudden_drift_triggers_replacement_immediately(self):
        # across 20 seeds, the first block after a sudden concept switch must
        # always fire at least one replacement at the default threshold
        for seed in range(20):
            blocks = concept_blocks(1200, 150, seed=seed, drift="sudden",
                                    drift_start=600)
            config = small_config(block_size=150, window_size=450, seed=seed)
            clf = PdsrfClassifier(config, 2, 5)
            clf.initialize(blocks[0])
            hits = {}
            for b in blocks[1:]:
                hits[b.index] = clf.update_with_block(b).n_replacements
            assert hits[4] >= 1, f"seed {seed}: no replacement at the drift block"


class TestForgetting:

    def test_frozen_model_stays_identical_and_competitive(self):
        # alpha=0 and theta=1 freeze the ensemble entirely; on a stationary
        # stream its test-then-train accuracy should track the initial forest
        blocks = concept_blocks(600, 30, seed=30, noise=0.05)
        config = small_config(replacement_threshold=1.0, alpha=0.0)
        clf = PdsrfClassifier(config, 2, 5)
        clf.initialize(blocks[0])
        initial_forest = clf.forest.serialize()
        hits_weighted = []
        hits_static = []
        for b in blocks[1:]:
            X, y = b.features_matrix(), b.labels()
            hits_weighted.extend(clf.classify_block(X) == y)
            hits_static.extend(clf.forest.vote_block(X).argmax(axis=1) == y)
            clf.update_with_block(b)
        assert clf.forest.serialize() == initial_forest
        gap = abs(np.mean(hits_weighted) - np.mean(hits_static))
        assert gap <= 0.05, f"weighted vs static accuracy gap {gap:.3f}"

    def test_temporal_weighting_prefers_recent_blocks(self):
        # white-box: capture the bootstrap weights used while replacing and
        # confirm they decay with block age at rate alpha
        captured = []

        class Capturing(PdsrfClassifier):
            def _grow_member(self, X, y, weights, tag):
                captured.append((np.array(weights, copy=True), tag))
                return super()._grow_member(X, y, weights, tag)

        blocks = concept_blocks(240, 30, seed=31, drift="sudden",
                                drift_start=120)
        clf = Capturing(small_config(alpha=0.25), 2, 5)
        clf.initialize(blocks[0])
        for b in blocks[1:]:
            clf.update_with_block(b)
        replacement_draws = [(w, tag) for w, tag in captured if tag[0] == 1]
        assert replacement_draws
        for weights, tag in replacement_draws:
            block_index = tag[1]
            ages = block_index - clf.cache.arrival_blocks
            # ages beyond the window shrank as the cache slid; recompute from
            # the weights themselves: w = exp(-alpha * age)
            implied = -np.log(weights) / 0.25
            assert np.all(implied >= -1e-9)
            assert np.all(np.diff(implied) <= 1e-9)  # newer entries never older
            assert np.max(weights) <= 1.0 + 1e-12

    def test_alpha_zero_means_uniform_bootstrap_weights(self):
        captured = []

        class Capturing(PdsrfClassifier):
            def _grow_member(self, X, y, weights, tag):
                captured.append(np.array(weights, copy=True))
                return super()._grow_member(X, y, weights, tag)

        blocks = concept_blocks(240, 30, seed=32, drift="sudden",
                                drift_start=120)
        clf = Capturing(small_config(alpha=0.0), 2, 5)
        clf.initialize(blocks[0])
        for b in blocks[1:]:
            clf.update_with_block(b)
        for weights in captured:
            assert np.all(weights == 1.0)
