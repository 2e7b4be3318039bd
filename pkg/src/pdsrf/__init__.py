"""Proximity-driven streaming random forest for drifting data streams.

A fixed-size tree ensemble learns from a stream block by block. Predictions
weight each tree by its recent error on the cached samples most proximate to
the query (proximity = fraction of trees routing two samples to the same
leaf); training forgets by exponentially down-weighting old samples and by
iteratively replacing the worst tree whenever a new block's error is too
high.
"""

from .baseline import MajorityClassifier, RfRtlClassifier
from .cache import CachedSample, WindowCache
from .classifier import (PdsrfClassifier, PdsrfConfig,
                         StreamingForestClassifier, UpdateReport)
from .errors import ConfigError, StaleSignatureError, StreamFormatError
from .evaluation import (BlockMetrics, emit_report, load_report,
                         mean_accuracy, run_block_evaluation)
from .forest import Forest, LeafSignature, proximity, weighted_vote
from .stream import (Block, DriftSpec, HyperplaneDriftStream, LabeledSample,
                     StreamSchema, chunk, generate_drift_stream,
                     read_csv_stream, scan_csv_schema, write_stream_csv)
from .tree import (GrowthConfig, SplitCandidate, Tree, build_tree,
                   gini_impurity, propose_splits)
from .weighting import WeightingParams, classifier_weight, temporal_weight

__version__ = "0.1.0"

__all__ = [
    "Block", "BlockMetrics", "CachedSample", "ConfigError", "DriftSpec",
    "Forest", "GrowthConfig", "HyperplaneDriftStream", "LabeledSample",
    "LeafSignature", "MajorityClassifier", "PdsrfClassifier", "PdsrfConfig",
    "RfRtlClassifier", "SplitCandidate", "StaleSignatureError",
    "StreamFormatError", "StreamSchema", "StreamingForestClassifier", "Tree",
    "UpdateReport", "WeightingParams", "WindowCache", "build_tree", "chunk",
    "classifier_weight", "emit_report", "generate_drift_stream",
    "gini_impurity", "load_report", "mean_accuracy", "propose_splits",
    "proximity", "read_csv_stream", "run_block_evaluation",
    "scan_csv_schema", "temporal_weight", "weighted_vote",
    "write_stream_csv",
]
