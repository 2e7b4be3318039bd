"""Labeled-sample streams: CSV ingestion, a synthetic drift generator, and blocking.

Every source yields ``LabeledSample`` objects with sequential ids; ``chunk``
groups them into fixed-size blocks for test-then-train evaluation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, StreamFormatError

# samples drawn per vectorized batch inside the generator; fixed so that a
# given (spec, seed) always produces the same stream
_GEN_CHUNK = 4096


@dataclass
class LabeledSample:
    id: int
    features: np.ndarray
    label: int
    arrival_block: int = -1  # set when the sample is placed into a block


@dataclass
class StreamSchema:
    n_features: int
    n_classes: int
    label_column: int = -1
    attribute_kinds: str = "numeric"  # only numeric attributes are supported
    # original label values in sorted order; None means labels are already
    # dense 0-based integers
    label_values: tuple | None = None

    def __post_init__(self):
        if self.n_features < 1:
            raise ConfigError("schema needs at least one attribute column")
        if self.n_classes < 2:
            raise ConfigError("schema needs at least two classes")
        if self.label_values is not None:
            self._label_index = {v: i for i, v in enumerate(self.label_values)}
        else:
            self._label_index = None

    def map_label(self, raw: int) -> int:
        if self._label_index is None:
            if not 0 <= raw < self.n_classes:
                raise ValueError(f"label {raw} outside [0, {self.n_classes})")
            return raw
        try:
            return self._label_index[raw]
        except KeyError:
            raise ValueError(f"label {raw} not among declared labels {self.label_values}")


@dataclass
class Block:
    index: int
    samples: list

    @property
    def size(self) -> int:
        return len(self.samples)

    def features_matrix(self) -> np.ndarray:
        if not hasattr(self, "_X"):
            self._X = np.array([s.features for s in self.samples], dtype=float)
        return self._X

    def labels(self) -> np.ndarray:
        if not hasattr(self, "_y"):
            self._y = np.fromiter((s.label for s in self.samples), dtype=np.int64,
                                  count=len(self.samples))
        return self._y

    def ids(self) -> np.ndarray:
        return np.fromiter((s.id for s in self.samples), dtype=np.int64,
                           count=len(self.samples))


def _looks_like_header(row) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def _parse_label(cell: str, path, line_no) -> int:
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        value = float(cell)
    except ValueError:
        raise StreamFormatError(f"{path}:{line_no}: label {cell!r} is not an integer")
    if not value.is_integer():
        raise StreamFormatError(f"{path}:{line_no}: label {cell!r} is not an integer")
    return int(value)


def scan_csv_schema(path, label_column: int = -1) -> StreamSchema:
    """Single streaming pass over a CSV: infer attribute count and the label set.

    Returns a schema whose label mapping sends the sorted distinct labels to
    0..C-1 (so 1-based label columns come out 0-based).
    """
    n_columns = None
    labels = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if n_columns is None and _looks_like_header(row):
                continue
            if n_columns is None:
                n_columns = len(row)
                if n_columns < 2:
                    raise StreamFormatError(
                        f"{path}:{line_no}: need at least one attribute and a label column")
            elif len(row) != n_columns:
                raise StreamFormatError(
                    f"{path}:{line_no}: expected {n_columns} fields, got {len(row)}")
            labels.add(_parse_label(row[label_column], path, line_no))
    if n_columns is None:
        raise StreamFormatError(f"{path}: no data rows")
    return StreamSchema(n_features=n_columns - 1,
                        n_classes=len(labels),
                        label_column=label_column,
                        label_values=tuple(sorted(labels)))


def read_csv_stream(path, schema: StreamSchema) -> Iterator[LabeledSample]:
    """Yield samples from a CSV file in order, one row at a time.

    Rows must contain ``schema.n_features`` numeric attributes plus the label
    column; a header row (any non-numeric cell) is skipped automatically.
    Malformed rows and out-of-range labels abort with the offending line number.
    """
    expected = schema.n_features + 1
    label_col = schema.label_column % expected
    sample_id = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if sample_id == 0 and line_no == 1 and _looks_like_header(row):
                continue
            if len(row) != expected:
                raise StreamFormatError(
                    f"{path}:{line_no}: expected {expected} fields, got {len(row)}")
            raw_label = _parse_label(row[label_col], path, line_no)
            try:
                label = schema.map_label(raw_label)
            except ValueError as exc:
                raise StreamFormatError(f"{path}:{line_no}: {exc}")
            try:
                features = np.array(
                    [float(row[j]) for j in range(expected) if j != label_col])
            except ValueError:
                raise StreamFormatError(f"{path}:{line_no}: non-numeric attribute value")
            yield LabeledSample(id=sample_id, features=features, label=label)
            sample_id += 1


@dataclass
class DriftSpec:
    """Parameters of the shifting-hyperplane synthetic stream.

    ``drift_start``/``drift_end`` are sample indices. A sudden drift switches
    concepts at ``drift_start``; a gradual drift ramps the probability of the
    new concept linearly from 0 at ``drift_start`` to 1 at ``drift_end``.
    """

    n_samples: int
    n_features: int = 5
    n_classes: int = 2
    drift: str = "none"  # none | sudden | gradual
    drift_start: int | None = None
    drift_end: int | None = None
    noise: float = 0.0

    def __post_init__(self):
        if self.n_samples < 0:
            raise ConfigError("n_samples must be >= 0")
        if self.n_features < 1:
            raise ConfigError("n_features must be >= 1")
        if self.n_classes != 2:
            raise ConfigError("hyperplane concepts are binary, n_classes must be 2")
        if self.drift not in ("none", "sudden", "gradual"):
            raise ConfigError(f"unknown drift type {self.drift!r}")
        if not 0.0 <= self.noise < 1.0:
            raise ConfigError("noise must lie in [0, 1)")
        if self.drift == "sudden" and self.drift_start is None:
            raise ConfigError("sudden drift needs drift_start")
        if self.drift == "gradual":
            if self.drift_start is None or self.drift_end is None:
                raise ConfigError("gradual drift needs drift_start and drift_end")
            if self.drift_start > self.drift_end:
                raise ConfigError("gradual drift window is reversed "
                                  f"({self.drift_start} > {self.drift_end})")


class HyperplaneDriftStream:
    """Binary labels from a random hyperplane, drifting to a second one.

    Features are uniform in [0, 1]^D. The old and new separating directions
    are random unit vectors, the new one orthogonalized against the old so the
    two concepts are maximally unrelated. Offsets put each plane through the
    cube center, keeping classes roughly balanced.
    """

    def __init__(self, spec: DriftSpec, seed: int):
        self.spec = spec
        self.seed = seed
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
        w = rng.normal(size=spec.n_features)
        self._w_old = w / np.linalg.norm(w)
        v = rng.normal(size=spec.n_features)
        if spec.n_features > 1:
            v = v - (v @ self._w_old) * self._w_old
        self._w_new = v / np.linalg.norm(v)
        self._b_old = self._w_old.sum() / 2.0
        self._b_new = self._w_new.sum() / 2.0

    def concept_old(self, X) -> np.ndarray:
        return (np.asarray(X) @ self._w_old > self._b_old).astype(np.int64)

    def concept_new(self, X) -> np.ndarray:
        return (np.asarray(X) @ self._w_new > self._b_new).astype(np.int64)

    def new_concept_probability(self, index: int) -> float:
        """Probability that the sample at this stream position is labeled by the new concept."""
        s = self.spec
        if s.drift == "none":
            return 0.0
        if s.drift == "sudden":
            return 1.0 if index >= s.drift_start else 0.0
        if index <= s.drift_start:
            return 0.0
        if index >= s.drift_end:
            return 1.0
        return (index - s.drift_start) / (s.drift_end - s.drift_start)

    def __iter__(self) -> Iterator[LabeledSample]:
        s = self.spec
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 1]))
        for start in range(0, s.n_samples, _GEN_CHUNK):
            m = min(_GEN_CHUNK, s.n_samples - start)
            X = rng.uniform(size=(m, s.n_features))
            # concept-choice and noise draws happen unconditionally so that
            # streams with the same seed share X across drift/noise settings
            u_concept = rng.random(m)
            u_noise = rng.random(m)
            idx = np.arange(start, start + m)
            p_new = np.array([self.new_concept_probability(i) for i in idx])
            labels = np.where(u_concept < p_new, self.concept_new(X), self.concept_old(X))
            labels = np.where(u_noise < s.noise, 1 - labels, labels)
            for j in range(m):
                yield LabeledSample(id=int(idx[j]), features=X[j], label=int(labels[j]))


def generate_drift_stream(spec: DriftSpec, seed: int) -> Iterator[LabeledSample]:
    """Deterministic synthetic stream for the given spec and seed."""
    return iter(HyperplaneDriftStream(spec, seed))


def chunk(stream: Iterable[LabeledSample], block_size: int) -> Iterator[Block]:
    """Group a sample stream into blocks of ``block_size`` (last may be short)."""
    if block_size < 1:
        raise ConfigError("block_size must be >= 1")
    index = 0
    pending = []
    for sample in stream:
        sample.arrival_block = index
        pending.append(sample)
        if len(pending) == block_size:
            yield Block(index=index, samples=pending)
            index += 1
            pending = []
    if pending:
        yield Block(index=index, samples=pending)


def write_stream_csv(samples: Iterable[LabeledSample], path) -> int:
    """Write samples as CSV rows (attributes then label); returns the row count."""
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for s in samples:
            writer.writerow([repr(float(v)) for v in s.features] + [s.label])
            n += 1
    return n
