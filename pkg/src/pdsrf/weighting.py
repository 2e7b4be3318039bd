"""Weighting functions: error-based classifier weights and temporal sample decay.

Both functions accept scalars or numpy arrays and are pure.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class WeightingParams:
    epsilon: float = 0.01  # regularizer in the error weight, must be > 0
    alpha: float = 0.05  # per-block decay rate, >= 0 (0 disables forgetting)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")


def classifier_weight(error_rate, epsilon=0.01):
    """Weight a classifier by its error rate E as 1 / (E^2 + epsilon).

    Error rates must lie in [0, 1]; epsilon must be positive. A perfect
    classifier gets weight 1/epsilon, a useless one roughly 1.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    e = np.asarray(error_rate, dtype=float)
    if np.any(e < 0.0) or np.any(e > 1.0):
        raise ValueError("error rate outside [0, 1]")
    w = 1.0 / (e * e + epsilon)
    if np.isscalar(error_rate) or e.ndim == 0:
        return float(w)
    return w


def temporal_weight(age, alpha=0.05):
    """Down-weight a sample of the given age (in blocks) as exp(-alpha * age)."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    a = np.asarray(age, dtype=float)
    if np.any(a < 0.0):
        raise ValueError("age must be >= 0")
    w = np.exp(-alpha * a)
    if np.isscalar(age) or a.ndim == 0:
        return float(w)
    return w
