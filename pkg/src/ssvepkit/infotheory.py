"""Discrete entropy and mutual-information estimates.

Features are discretized into equal-width bins computed on training data
only; all information measures then operate on integer code vectors and are
reported in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiscreteFeatureMatrix:
    """Integer codes per (trial, feature) plus the bin edges that produced them."""

    codes: np.ndarray  # (n_trials, n_features) int
    n_bins: int
    mins: np.ndarray  # per-feature training minimum
    maxs: np.ndarray  # per-feature training maximum

    @property
    def n_trials(self) -> int:
        return self.codes.shape[0]

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]


def discretize(x: np.ndarray, n_bins: int = 10) -> DiscreteFeatureMatrix:
    """Equal-width binning over per-feature training min/max."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("expected a non-empty (n_trials, n_features) matrix")
    mins = x.min(axis=0)
    maxs = x.max(axis=0)
    codes = _encode(x, n_bins, mins, maxs)
    return DiscreteFeatureMatrix(codes=codes, n_bins=n_bins, mins=mins, maxs=maxs)


def discretize_with(template: DiscreteFeatureMatrix, x: np.ndarray) -> np.ndarray:
    """Encode new rows with training-time bin edges; out-of-range values clamp."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != template.n_features:
        raise ValueError("feature count mismatch")
    return _encode(x, template.n_bins, template.mins, template.maxs)


def _encode(x: np.ndarray, n_bins: int, mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    span = maxs - mins
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(span > 0, (x - mins) / span, 0.0)
    codes = np.floor(frac * n_bins).astype(np.int64)
    return np.clip(codes, 0, n_bins - 1)


def encode_labels(y: np.ndarray) -> np.ndarray:
    """Map arbitrary labels to dense integer codes."""
    _, codes = np.unique(np.asarray(y), return_inverse=True)
    return codes.astype(np.int64)


def joint_code(*code_vectors: np.ndarray) -> np.ndarray:
    """Dense codes for the joint random variable of several code vectors."""
    stacked = np.column_stack(code_vectors)
    _, codes = np.unique(stacked, axis=0, return_inverse=True)
    return codes.astype(np.int64)


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in bits; 0*log(0) is taken as 0."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if total <= 0:
        raise ValueError("distribution sums to zero")
    p = p / total
    p = p[p > 0]  # after normalizing: tiny weights can underflow to zero
    return float(-np.sum(p * np.log2(p)))


def entropy_of_codes(codes: np.ndarray) -> float:
    return entropy(np.bincount(np.asarray(codes, dtype=np.int64)))


def mutual_information(x_codes: np.ndarray, y_codes: np.ndarray) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y), in bits."""
    x_codes = np.asarray(x_codes, dtype=np.int64)
    y_codes = np.asarray(y_codes, dtype=np.int64)
    if x_codes.shape != y_codes.shape:
        raise ValueError("code vectors must have equal length")
    hx = entropy_of_codes(x_codes)
    hy = entropy_of_codes(y_codes)
    hxy = entropy_of_codes(joint_code(x_codes, y_codes))
    return max(hx + hy - hxy, 0.0)


def conditional_mi(x_codes: np.ndarray, y_codes: np.ndarray, z_codes: np.ndarray) -> float:
    """I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z), in bits."""
    x_codes = np.asarray(x_codes, dtype=np.int64)
    y_codes = np.asarray(y_codes, dtype=np.int64)
    z_codes = np.asarray(z_codes, dtype=np.int64)
    hxz = entropy_of_codes(joint_code(x_codes, z_codes))
    hyz = entropy_of_codes(joint_code(y_codes, z_codes))
    hz = entropy_of_codes(z_codes)
    hxyz = entropy_of_codes(joint_code(x_codes, y_codes, z_codes))
    return max(hxz + hyz - hz - hxyz, 0.0)
