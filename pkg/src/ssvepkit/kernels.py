"""Kernel functions for the SVM classifier.

Beyond the usual linear and RBF kernels, a family of substituted kernels
plugs other distances d into exp(-gamma * d^2), and similarity kernels
(cosine, correlation, spearman) use exp(-gamma * (1 - s)^2) so that
K(x, x) = 1 holds for every exponential form.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

KERNEL_KINDS = (
    "linear",
    "rbf",
    "chi_square",
    "standardized_euclidean",
    "cityblock",
    "minkowski",
    "chebyshev",
    "cosine",
    "correlation",
    "spearman",
)

_CHI_EPS = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    gamma: float | None = None  # defaults to 1 / n_features at preparation
    p: float = 3.0  # minkowski exponent
    scale: np.ndarray | None = None  # per-feature std for standardized euclidean

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.p < 1:
            raise ValueError("minkowski exponent must be >= 1")


def prepare_kernel(spec: KernelSpec, x_train: np.ndarray) -> KernelSpec:
    """Fill data-dependent defaults (gamma, feature scale) from training data."""
    n_features = x_train.shape[1]
    gamma = spec.gamma if spec.gamma is not None else 1.0 / n_features
    scale = spec.scale
    if spec.kind == "standardized_euclidean" and scale is None:
        scale = x_train.std(axis=0, ddof=1)
        scale = np.where(scale > 0, scale, 1.0)
    return replace(spec, gamma=gamma, scale=scale)


def kernel_matrix(x1: np.ndarray, x2: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Gram matrix K[i, j] = k(x1[i], x2[j])."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
    x2 = np.atleast_2d(np.asarray(x2, dtype=np.float64))
    if x1.shape[1] != x2.shape[1]:
        raise ValueError(f"feature dimension mismatch: {x1.shape[1]} vs {x2.shape[1]}")
    gamma = spec.gamma if spec.gamma is not None else 1.0 / x1.shape[1]

    if spec.kind == "linear":
        return x1 @ x2.T

    if spec.kind in ("cosine", "correlation", "spearman"):
        similarity = _similarity(x1, x2, spec.kind)
        return np.exp(-gamma * (1.0 - similarity) ** 2)

    distance = _distance(x1, x2, spec)
    return np.exp(-gamma * distance**2)


def _distance(x1: np.ndarray, x2: np.ndarray, spec: KernelSpec) -> np.ndarray:
    if spec.kind == "rbf":
        return np.sqrt(_sq_euclidean(x1, x2))
    if spec.kind == "standardized_euclidean":
        scale = spec.scale
        if scale is None:
            raise ValueError("standardized_euclidean kernel requires a prepared scale")
        return np.sqrt(_sq_euclidean(x1 / scale, x2 / scale))
    # elementwise-broadcast distances, chunked over x1 rows to bound memory
    out = np.empty((x1.shape[0], x2.shape[0]))
    block = max(1, int(2e7 / max(x2.shape[0] * x2.shape[1], 1)))
    for start in range(0, x1.shape[0], block):
        lhs = x1[start : start + block, None, :]
        if spec.kind == "chi_square":
            diff = lhs - x2[None, :, :]
            denom = lhs + x2[None, :, :] + _CHI_EPS
            out[start : start + block] = np.sqrt(np.maximum((diff**2 / denom).sum(axis=2), 0.0))
        elif spec.kind == "cityblock":
            out[start : start + block] = np.abs(lhs - x2[None, :, :]).sum(axis=2)
        elif spec.kind == "minkowski":
            out[start : start + block] = (np.abs(lhs - x2[None, :, :]) ** spec.p).sum(axis=2) ** (1.0 / spec.p)
        elif spec.kind == "chebyshev":
            out[start : start + block] = np.abs(lhs - x2[None, :, :]).max(axis=2)
        else:
            raise AssertionError(spec.kind)
    return out


def _sq_euclidean(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    sq = (x1**2).sum(axis=1)[:, None] + (x2**2).sum(axis=1)[None, :] - 2.0 * x1 @ x2.T
    return np.maximum(sq, 0.0)


def _similarity(x1: np.ndarray, x2: np.ndarray, kind: str) -> np.ndarray:
    if kind == "spearman":
        x1 = np.apply_along_axis(rankdata, 1, x1)
        x2 = np.apply_along_axis(rankdata, 1, x2)
        kind = "correlation"
    if kind == "correlation":
        x1 = x1 - x1.mean(axis=1, keepdims=True)
        x2 = x2 - x2.mean(axis=1, keepdims=True)
    norm1 = np.linalg.norm(x1, axis=1)
    norm2 = np.linalg.norm(x2, axis=1)
    norm1 = np.where(norm1 > 0, norm1, 1.0)
    norm2 = np.where(norm2 > 0, norm2, 1.0)
    return (x1 / norm1[:, None]) @ (x2 / norm2[:, None]).T
