"""Blind source separation for artifact removal.

Two decompositions over a (channels, samples) observation matrix:

* second-order method: whiten with the inverse square root of the channel
  covariance, then SVD of the symmetrized lag-1 covariance of the whitened
  data. The SVD orders components by singular value, which is what makes a
  fixed keep-range policy possible.
* fastica: whitening followed by fixed-point iteration with the tanh
  nonlinearity and symmetric decorrelation; components are reordered by
  decreasing variance afterwards since ICA has no intrinsic order.

Artifact removal drops components outside a keep range and back-projects
the rest through the pseudo-inverse of the unmixing matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BssDecomposition:
    """Unmixing matrix, extracted components, and ordering metadata."""

    unmixing: np.ndarray  # (n_components, n_channels)
    components: np.ndarray  # (n_components, n_samples) = unmixing @ observations
    method: str
    component_order: np.ndarray  # singular values or variances, non-increasing
    converged: bool = True

    @property
    def n_components(self) -> int:
        return self.unmixing.shape[0]


def _covariance(x: np.ndarray) -> np.ndarray:
    return x @ x.T / x.shape[1]


def _whitening_matrix(r_centered: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root of the channel covariance, regularized."""
    cov = _covariance(r_centered)
    n = cov.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    floor = 1e-10 * np.trace(cov) / n
    if np.any(eigvals < floor):
        warnings.warn("rank-deficient covariance: regularizing eigenvalues", stacklevel=3)
        eigvals = np.maximum(eigvals, floor)
    return eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T


def amuse_decompose(r: np.ndarray) -> BssDecomposition:
    """Two-step second-order decomposition with SVD-ranked components."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 2:
        raise ValueError("expected a (channels, samples) matrix")
    n_channels, n_samples = r.shape
    if n_samples <= n_channels:
        raise ValueError(f"need more samples ({n_samples}) than channels ({n_channels})")

    centered = r - r.mean(axis=1, keepdims=True)
    q = _whitening_matrix(centered)
    z = q @ centered

    lagged = z[:, 1:] @ z[:, :-1].T / (n_samples - 1)
    lagged = (lagged + lagged.T) / 2.0
    u, singular_values, _ = np.linalg.svd(lagged)
    unmixing = u.T @ q
    return BssDecomposition(
        unmixing=unmixing,
        components=unmixing @ r,
        method="amuse",
        component_order=singular_values,
    )


def fastica_decompose(
    r: np.ndarray,
    n_components: int | None = None,
    max_iter: int = 200,
    tol: float = 1e-6,
    seed: int = 0,
) -> BssDecomposition:
    """Fixed-point ICA with tanh nonlinearity and symmetric decorrelation."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 2:
        raise ValueError("expected a (channels, samples) matrix")
    n_channels, n_samples = r.shape
    if n_components is None:
        n_components = n_channels
    if not 1 <= n_components <= n_channels:
        raise ValueError(f"n_components must be in [1, {n_channels}]")

    centered = r - r.mean(axis=1, keepdims=True)
    cov = _covariance(centered)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:n_components]
    eigvals = np.maximum(eigvals[order], 1e-10 * np.trace(cov) / n_channels)
    # (n_components, n_channels) whitening restricted to the leading subspace
    q = np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs[:, order].T
    z = q @ centered

    rng = np.random.default_rng(seed)
    w = _sym_decorrelate(rng.standard_normal((n_components, n_components)))
    converged = False
    for _ in range(max_iter):
        wz = w @ z
        g = np.tanh(wz)
        g_prime = 1.0 - g**2
        w_new = g @ z.T / n_samples - np.diag(g_prime.mean(axis=1)) @ w
        w_new = _sym_decorrelate(w_new)
        delta = np.max(np.abs(np.abs(np.sum(w_new * w, axis=1)) - 1.0))
        w = w_new
        if delta < tol:
            converged = True
            break
    if not converged:
        warnings.warn("fastica did not converge; returning best estimate", stacklevel=2)

    unmixing = w @ q
    components = unmixing @ r
    variances = components.var(axis=1)
    order = np.argsort(variances)[::-1]
    return BssDecomposition(
        unmixing=unmixing[order],
        components=components[order],
        method="fastica",
        component_order=variances[order],
        converged=converged,
    )


def _sym_decorrelate(w: np.ndarray) -> np.ndarray:
    """W <- (W W^T)^(-1/2) W, making the rows orthonormal."""
    eigvals, eigvecs = np.linalg.eigh(w @ w.T)
    eigvals = np.maximum(eigvals, 1e-12)
    return eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T @ w


def reconstruct(decomposition: BssDecomposition, keep: range | slice | np.ndarray, channel: int) -> np.ndarray:
    """Back-project the kept components and return one channel's sequence.

    `keep` selects component indices (0-based). Components outside the set
    are zeroed before projecting through the pseudo-inverse of the unmixing
    matrix.
    """
    n_comp = decomposition.n_components
    if isinstance(keep, range):
        indices = np.array(list(keep), dtype=np.int64)
    elif isinstance(keep, slice):
        indices = np.arange(n_comp)[keep]
    else:
        indices = np.asarray(keep, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("keep set must be non-empty")
    if np.any(indices < 0) or np.any(indices >= n_comp):
        raise IndexError(f"component indices out of range [0, {n_comp})")

    kept = np.zeros_like(decomposition.components)
    kept[indices] = decomposition.components[indices]
    restored = np.linalg.pinv(decomposition.unmixing) @ kept
    if not 0 <= channel < restored.shape[0]:
        raise IndexError(f"channel {channel} out of range [0, {restored.shape[0]})")
    return restored[channel]
