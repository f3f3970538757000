"""Feature selection: greedy information-theoretic criteria and projections.

The greedy selector supports the full family of mutual-information scoring
rules (MIM, MIFS, JMI, CMI, mRMR, CMIM, ICAP, CIFE, DISR, BetaGamma,
CONDRED). Each step appends the unselected feature with the highest score,
breaking ties toward the lowest feature index. On the first step every
criterion reduces to plain relevancy I(Xk;Y), since the selected set is
empty.

PCA and SVD projections are fit on training data only and reapplied
unchanged to test data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .infotheory import (
    DiscreteFeatureMatrix,
    conditional_mi,
    entropy_of_codes,
    joint_code,
    mutual_information,
)

FEAST_CRITERIA = (
    "mim",
    "mifs",
    "jmi",
    "cmi",
    "mrmr",
    "cmim",
    "icap",
    "cife",
    "disr",
    "betagamma",
    "condred",
)


@dataclass(frozen=True)
class SelectionResult:
    """Greedy selection output: chosen feature indices in selection order."""

    indices: tuple[int, ...]
    scores: tuple[float, ...]  # criterion value at each step
    criterion: str
    target_size: int

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("selected indices must be unique")
        if len(self.indices) > self.target_size:
            raise ValueError("more indices than requested")


def feast_select(
    x: DiscreteFeatureMatrix,
    y_codes: np.ndarray,
    criterion: str,
    d: int,
    beta: float = 1.0,
    gamma: float = 1.0,
) -> SelectionResult:
    """Greedy forward selection of `d` features under the named criterion.

    The CMI criterion conditions on the joint of everything selected so far;
    once that joint saturates (every candidate scores 0) selection stops
    early and fewer than `d` indices are returned.
    """
    if criterion not in FEAST_CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    n_features = x.n_features
    if d > n_features:
        raise ValueError(f"cannot select {d} of {n_features} features")
    if x.n_trials == 0:
        raise ValueError("empty training set")
    if not (np.isfinite(beta) and np.isfinite(gamma)):
        raise ValueError("criterion parameters must be finite")
    y_codes = np.asarray(y_codes, dtype=np.int64)

    cols = [x.codes[:, k] for k in range(n_features)]
    relevancy = np.array([mutual_information(cols[k], y_codes) for k in range(n_features)])

    selected: list[int] = []
    scores: list[float] = []
    # accumulated per-candidate sums over the selected set
    red_sum = np.zeros(n_features)  # sum_j I(Xk;Xj)
    cond_sum = np.zeros(n_features)  # sum_j I(Xk;Xj|Y)
    joint_rel_sum = np.zeros(n_features)  # sum_j I(XkXj;Y)
    disr_sum = np.zeros(n_features)  # sum_j I(XkXj;Y)/H(XkXjY)
    pair_max = np.full(n_features, -np.inf)  # max_j [I(Xk;Xj) - I(Xk;Xj|Y)]
    capped_sum = np.zeros(n_features)  # sum_j max(0, I(Xk;Xj) - I(Xk;Xj|Y))

    while len(selected) < d:
        best_k = -1
        best_score = -np.inf
        for k in range(n_features):
            if k in selected:
                continue
            score = _criterion_score(
                criterion,
                relevancy[k],
                len(selected),
                red_sum[k],
                cond_sum[k],
                joint_rel_sum[k],
                disr_sum[k],
                pair_max[k],
                capped_sum[k],
                beta,
                gamma,
                cols[k] if criterion == "cmi" else None,
                y_codes,
                [cols[j] for j in selected] if criterion == "cmi" else None,
            )
            if score > best_score + 1e-15:
                best_score = score
                best_k = k
        if criterion == "cmi" and selected and best_score <= 1e-12:
            break  # conditioning set saturated the estimate
        selected.append(best_k)
        scores.append(best_score)
        if len(selected) == d:
            break
        _update_accumulators(
            best_k, cols, y_codes, selected, red_sum, cond_sum, joint_rel_sum, disr_sum, pair_max, capped_sum
        )

    return SelectionResult(indices=tuple(selected), scores=tuple(scores), criterion=criterion, target_size=d)


def _criterion_score(
    criterion: str,
    rel: float,
    n_selected: int,
    red: float,
    cond: float,
    joint_rel: float,
    disr: float,
    pmax: float,
    capped: float,
    beta: float,
    gamma: float,
    xk,
    y_codes,
    selected_cols,
) -> float:
    if n_selected == 0:
        return rel
    if criterion == "mim":
        return rel
    if criterion == "mifs":
        return rel - beta * red
    if criterion == "jmi":
        return joint_rel
    if criterion == "cmi":
        return conditional_mi(xk, y_codes, joint_code(*selected_cols))
    if criterion == "mrmr":
        return rel - red / n_selected
    if criterion == "cmim":
        return rel - pmax
    if criterion == "icap":
        return rel - capped
    if criterion == "cife":
        return rel - red + cond
    if criterion == "disr":
        return disr
    if criterion == "betagamma":
        return rel - beta * red + gamma * cond
    if criterion == "condred":
        return rel + cond
    raise AssertionError(criterion)


def _update_accumulators(
    new_j: int,
    cols,
    y_codes,
    selected,
    red_sum,
    cond_sum,
    joint_rel_sum,
    disr_sum,
    pair_max,
    capped_sum,
) -> None:
    xj = cols[new_j]
    for k in range(len(cols)):
        if k in selected:
            continue
        xk = cols[k]
        red = mutual_information(xk, xj)
        cond = conditional_mi(xk, xj, y_codes)
        red_sum[k] += red
        cond_sum[k] += cond
        pair = joint_code(xk, xj)
        jrel = mutual_information(pair, y_codes)
        joint_rel_sum[k] += jrel
        hxyj = entropy_of_codes(joint_code(xk, xj, y_codes))
        disr_sum[k] += jrel / hxyj if hxyj > 0 else 0.0
        pair_max[k] = max(pair_max[k], red - cond)
        capped_sum[k] += max(0.0, red - cond)


@dataclass(frozen=True)
class Projection:
    """Orthonormal basis for a linear feature-space projection."""

    basis: np.ndarray  # (n_features, d), columns orthonormal
    dimension: int
    centering: np.ndarray | None  # mean vector for PCA, None for SVD
    spectrum: np.ndarray  # eigen/singular values, non-increasing
    method: str

    def __post_init__(self):
        gram = self.basis.T @ self.basis
        if not np.allclose(gram, np.eye(self.dimension), atol=1e-8):
            raise ValueError("basis columns must be orthonormal")
        if np.any(np.diff(self.spectrum) > 1e-10):
            raise ValueError("spectrum must be non-increasing")

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.centering is not None:
            x = x - self.centering
        return x @ self.basis

    def inverse(self, projected: np.ndarray) -> np.ndarray:
        x = projected @ self.basis.T
        if self.centering is not None:
            x = x + self.centering
        return x


def pca_fit(x: np.ndarray, d: int | None = None) -> Projection:
    """Top-d eigenvectors of the mean-centered training covariance."""
    x = np.asarray(x, dtype=np.float64)
    n, f = x.shape
    if d is None:
        d = min(n, f)
    if d < 1 or d > f:
        raise ValueError(f"dimension {d} out of range [1, {f}]")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / max(n - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]
    return Projection(
        basis=eigvecs[:, :d], dimension=d, centering=mean, spectrum=eigvals[:d], method="pca"
    )


def pca_apply(projection: Projection, x: np.ndarray) -> np.ndarray:
    return projection.apply(x)


def svd_fit(x: np.ndarray, d: int = 90) -> Projection:
    """Top-d right-singular vectors of the raw training matrix."""
    x = np.asarray(x, dtype=np.float64)
    n, f = x.shape
    if d < 1 or d > min(n, f):
        raise ValueError(f"dimension {d} out of range [1, {min(n, f)}]")
    _, s, vt = np.linalg.svd(x, full_matrices=False)
    return Projection(basis=vt[:d].T, dimension=d, centering=None, spectrum=s[:d], method="svd")


def svd_apply(projection: Projection, x: np.ndarray) -> np.ndarray:
    return projection.apply(x)
