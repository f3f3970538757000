"""Non-SVM classifiers: LDA, KNN, Gaussian naive Bayes, CART trees, and
tree ensembles (adaptive boosting and bootstrap aggregation).

All predictors are deterministic; vote and score ties resolve toward the
lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .util import hash_arrays

LDA_REGULARIZER = 1e-6
NB_VARIANCE_FLOOR = 1e-9


# ---------------------------------------------------------------- LDA


@dataclass
class LdaModel:
    classes: np.ndarray
    means: np.ndarray  # (n_classes, n_features)
    precision: np.ndarray  # inverse pooled covariance

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        proj = self.means @ self.precision  # (n_classes, n_features)
        return x @ proj.T - 0.5 * np.sum(self.means * proj, axis=1)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.scores(x), axis=1)]

    def fingerprint(self) -> str:
        return hash_arrays(self.classes, self.means, self.precision)


def lda_train(x: np.ndarray, y: np.ndarray) -> LdaModel:
    """Equal-prior linear discriminant with a regularized pooled covariance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    n, f = x.shape
    means = np.empty((classes.size, f))
    pooled = np.zeros((f, f))
    for i, c in enumerate(classes):
        rows = x[y == c]
        if rows.shape[0] < 2:
            raise ValueError(f"class {c!r} has fewer than 2 training samples")
        means[i] = rows.mean(axis=0)
        centered = rows - means[i]
        pooled += centered.T @ centered
    pooled /= max(n - classes.size, 1)
    pooled += LDA_REGULARIZER * np.mean(np.diag(pooled)) * np.eye(f)
    return LdaModel(classes=classes, means=means, precision=np.linalg.inv(pooled))


def lda_binary_params(model: LdaModel) -> tuple[np.ndarray, float]:
    """(w, b) of the two-class discriminant: predict class 1 when w.x > b."""
    if model.classes.size != 2:
        raise ValueError("binary parameters require exactly two classes")
    mu0, mu1 = model.means
    w = model.precision @ (mu1 - mu0)
    b = 0.5 * (mu1 @ model.precision @ mu1 - mu0 @ model.precision @ mu0)
    return w, float(b)


# ---------------------------------------------------------------- KNN


@dataclass
class KnnModel:
    x_train: np.ndarray
    y_train: np.ndarray
    classes: np.ndarray
    k: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.empty(x.shape[0], dtype=self.y_train.dtype)
        for i, row in enumerate(x):
            dist = np.linalg.norm(self.x_train - row, axis=1)
            nearest = np.argsort(dist, kind="stable")[: self.k]
            votes = np.array([np.sum(self.y_train[nearest] == c) for c in self.classes])
            out[i] = self.classes[int(np.argmax(votes))]
        return out

    def fingerprint(self) -> str:
        return hash_arrays(self.x_train, np.asarray(self.y_train, dtype=np.float64), np.array([self.k]))


def knn_train(x: np.ndarray, y: np.ndarray, k: int = 1) -> KnnModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if not 1 <= k <= len(y):
        raise ValueError(f"k={k} out of range [1, {len(y)}]")
    return KnnModel(x_train=x, y_train=y, classes=np.unique(y), k=k)


def knn_predict(x_train: np.ndarray, y_train: np.ndarray, x: np.ndarray, k: int = 1) -> np.ndarray:
    return knn_train(x_train, y_train, k=k).predict(x)


# ---------------------------------------------------------------- naive Bayes


@dataclass
class NaiveBayesModel:
    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray  # (n_classes, n_features)
    variances: np.ndarray

    def log_posteriors(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.empty((x.shape[0], self.classes.size))
        for i in range(self.classes.size):
            diff = x - self.means[i]
            out[:, i] = (
                np.log(self.priors[i])
                - 0.5 * np.sum(np.log(2.0 * np.pi * self.variances[i]))
                - 0.5 * np.sum(diff**2 / self.variances[i], axis=1)
            )
        return out

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        logp = self.log_posteriors(x)
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.log_posteriors(x), axis=1)]

    def fingerprint(self) -> str:
        return hash_arrays(self.classes, self.priors, self.means, self.variances)


def naive_bayes_train(x: np.ndarray, y: np.ndarray) -> NaiveBayesModel:
    """Gaussian likelihood per feature per class, variances floored."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    means = np.empty((classes.size, x.shape[1]))
    variances = np.empty_like(means)
    priors = np.empty(classes.size)
    for i, c in enumerate(classes):
        rows = x[y == c]
        priors[i] = rows.shape[0] / x.shape[0]
        means[i] = rows.mean(axis=0)
        variances[i] = np.maximum(rows.var(axis=0), NB_VARIANCE_FLOOR)
    return NaiveBayesModel(classes=classes, priors=priors, means=means, variances=variances)


# ---------------------------------------------------------------- CART


@dataclass
class TreeNode:
    prediction: object = None  # set on leaves
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class TreeModel:
    root: TreeNode
    classes: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = []
        for row in x:
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] < node.threshold else node.right
            out.append(node.prediction)
        return np.asarray(out)

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def fingerprint(self) -> str:
        spans: list[float] = []

        def walk(node: TreeNode) -> None:
            if node.is_leaf:
                spans.extend([-1.0, float(np.flatnonzero(self.classes == node.prediction)[0])])
            else:
                spans.extend([float(node.feature), node.threshold])
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return hash_arrays(np.asarray(spans), self.classes)


def _gini_best_split(
    x: np.ndarray, y_idx: np.ndarray, weights: np.ndarray, n_classes: int, min_leaf: int
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, impurity) over all midpoint splits.

    Scans features then thresholds in ascending order and keeps strictly
    better splits only, so ties resolve to the lowest feature index and then
    the lowest threshold.
    """
    total_w = weights.sum()
    counts_total = np.zeros(n_classes)
    np.add.at(counts_total, y_idx, weights)
    best = None
    # zero-improvement splits are allowed: an impure node keeps splitting as
    # long as any threshold separates distinct values, so unlimited-depth
    # trees drive consistent training data to purity
    best_impurity = np.inf
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y_idx[order]
        ws = weights[order]
        cum = np.zeros((len(ys) + 1, n_classes))
        wcum = np.concatenate([[0.0], np.cumsum(ws)])
        for i, (c, wv) in enumerate(zip(ys, ws)):
            cum[i + 1] = cum[i]
            cum[i + 1, c] += wv
        # split after position i (left = first i+1 sorted samples)
        for i in range(len(ys) - 1):
            if xs[i] == xs[i + 1]:
                continue
            n_left = i + 1
            n_right = len(ys) - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            wl, wr = wcum[i + 1], total_w - wcum[i + 1]
            if wl <= 0 or wr <= 0:
                continue
            gini_l = 1.0 - np.sum((cum[i + 1] / wl) ** 2)
            gini_r = 1.0 - np.sum(((counts_total - cum[i + 1]) / wr) ** 2)
            impurity = (wl * gini_l + wr * gini_r) / total_w
            if impurity < best_impurity - 1e-12:
                best_impurity = impurity
                best = (f, (xs[i] + xs[i + 1]) / 2.0, impurity)
    return best


def tree_train(
    x: np.ndarray,
    y: np.ndarray,
    max_depth: int | None = None,
    min_leaf: int = 1,
    sample_weight: np.ndarray | None = None,
) -> TreeModel:
    """Greedy binary CART on Gini impurity with majority-class leaves."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    y_idx = np.searchsorted(classes, y)
    weights = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)

    def majority(idx: np.ndarray) -> object:
        counts = np.zeros(classes.size)
        np.add.at(counts, y_idx[idx], weights[idx])
        return classes[int(np.argmax(counts))]

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        if (
            (max_depth is not None and depth >= max_depth)
            or np.unique(y_idx[idx]).size == 1
            or idx.size < 2 * min_leaf
        ):
            return TreeNode(prediction=majority(idx))
        split = _gini_best_split(x[idx], y_idx[idx], weights[idx], classes.size, min_leaf)
        if split is None:
            return TreeNode(prediction=majority(idx))
        f, thr, _ = split
        mask = x[idx, f] < thr
        return TreeNode(
            feature=f,
            threshold=thr,
            left=build(idx[mask], depth + 1),
            right=build(idx[~mask], depth + 1),
        )

    return TreeModel(root=build(np.arange(len(y)), 0), classes=classes)


def tree_predict(model: TreeModel, x: np.ndarray) -> np.ndarray:
    return model.predict(x)


# ---------------------------------------------------------------- ensembles


@dataclass
class EnsembleModel:
    classes: np.ndarray
    learners: list[TreeModel] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        votes = np.zeros((x.shape[0], self.classes.size))
        for learner, weight in zip(self.learners, self.weights):
            pred = learner.predict(x)
            for i, c in enumerate(self.classes):
                votes[pred == c, i] += weight
        return self.classes[np.argmax(votes, axis=1)]

    def fingerprint(self) -> str:
        return hash_arrays(
            self.classes, np.asarray(self.weights), *[np.frombuffer(t.fingerprint().encode(), dtype=np.uint8) for t in self.learners]
        )


def adaboost_train(
    x: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 100,
    max_depth: int = 1,
    seed: int = 0,
    max_retries: int = 5,
) -> EnsembleModel:
    """Multi-class adaptive boosting over shallow trees.

    Rounds whose weak learner does no better than chance are retried on a
    bootstrap resample a few times, then boosting stops with the rounds
    collected so far.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    k = classes.size
    n = len(y)
    rng = np.random.default_rng(seed)
    weights = np.full(n, 1.0 / n)
    ensemble = EnsembleModel(classes=classes)

    for _ in range(n_rounds):
        tree = tree_train(x, y, max_depth=max_depth, sample_weight=weights)
        mis = tree.predict(x) != y
        err = float(weights[mis].sum() / weights.sum())
        retries = 0
        while err >= 1.0 - 1.0 / k and retries < max_retries:
            idx = rng.integers(0, n, size=n)
            tree = tree_train(x[idx], y[idx], max_depth=max_depth)
            mis = tree.predict(x) != y
            err = float(weights[mis].sum() / weights.sum())
            retries += 1
        if err >= 1.0 - 1.0 / k:
            break
        if err <= 0.0:
            ensemble.learners.append(tree)
            ensemble.weights.append(np.log((1.0 - 1e-10) / 1e-10) + np.log(k - 1.0))
            break
        alpha = np.log((1.0 - err) / err) + np.log(k - 1.0)
        ensemble.learners.append(tree)
        ensemble.weights.append(alpha)
        weights *= np.exp(alpha * mis)
        weights /= weights.sum()
    return ensemble


def bagging_train(
    x: np.ndarray,
    y: np.ndarray,
    n_learners: int = 100,
    max_depth: int | None = None,
    seed: int = 0,
    bootstrap: bool = True,
) -> EnsembleModel:
    """Equal-weight vote over trees trained on bootstrap resamples."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    ensemble = EnsembleModel(classes=np.unique(y))
    n = len(y)
    for _ in range(n_learners):
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        ensemble.learners.append(tree_train(x[idx], y[idx], max_depth=max_depth))
        ensemble.weights.append(1.0)
    return ensemble


def ensemble_predict(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    return model.predict(x)
