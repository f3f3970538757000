import numpy as np
import pytest

from ssvepkit.kernels import KernelSpec, kernel_matrix
from ssvepkit.svm import (
    ova_train,
    platt_calibrate,
    platt_probability,
    smo_train,
    svm_decision,
    svm_train,
)

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([1.0, 1.0, -1.0, -1.0])


def dual_feasible(model, tol=1e-6):
    ok_box = np.all(model.alpha >= -1e-12) and np.all(model.alpha <= model.C + 1e-12)
    ok_sum = abs(np.sum(model.alpha * model.y)) <= tol
    return ok_box and ok_sum


def max_kkt_violation(kernel, model):
    f = kernel @ (model.alpha * model.y) + model.bias
    margins = model.y * f
    at_zero = model.alpha <= 1e-9
    at_c = model.alpha >= model.C - 1e-9
    free = ~at_zero & ~at_c
    violations = [0.0]
    if at_zero.any():
        violations.append(float(np.max(1.0 - margins[at_zero])))
    if at_c.any():
        violations.append(float(np.max(margins[at_c] - 1.0)))
    if free.any():
        violations.append(float(np.max(np.abs(margins[free] - 1.0))))
    return max(violations)


class TestSmo:
    def test_separable_clusters_margin(self):
        # closest opposite pair is (0,0) vs (2,0); all other points sit
        # farther from the separating plane x = 1, so the analytic margin is 1
        pos = np.array([[2.0, 0.0], [3.0, 1.0], [3.5, -1.0], [4.0, 0.5]])
        neg = np.array([[0.0, 0.0], [-1.0, 1.0], [-1.5, -0.5], [-2.0, 0.3]])
        x = np.vstack([pos, neg])
        y = np.array([1.0] * 4 + [-1.0] * 4)
        kernel = kernel_matrix(x, x, KernelSpec("linear"))
        model = smo_train(kernel, y, C=1e6)
        assert model.converged
        assert dual_feasible(model)
        f = kernel @ (model.alpha * model.y) + model.bias
        assert np.all(np.sign(f) == y)
        w = (model.alpha * model.y) @ x
        geometric_margin = np.min(y * f) / np.linalg.norm(w)
        assert geometric_margin >= 1.0 * (1.0 - 1e-3)

    def test_xor_linear_at_most_75(self):
        kernel = kernel_matrix(XOR_X, XOR_X, KernelSpec("linear"))
        model = smo_train(kernel, XOR_Y, C=10.0)
        f = kernel @ (model.alpha * model.y) + model.bias
        accuracy = np.mean(np.sign(f) == XOR_Y)
        assert accuracy <= 0.75

    def test_xor_rbf_separates(self):
        kernel = kernel_matrix(XOR_X, XOR_X, KernelSpec("rbf", gamma=1.0))
        model = smo_train(kernel, XOR_Y, C=100.0)
        assert model.converged
        f = kernel @ (model.alpha * model.y) + model.bias
        assert np.all(np.sign(f) == XOR_Y)
        assert max_kkt_violation(kernel, model) <= 1e-3

    def test_duplicated_points_leave_decision_unchanged(self, rng):
        # holds in the hard-margin regime: with the box constraint inactive,
        # duplicating points cannot change the (unique) optimal decision
        # function; it is only resolved to the precision the dual is solved to
        x = np.vstack([rng.normal(-2, 0.3, (15, 3)), rng.normal(2, 0.3, (15, 3))])
        y = np.array([-1.0] * 15 + [1.0] * 15)
        C = 100.0
        model_a, spec = svm_train(x, y, C=C, spec=KernelSpec("rbf", gamma=0.2), tol=1e-9)
        x2 = np.vstack([x, x])
        y2 = np.concatenate([y, y])
        model_b, _ = svm_train(x2, y2, C=C, spec=KernelSpec("rbf", gamma=0.2), tol=1e-9)
        assert np.max(model_a.alpha) < C and np.max(model_b.alpha) < C
        grid = rng.standard_normal((40, 3))
        fa = svm_decision(model_a, kernel_matrix(grid, x, spec))
        fb = svm_decision(model_b, kernel_matrix(grid, x2, spec))
        np.testing.assert_allclose(fa, fb, atol=1e-6)

    def test_deterministic_retrain(self, rng):
        x = rng.standard_normal((30, 4))
        y = np.sign(x[:, 0] + 0.1 * rng.standard_normal(30))
        y[y == 0] = 1.0
        kernel = kernel_matrix(x, x, KernelSpec("linear"))
        a = smo_train(kernel, y, C=1.0)
        b = smo_train(kernel, y, C=1.0)
        np.testing.assert_array_equal(a.alpha, b.alpha)
        assert a.bias == b.bias

    def test_single_class_rejected(self):
        kernel = np.eye(4)
        with pytest.raises(ValueError):
            smo_train(kernel, np.ones(4), C=1.0)

    def test_dual_feasibility_random_problems(self, rng):
        for _ in range(5):
            x = rng.standard_normal((40, 6))
            y = np.where(rng.random(40) > 0.5, 1.0, -1.0)
            if len(np.unique(y)) < 2:
                continue
            kernel = kernel_matrix(x, x, KernelSpec("rbf", gamma=0.2))
            model = smo_train(kernel, y, C=2.0)
            assert dual_feasible(model)
            assert max_kkt_violation(kernel, model) <= 1e-3


class TestPlatt:
    def test_probability_increases_with_decision(self, rng):
        decisions = np.concatenate([rng.normal(-2, 0.5, 100), rng.normal(2, 0.5, 100)])
        y = np.array([-1.0] * 100 + [1.0] * 100)
        a, b = platt_calibrate(decisions, y)
        assert a < 0
        grid = np.linspace(-3, 3, 50)
        probs = platt_probability(a, b, grid)
        assert np.all(np.diff(probs) > 0)

    def test_calibrated_probabilities_sane(self, rng):
        decisions = np.concatenate([rng.normal(-1, 0.3, 200), rng.normal(1, 0.3, 200)])
        y = np.array([-1.0] * 200 + [1.0] * 200)
        a, b = platt_calibrate(decisions, y)
        assert platt_probability(a, b, np.array([-2.0]))[0] < 0.1
        assert platt_probability(a, b, np.array([2.0]))[0] > 0.9


class TestOva:
    def test_five_class_synthetic_recovery(self, rng):
        centers = rng.standard_normal((5, 8)) * 4.0
        x_train = np.vstack([c + 0.3 * rng.standard_normal((20, 8)) for c in centers])
        y_train = np.repeat(np.arange(5.0), 20)
        x_test = np.vstack([c + 0.3 * rng.standard_normal((10, 8)) for c in centers])
        y_test = np.repeat(np.arange(5.0), 10)
        model = ova_train(x_train, y_train, C=1.0, spec=KernelSpec("linear"))
        predictions = model.predict(x_test)
        assert np.mean(predictions == y_test) >= 0.95

    def test_probabilities_sum_to_one(self, rng):
        x = rng.standard_normal((30, 4))
        y = rng.integers(0, 3, 30).astype(float)
        while len(np.unique(y)) < 3:
            y = rng.integers(0, 3, 30).astype(float)
        model = ova_train(x, y, C=1.0, spec=KernelSpec("rbf", gamma=0.5))
        probs = model.predict_proba(rng.standard_normal((10, 4)))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)

    def test_tie_broken_by_class_order(self):
        # two classes with identical geometry: scores tie, argmax picks first
        x = np.array([[0.0], [1.0], [0.0], [1.0]])
        y = np.array([0.0, 1.0, 0.0, 1.0])
        model = ova_train(x, y, C=1.0, spec=KernelSpec("linear"))
        scores = model.predict_scores(np.array([[0.5]]))
        assert scores.shape == (1, 2)
        predicted = model.predict(np.array([[0.5]]))[0]
        if scores[0, 0] == scores[0, 1]:
            assert predicted == 0.0

    def test_single_class_rejected(self, rng):
        x = rng.standard_normal((10, 3))
        with pytest.raises(ValueError, match="single class"):
            ova_train(x, np.zeros(10), C=1.0)

    def test_fingerprint_stable(self, rng):
        x = rng.standard_normal((20, 3))
        y = np.concatenate([np.zeros(10), np.ones(10)])
        a = ova_train(x, y, C=1.0)
        b = ova_train(x, y, C=1.0)
        assert a.fingerprint() == b.fingerprint()
