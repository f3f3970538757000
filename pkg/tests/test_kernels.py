import numpy as np
import pytest

from ssvepkit.kernels import KERNEL_KINDS, KernelSpec, kernel_matrix, prepare_kernel

EXPONENTIAL_KINDS = tuple(k for k in KERNEL_KINDS if k != "linear")


class TestKernelMatrix:
    def test_linear_matches_brute_force(self, rng):
        x1 = rng.standard_normal((7, 5))
        x2 = rng.standard_normal((9, 5))
        k = kernel_matrix(x1, x2, KernelSpec("linear"))
        oracle = np.array([[np.dot(a, b) for b in x2] for a in x1])
        np.testing.assert_allclose(k, oracle, atol=1e-12)

    @pytest.mark.parametrize("kind", EXPONENTIAL_KINDS)
    def test_unit_diagonal(self, kind, rng):
        x = rng.uniform(0.5, 2.0, (6, 8))  # positive values keep chi-square sane
        spec = prepare_kernel(KernelSpec(kind), x)
        k = kernel_matrix(x, x, spec)
        np.testing.assert_allclose(np.diag(k), 1.0, atol=1e-12)

    @pytest.mark.parametrize("kind", EXPONENTIAL_KINDS)
    def test_symmetry(self, kind, rng):
        x = rng.uniform(0.5, 2.0, (6, 8))
        spec = prepare_kernel(KernelSpec(kind), x)
        k = kernel_matrix(x, x, spec)
        np.testing.assert_allclose(k, k.T, atol=1e-12)

    def test_rbf_analytic(self):
        x1 = np.array([[0.0, 0.0]])
        x2 = np.array([[3.0, 4.0]])
        k = kernel_matrix(x1, x2, KernelSpec("rbf", gamma=0.1))
        np.testing.assert_allclose(k[0, 0], np.exp(-0.1 * 25.0))

    def test_cityblock_analytic(self):
        k = kernel_matrix(np.array([[0.0, 0.0]]), np.array([[1.0, 2.0]]), KernelSpec("cityblock", gamma=1.0))
        np.testing.assert_allclose(k[0, 0], np.exp(-9.0))  # d1 = 3, squared

    def test_chebyshev_analytic(self):
        k = kernel_matrix(np.array([[0.0, 0.0]]), np.array([[1.0, 2.0]]), KernelSpec("chebyshev", gamma=1.0))
        np.testing.assert_allclose(k[0, 0], np.exp(-4.0))

    def test_minkowski_p2_matches_rbf(self, rng):
        x = rng.standard_normal((5, 4))
        a = kernel_matrix(x, x, KernelSpec("minkowski", gamma=0.3, p=2.0))
        b = kernel_matrix(x, x, KernelSpec("rbf", gamma=0.3))
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_spearman_monotone_invariance(self, rng):
        x1 = rng.standard_normal((4, 10))
        x2 = rng.standard_normal((6, 10))
        spec = KernelSpec("spearman", gamma=0.5)
        base = kernel_matrix(x1, x2, spec)
        transformed = kernel_matrix(np.exp(x1), np.exp(x2), spec)  # strictly monotone map
        np.testing.assert_allclose(base, transformed, atol=1e-12)

    def test_standardized_euclidean_requires_scale(self, rng):
        x = rng.standard_normal((4, 3))
        with pytest.raises(ValueError, match="scale"):
            kernel_matrix(x, x, KernelSpec("standardized_euclidean", gamma=1.0))
        spec = prepare_kernel(KernelSpec("standardized_euclidean"), x)
        k = kernel_matrix(x, x, spec)
        np.testing.assert_allclose(np.diag(k), 1.0)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError, match="mismatch"):
            kernel_matrix(rng.standard_normal((3, 4)), rng.standard_normal((3, 5)), KernelSpec("rbf", gamma=1.0))

    def test_gamma_defaults_to_reciprocal_features(self, rng):
        x = rng.standard_normal((5, 8))
        spec = prepare_kernel(KernelSpec("rbf"), x)
        assert spec.gamma == pytest.approx(1.0 / 8.0)

    def test_correlation_vs_manual(self, rng):
        x1 = rng.standard_normal((1, 6))
        x2 = rng.standard_normal((1, 6))
        a, b = x1[0] - x1[0].mean(), x2[0] - x2[0].mean()
        s = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        k = kernel_matrix(x1, x2, KernelSpec("correlation", gamma=2.0))
        np.testing.assert_allclose(k[0, 0], np.exp(-2.0 * (1.0 - s) ** 2))

    def test_chi_square_positive_inputs(self, rng):
        x1 = rng.uniform(0.1, 5.0, (3, 7))
        x2 = rng.uniform(0.1, 5.0, (4, 7))
        k = kernel_matrix(x1, x2, KernelSpec("chi_square", gamma=0.01))
        d2 = ((x1[0] - x2[0]) ** 2 / (x1[0] + x2[0] + 1e-12)).sum()
        np.testing.assert_allclose(k[0, 0], np.exp(-0.01 * d2), rtol=1e-10)

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            KernelSpec("nope")
        with pytest.raises(ValueError):
            KernelSpec("rbf", gamma=-1.0)
        with pytest.raises(ValueError):
            KernelSpec("minkowski", p=0.5)
