import numpy as np
import pytest

from ssvepkit.infotheory import discretize, encode_labels
from ssvepkit.selection import FEAST_CRITERIA, feast_select, pca_fit, svd_fit


def random_discrete(rng, n=60, f=10, bins=4):
    x = rng.standard_normal((n, f))
    y = rng.integers(0, 3, n)
    return discretize(x, n_bins=bins), encode_labels(y)


class TestFeastSelect:
    def test_toy_mim_vs_mrmr(self):
        # f1 copies the label, f3 copies f1, f2 is balanced noise. MIM keeps
        # both copies; the redundancy penalty makes the copy worthless so
        # MRMR takes the noise column instead (tie resolved to lowest index).
        y = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        f1 = y.astype(float)
        f2 = np.array([0, 1, 0, 1, 0, 1, 0, 1], dtype=float)
        f3 = f1.copy()
        x = discretize(np.column_stack([f1, f2, f3]), n_bins=2)
        labels = encode_labels(y)
        assert feast_select(x, labels, "mim", d=2).indices == (0, 2)
        assert feast_select(x, labels, "mrmr", d=2).indices == (0, 1)

    def test_mim_order_is_descending_relevancy(self, rng):
        x, y = random_discrete(rng)
        from ssvepkit.infotheory import mutual_information

        result = feast_select(x, y, "mim", d=x.n_features)
        rel = [mutual_information(x.codes[:, k], y) for k in range(x.n_features)]
        expected = sorted(range(len(rel)), key=lambda k: (-rel[k], k))
        assert list(result.indices) == expected

    def test_mifs_beta_zero_equals_mim(self, rng):
        x, y = random_discrete(rng)
        a = feast_select(x, y, "mim", d=6)
        b = feast_select(x, y, "mifs", d=6, beta=0.0)
        assert a.indices == b.indices

    def test_betagamma_identities(self, rng):
        x, y = random_discrete(rng)
        assert feast_select(x, y, "betagamma", d=6, beta=0.0, gamma=0.0).indices == feast_select(
            x, y, "mim", d=6
        ).indices
        assert feast_select(x, y, "betagamma", d=6, beta=0.0, gamma=1.0).indices == feast_select(
            x, y, "condred", d=6
        ).indices

    def test_betagamma_one_one_equals_cife(self, rng):
        x, y = random_discrete(rng)
        assert feast_select(x, y, "betagamma", d=6, beta=1.0, gamma=1.0).indices == feast_select(
            x, y, "cife", d=6
        ).indices

    @pytest.mark.parametrize("criterion", FEAST_CRITERIA)
    def test_all_criteria_return_unique_indices(self, criterion, rng):
        x, y = random_discrete(rng)
        result = feast_select(x, y, criterion, d=5)
        assert len(result.indices) == len(set(result.indices))
        assert len(result.indices) <= 5
        if criterion != "cmi":
            assert len(result.indices) == 5

    @pytest.mark.parametrize("criterion", ("mim", "jmi", "mrmr", "cmim"))
    def test_permutation_equivariance(self, criterion):
        rng = np.random.default_rng(42)
        x_raw = rng.standard_normal((80, 8))
        y = encode_labels(rng.integers(0, 3, 80))
        x = discretize(x_raw, n_bins=4)
        base = feast_select(x, y, criterion, d=4).indices
        perm = rng.permutation(8)
        x_perm = discretize(x_raw[:, perm], n_bins=4)
        permuted = feast_select(x_perm, y, criterion, d=4).indices
        inverse = np.argsort(perm)
        assert tuple(inverse[list(base)][k] for k in range(4)) == tuple(
            sorted(inverse[list(base)], key=lambda i: list(permuted).index(i))
        )
        assert set(permuted) == set(inverse[list(base)])

    def test_cmi_saturates_early(self):
        rng = np.random.default_rng(3)
        x = discretize(rng.standard_normal((30, 12)), n_bins=5)
        y = encode_labels(rng.integers(0, 2, 30))
        result = feast_select(x, y, "cmi", d=12)
        assert len(result.indices) < 12

    def test_select_all_features(self, rng):
        x, y = random_discrete(rng, f=6)
        result = feast_select(x, y, "jmi", d=6)
        assert set(result.indices) == set(range(6))

    def test_d_too_large(self, rng):
        x, y = random_discrete(rng, f=4)
        with pytest.raises(ValueError):
            feast_select(x, y, "mim", d=5)

    def test_unknown_criterion(self, rng):
        x, y = random_discrete(rng, f=4)
        with pytest.raises(ValueError):
            feast_select(x, y, "magic", d=2)


class TestPca:
    def test_line_data_first_component(self):
        rng = np.random.default_rng(1)
        t = rng.standard_normal(200)
        x = np.column_stack([t, 2.0 * t])
        projection = pca_fit(x, d=2)
        assert projection.spectrum[0] / projection.spectrum.sum() >= 1.0 - 1e-10

    def test_full_rank_round_trip(self, rng):
        x = rng.standard_normal((40, 6))
        projection = pca_fit(x, d=6)
        restored = projection.inverse(projection.apply(x))
        np.testing.assert_allclose(restored, x, rtol=1e-8, atol=1e-10)

    def test_eigenvalues_non_increasing(self, rng):
        x = rng.standard_normal((50, 8))
        projection = pca_fit(x, d=8)
        assert np.all(np.diff(projection.spectrum) <= 1e-10)

    def test_centering_stored(self, rng):
        x = rng.standard_normal((30, 4)) + 100.0
        projection = pca_fit(x, d=2)
        np.testing.assert_allclose(projection.centering, x.mean(axis=0))


class TestSvd:
    def test_rank_one_reconstruction(self):
        u = np.arange(1.0, 11.0)[:, None]
        v = np.arange(1.0, 6.0)[None, :]
        x = u @ v
        projection = svd_fit(x, d=1)
        restored = projection.inverse(projection.apply(x))
        np.testing.assert_allclose(restored, x, atol=1e-9)

    def test_full_rank_frobenius(self, rng):
        x = rng.standard_normal((20, 10))
        projection = svd_fit(x, d=10)
        restored = projection.inverse(projection.apply(x))
        assert np.linalg.norm(restored - x) <= 1e-8 * np.linalg.norm(x)

    def test_matches_gram_eigendecomposition_oracle(self, rng):
        # oracle: eigenvectors of X'X span the same projection subspace
        x = rng.standard_normal((20, 10))
        projection = svd_fit(x, d=5)
        eigvals, eigvecs = np.linalg.eigh(x.T @ x)
        order = np.argsort(eigvals)[::-1]
        oracle_basis = eigvecs[:, order[:5]]
        mine = projection.apply(x)
        oracle = x @ oracle_basis
        # same subspace up to per-column sign
        for col in range(5):
            dot = np.dot(mine[:, col], oracle[:, col])
            np.testing.assert_allclose(np.abs(dot), np.linalg.norm(mine[:, col]) * np.linalg.norm(oracle[:, col]), rtol=1e-8)

    def test_no_centering(self, rng):
        x = rng.standard_normal((15, 5)) + 50.0
        assert svd_fit(x, d=3).centering is None

    def test_d_exceeds_rank_rejected(self, rng):
        x = rng.standard_normal((5, 10))
        with pytest.raises(ValueError):
            svd_fit(x, d=6)
