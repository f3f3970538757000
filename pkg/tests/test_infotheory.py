import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssvepkit.infotheory import (
    conditional_mi,
    discretize,
    discretize_with,
    encode_labels,
    entropy,
    entropy_of_codes,
    joint_code,
    mutual_information,
)


class TestDiscretize:
    def test_equal_width_example(self):
        out = discretize(np.array([[0.0], [1.0], [2.0], [3.0]]), n_bins=2)
        np.testing.assert_array_equal(out.codes[:, 0], [0, 0, 1, 1])

    def test_constant_feature_all_zero(self):
        out = discretize(np.full((5, 2), 3.3), n_bins=10)
        assert np.all(out.codes == 0)

    def test_test_values_clamp(self):
        train = discretize(np.array([[0.0], [10.0]]), n_bins=5)
        codes = discretize_with(train, np.array([[-100.0], [100.0], [5.0]]))
        assert codes[0, 0] == 0
        assert codes[1, 0] == 4

    def test_needs_two_bins(self):
        with pytest.raises(ValueError):
            discretize(np.zeros((3, 1)), n_bins=1)


class TestEntropy:
    def test_uniform_four_symbols(self):
        assert entropy(np.full(4, 0.25)) == pytest.approx(2.0)

    def test_point_mass(self):
        assert entropy(np.array([0.0, 1.0, 0.0])) == 0.0

    def test_hand_computed(self):
        assert entropy(np.array([0.5, 0.25, 0.25])) == pytest.approx(1.5)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=16))
    def test_nonnegative_and_bounded(self, weights):
        p = np.asarray(weights)
        if p.sum() == 0:
            return
        h = entropy(p)
        assert 0.0 <= h <= np.log2(len(p)) + 1e-12


class TestMutualInformation:
    def test_identical_codes_give_entropy(self, rng):
        x = rng.integers(0, 4, 1000)
        assert mutual_information(x, x) == pytest.approx(entropy_of_codes(x), abs=1e-12)

    def test_independent_codes_near_zero(self, rng):
        x = rng.integers(0, 4, 10_000)
        y = rng.integers(0, 4, 10_000)
        assert mutual_information(x, y) <= 0.02

    def test_symmetry(self, rng):
        x = rng.integers(0, 5, 500)
        y = rng.integers(0, 3, 500)
        assert mutual_information(x, y) == pytest.approx(mutual_information(y, x), abs=1e-12)

    def test_xor_triple(self):
        # canonical synergy: Z = X ^ Y reveals nothing alone, everything given Y
        rng = np.random.default_rng(0)
        x = rng.integers(0, 2, 20_000)
        y = rng.integers(0, 2, 20_000)
        z = x ^ y
        assert mutual_information(x, z) <= 0.001
        assert conditional_mi(x, z, y) == pytest.approx(1.0, abs=0.01)

    def test_joint_code_counts(self):
        x = np.array([0, 0, 1, 1])
        y = np.array([0, 1, 0, 1])
        assert len(np.unique(joint_code(x, y))) == 4

    def test_encode_labels_dense(self):
        codes = encode_labels(np.array([6.66, 12.0, 6.66, 10.0]))
        assert codes.tolist() == [0, 2, 0, 1]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mutual_information(np.array([0, 1]), np.array([0, 1, 2]))
