import numpy as np
import pytest

from ssvepkit.data import DatasetParams, SynthSpec, synthesize


@pytest.fixture(scope="session")
def small_dataset():
    """3 subjects x 5 freqs x 2 trials at high SNR, 8 channels."""
    spec = SynthSpec(n_subjects=3, n_trials_per_freq=2, snr_db=20.0, n_harmonics=2, seed=11)
    return synthesize(spec, DatasetParams(n_channels=8))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
