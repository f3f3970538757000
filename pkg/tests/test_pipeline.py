from dataclasses import replace

import pytest

from ssvepkit.data import Dataset, DatasetParams, SynthSpec, synthesize
from ssvepkit.errors import ConfigError
from ssvepkit.pipeline import (
    PipelineConfig,
    config_from_dict,
    config_to_dict,
    default_preset,
    feature_length,
    load_config,
    optimal_preset,
    parse_config_text,
    save_config,
    validate_config,
)


@pytest.fixture(scope="module")
def dataset():
    return synthesize(SynthSpec(n_subjects=2, n_trials_per_freq=1, seed=1), DatasetParams(n_channels=4))


class TestConfigSerialization:
    def test_dict_round_trip(self):
        config = optimal_preset()
        assert config_from_dict(config_to_dict(config)) == config

    def test_file_round_trip(self, tmp_path):
        config = replace(default_preset(), exclude=((3, 4), (8, 4)), clf_gamma=0.25)
        path = tmp_path / "exp.cfg"
        save_config(config, path)
        assert load_config(path) == config

    def test_comments_and_blank_lines(self):
        config = parse_config_text("# comment\n\nclf.C = 2.5  # trailing\n")
        assert config.clf_c == 2.5

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("mystery.key = 1\n")
        assert info.value.key == "mystery.key"

    def test_bad_value_named(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("clf.C = banana\n")
        assert info.value.key == "clf.C"

    def test_keep_range_formats(self):
        assert parse_config_text("artifact.keep = 15..252\n").artifact_keep == (15, 252)
        assert parse_config_text("artifact.keep = 15-252\n").artifact_keep == (15, 252)

    def test_exclude_pairs(self):
        config = parse_config_text("exclude = 3:4, 4:2 8:4\n")
        assert config.exclude == ((3, 4), (4, 2), (8, 4))

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_text("just some words\n")


class TestPresets:
    def test_default_preset_values(self):
        config = default_preset()
        assert config.channel == "oz"
        assert config.filter_family == "iir_chebyshev1"
        assert config.artifact_method == "none"
        assert (config.feature_method, config.feature_nfft) == ("welch", 512)
        assert (config.feature_segment_len, config.feature_overlap) == (156, 0.5)
        assert config.select_method == "none"
        assert (config.clf_method, config.clf_kernel, config.clf_c) == ("svm", "linear", 1.0)
        assert config.duration_s == 5.0

    def test_optimal_preset_values(self):
        config = optimal_preset()
        assert config.channel == "ch138"
        assert config.filter_family == "iir_elliptic"
        assert (config.artifact_method, config.artifact_keep) == ("amuse", (15, 252))
        assert (config.feature_segment_len, config.feature_overlap) == (350, 0.75)
        assert (config.select_method, config.select_d) == ("svd", 90)
        assert config.clf_kernel == "spearman"


class TestFeatureLength:
    def test_welch_default_is_257(self):
        assert feature_length(default_preset(), 1250, 250.0) == 257

    def test_periodogram_range_restriction(self):
        config = replace(default_preset(), feature_method="periodogram", feature_nfft=2048,
                         feature_freq_range=(0.0, 40.0))
        # bins at k*250/2048 <= 40  ->  k <= 327.68  -> 328 bins including DC
        assert feature_length(config, 1250, 250.0) == 328

    def test_goertzel_distinct_targets(self):
        config = replace(default_preset(), feature_method="goertzel", feature_harmonics=4)
        freqs = (6.66, 7.50, 8.57, 10.00, 12.00)
        assert feature_length(config, 1250, 250.0, freqs) == 19  # 4*7.5 == 3*10

    def test_dwt_padded_length(self):
        config = replace(default_preset(), feature_method="dwt", feature_levels=5)
        assert feature_length(config, 1250, 250.0) == 1280

    def test_stft_frames_times_bins(self):
        config = replace(
            default_preset(), feature_method="stft", feature_segment_len=250,
            feature_overlap=0.5, feature_nfft=512, feature_freq_range=(0.0, 125.0),
        )
        # frames: (1250-250)//125 + 1 = 9; bins: 257
        assert feature_length(config, 1250, 250.0) == 9 * 257


class TestValidateConfig:
    def test_default_preset_valid(self, dataset):
        validate_config(default_preset(), dataset)

    def test_channel_out_of_range(self, dataset):
        with pytest.raises(ConfigError) as info:
            validate_config(replace(default_preset(), channel="99"), dataset)
        assert info.value.key == "channel"

    def test_artifact_keep_exceeds_channels(self, dataset):
        config = replace(default_preset(), artifact_method="amuse", artifact_keep=(1, 252))
        with pytest.raises(ConfigError) as info:
            validate_config(config, dataset)
        assert info.value.key == "artifact.keep"

    def test_duration_exceeds_trial(self, dataset):
        with pytest.raises(ConfigError) as info:
            validate_config(replace(default_preset(), duration_s=6.0), dataset)
        assert info.value.key == "duration"

    def test_segment_longer_than_trial(self, dataset):
        config = replace(default_preset(), feature_segment_len=1300, feature_nfft=2048)
        with pytest.raises(ConfigError) as info:
            validate_config(config, dataset)
        assert info.value.key == "features.segment_len"

    def test_periodogram_nfft_too_small(self, dataset):
        config = replace(default_preset(), feature_method="periodogram", feature_nfft=512)
        with pytest.raises(ConfigError) as info:
            validate_config(config, dataset)
        assert info.value.key == "features.nfft"

    def test_select_d_exceeds_features(self, dataset):
        config = replace(default_preset(), select_method="svd", select_d=300)
        with pytest.raises(ConfigError) as info:
            validate_config(config, dataset)
        assert info.value.key == "select.d"

    def test_empty_dataset_rejected(self):
        empty = Dataset(trials=(), stimulus_frequencies=(10.0,), channel_count=4, sample_rate=250.0)
        with pytest.raises(ConfigError, match="no trials"):
            validate_config(default_preset(), empty)
