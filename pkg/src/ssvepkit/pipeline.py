"""Experiment configuration: one declarative record per full pipeline.

Configs round-trip through a flat ``key = value`` text format (comments
start with ``#``). Two bundled presets mirror the study's baseline and tuned
configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data import Dataset, resolve_channel
from .errors import ConfigError
from .kernels import KERNEL_KINDS
from .preprocess import FILTER_FAMILIES, FilterSpec
from .selection import FEAST_CRITERIA

ARTIFACT_METHODS = ("none", "amuse", "fastica")
FEATURE_METHODS = ("welch", "periodogram", "goertzel", "yule_ar", "stft", "dwt")
SELECT_METHODS = ("none",) + FEAST_CRITERIA + ("pca", "svd")
CLASSIFIER_METHODS = ("svm", "lda", "knn", "nb", "tree", "adaboost", "bagging")


@dataclass(frozen=True)
class PipelineConfig:
    channel: str = "oz"
    duration_s: float = 5.0
    exclude: tuple[tuple[int, int], ...] = ()  # (subject, session) pairs

    filter_family: str = "iir_chebyshev1"  # or "none" for raw trials
    filter_stopband1: float = 4.0
    filter_passband1: float = 5.0
    filter_passband2: float = 48.0
    filter_stopband2: float = 50.0
    filter_atten1: float = 60.0
    filter_atten2: float = 60.0
    filter_ripple: float = 1.0
    filter_max_order: int = 400

    artifact_method: str = "none"
    artifact_keep: tuple[int, int] = (15, 252)  # 1-based inclusive component range

    feature_method: str = "welch"
    feature_nfft: int = 512
    feature_segment_len: int = 156
    feature_overlap: float = 0.5
    feature_window: str = "hamming"
    feature_freq_range: tuple[float, float] = (0.0, 125.0)
    feature_ar_order: int = 20
    feature_levels: int = 5
    feature_harmonics: int = 4  # goertzel targets: stimulus freqs x 1..harmonics

    select_method: str = "none"
    select_d: int = 90
    select_beta: float = 1.0
    select_gamma: float = 1.0
    select_bins: int = 10

    clf_method: str = "svm"
    clf_kernel: str = "linear"
    clf_c: float = 1.0
    clf_gamma: float | None = None
    clf_p: float = 3.0
    clf_k: int = 1
    clf_n_learners: int = 100
    clf_max_depth: int | None = None
    clf_seed: int = 0

    def filter_spec(self) -> FilterSpec | None:
        if self.filter_family == "none":
            return None
        return FilterSpec(
            stopband1_hz=self.filter_stopband1,
            passband1_hz=self.filter_passband1,
            passband2_hz=self.filter_passband2,
            stopband2_hz=self.filter_stopband2,
            stop_atten1_db=self.filter_atten1,
            stop_atten2_db=self.filter_atten2,
            passband_ripple_db=self.filter_ripple,
            family=self.filter_family,
            max_fir_order=self.filter_max_order,
        )


_KEY_MAP = {
    "channel": ("channel", str),
    "duration": ("duration_s", float),
    "exclude": ("exclude", "exclude"),
    "filter.family": ("filter_family", str),
    "filter.stopband1": ("filter_stopband1", float),
    "filter.passband1": ("filter_passband1", float),
    "filter.passband2": ("filter_passband2", float),
    "filter.stopband2": ("filter_stopband2", float),
    "filter.atten1": ("filter_atten1", float),
    "filter.atten2": ("filter_atten2", float),
    "filter.ripple": ("filter_ripple", float),
    "filter.max_order": ("filter_max_order", int),
    "artifact.method": ("artifact_method", str),
    "artifact.keep": ("artifact_keep", "range"),
    "features.method": ("feature_method", str),
    "features.nfft": ("feature_nfft", int),
    "features.segment_len": ("feature_segment_len", int),
    "features.overlap": ("feature_overlap", float),
    "features.window": ("feature_window", str),
    "features.freq_range": ("feature_freq_range", "band"),
    "features.ar_order": ("feature_ar_order", int),
    "features.levels": ("feature_levels", int),
    "features.harmonics": ("feature_harmonics", int),
    "select.method": ("select_method", str),
    "select.d": ("select_d", int),
    "select.beta": ("select_beta", float),
    "select.gamma": ("select_gamma", float),
    "select.bins": ("select_bins", int),
    "clf.method": ("clf_method", str),
    "clf.kernel": ("clf_kernel", str),
    "clf.C": ("clf_c", float),
    "clf.gamma": ("clf_gamma", "optional_float"),
    "clf.p": ("clf_p", float),
    "clf.k": ("clf_k", int),
    "clf.n_learners": ("clf_n_learners", int),
    "clf.max_depth": ("clf_max_depth", "optional_int"),
    "clf.seed": ("clf_seed", int),
}
_FIELD_TO_KEY = {fname: key for key, (fname, _) in _KEY_MAP.items()}


def _parse_value(kind, raw: str, key: str):
    raw = raw.strip()
    try:
        if kind is str:
            return raw
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "optional_float":
            return None if raw in ("", "none", "auto") else float(raw)
        if kind == "optional_int":
            return None if raw in ("", "none") else int(raw)
        if kind == "range":  # "15..252" or "15-252"
            sep = ".." if ".." in raw else "-"
            lo, hi = raw.split(sep)
            return (int(lo), int(hi))
        if kind == "band":  # "0-125" or "0,125"
            sep = "," if "," in raw else "-"
            lo, hi = raw.split(sep)
            return (float(lo), float(hi))
        if kind == "exclude":  # "3:4, 4:2"
            pairs = []
            for chunk in raw.replace(",", " ").split():
                subj, sess = chunk.split(":")
                pairs.append((int(subj), int(sess)))
            return tuple(pairs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})", key=key) from None
    raise AssertionError(kind)


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        if not value:
            return ""
        if isinstance(value[0], tuple):  # exclude pairs
            return ", ".join(f"{s}:{e}" for s, e in value)
        if all(isinstance(v, int) for v in value):  # keep range
            return f"{value[0]}..{value[1]}"
        return f"{value[0]:g},{value[1]:g}"
    return str(value)


def config_to_dict(config: PipelineConfig) -> dict[str, str]:
    """Flat key/value view using the config-file key names."""
    return {key: _format_value(getattr(config, fname)) for key, (fname, _) in _KEY_MAP.items()}


def config_from_dict(items: dict[str, str], base: PipelineConfig | None = None) -> PipelineConfig:
    config = base or PipelineConfig()
    fields = {}
    for key, raw in items.items():
        if key not in _KEY_MAP:
            raise ConfigError(f"unknown config key {key!r}", key=key)
        fname, kind = _KEY_MAP[key]
        fields[fname] = _parse_value(kind, str(raw), key)
    return replace(config, **fields)


def parse_config_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    items: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        items[key.strip()] = raw.strip()
    return config_from_dict(items, base=base)


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    return parse_config_text(Path(path).read_text(), base=base)


def save_config(config: PipelineConfig, path: str | Path) -> None:
    lines = [f"{key} = {value}" for key, value in config_to_dict(config).items()]
    Path(path).write_text("\n".join(lines) + "\n")


def default_preset() -> PipelineConfig:
    """Baseline: Oz channel, Chebyshev I band-pass, averaged-segment spectrum
    (512-point grid, 156-sample segments, half overlap), no artifact removal,
    no selection, linear SVM at C=1."""
    return PipelineConfig()


def optimal_preset() -> PipelineConfig:
    """Tuned: channel 138, elliptic band-pass, component range 15..252 kept
    after the second-order decomposition, 350-sample segments at 0.75
    overlap, 90 features retained by SVD, rank-correlation kernel SVM."""
    return replace(
        default_preset(),
        channel="ch138",
        filter_family="iir_elliptic",
        artifact_method="amuse",
        artifact_keep=(15, 252),
        feature_segment_len=350,
        feature_overlap=0.75,
        select_method="svd",
        select_d=90,
        clf_kernel="spearman",
    )


PRESETS = {"default": default_preset, "optimal": optimal_preset}


def feature_length(
    config: PipelineConfig, n_samples: int, sample_rate: float, stimulus_frequencies: tuple[float, ...] = ()
) -> int:
    """Expected feature-vector length; depends on parameters only."""
    n_used = int(round(config.duration_s * sample_rate))
    n_used = min(n_used, n_samples)
    lo, hi = config.feature_freq_range
    nfft = config.feature_nfft
    bins = np.arange(nfft) * sample_rate / nfft
    in_range = int(np.count_nonzero((bins >= lo) & (bins <= hi)))
    if config.feature_method in ("welch", "periodogram", "yule_ar"):
        return in_range
    if config.feature_method == "goertzel":
        # distinct harmonic targets; stimulus harmonics can coincide
        return len({h * f for f in stimulus_frequencies for h in range(1, config.feature_harmonics + 1)})
    if config.feature_method == "stft":
        hop = max(1, int(round(config.feature_segment_len * (1.0 - config.feature_overlap))))
        n_frames = (n_used - config.feature_segment_len) // hop + 1
        one_sided = np.arange(nfft // 2 + 1) * sample_rate / nfft
        return n_frames * int(np.count_nonzero((one_sided >= lo) & (one_sided <= hi)))
    if config.feature_method == "dwt":
        block = 2**config.feature_levels
        return int(np.ceil(n_used / block)) * block
    raise ConfigError(f"unknown feature method {config.feature_method!r}", key="features.method")


def validate_config(config: PipelineConfig, dataset: Dataset) -> None:
    """Reject configurations that cannot run against this dataset."""
    if config.filter_family != "none" and config.filter_family not in FILTER_FAMILIES:
        raise ConfigError(f"unknown filter family {config.filter_family!r}", key="filter.family")
    if config.artifact_method not in ARTIFACT_METHODS:
        raise ConfigError(f"unknown artifact method {config.artifact_method!r}", key="artifact.method")
    if config.feature_method not in FEATURE_METHODS:
        raise ConfigError(f"unknown feature method {config.feature_method!r}", key="features.method")
    if config.select_method not in SELECT_METHODS:
        raise ConfigError(f"unknown selection method {config.select_method!r}", key="select.method")
    if config.clf_method not in CLASSIFIER_METHODS:
        raise ConfigError(f"unknown classifier {config.clf_method!r}", key="clf.method")
    if config.clf_method == "svm" and config.clf_kernel not in KERNEL_KINDS:
        raise ConfigError(f"unknown kernel {config.clf_kernel!r}", key="clf.kernel")
    if config.duration_s <= 0:
        raise ConfigError("duration must be positive", key="duration")

    if not dataset.trials:
        raise ConfigError("dataset has no trials")
    try:
        resolve_channel(config.channel, dataset.channel_count)
    except (ValueError, IndexError) as exc:
        raise ConfigError(str(exc), key="channel") from None

    n_samples = dataset.trials[0].n_samples
    n_used = int(round(config.duration_s * dataset.sample_rate))
    if n_used > n_samples:
        raise ConfigError(
            f"duration {config.duration_s}s needs {n_used} samples, trials have {n_samples}", key="duration"
        )

    if config.artifact_method != "none":
        lo, hi = config.artifact_keep
        if not 1 <= lo <= hi:
            raise ConfigError(f"bad component range {lo}..{hi}", key="artifact.keep")
        if hi > dataset.channel_count:
            raise ConfigError(
                f"component range {lo}..{hi} exceeds {dataset.channel_count} channels", key="artifact.keep"
            )

    if config.feature_method in ("welch", "stft"):
        if config.feature_segment_len > n_used:
            raise ConfigError(
                f"segment length {config.feature_segment_len} exceeds {n_used} usable samples",
                key="features.segment_len",
            )
        if config.feature_nfft < config.feature_segment_len:
            raise ConfigError(
                f"nfft {config.feature_nfft} below segment length {config.feature_segment_len}",
                key="features.nfft",
            )
    if config.feature_method == "periodogram" and config.feature_nfft < n_used:
        raise ConfigError(
            f"nfft {config.feature_nfft} would truncate {n_used}-sample trials", key="features.nfft"
        )
    if config.feature_method == "yule_ar" and config.feature_ar_order >= n_used:
        raise ConfigError("AR order must be below the trial length", key="features.ar_order")

    if config.select_method != "none":
        n_features = feature_length(
            config, n_samples, dataset.sample_rate, stimulus_frequencies=dataset.stimulus_frequencies
        )
        if config.select_d > n_features:
            raise ConfigError(
                f"select.d = {config.select_d} exceeds the {n_features}-long feature vector", key="select.d"
            )
        if config.select_d < 1:
            raise ConfigError("select.d must be >= 1", key="select.d")
