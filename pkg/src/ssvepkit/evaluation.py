"""Cross-validation protocols, pipeline execution, and report generation.

The harness fits every data-dependent stage (feature selection, classifier)
on training trials only, then times the full test-time path per trial:
filter, artifact removal, feature extraction, selection transform, and
prediction. Training time is never counted. Folds are independent; a failed
fold is reported with its failing stage instead of being silently dropped.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from . import bss, classifiers, spectral, svm
from .data import Dataset, Trial, resolve_channel
from .errors import ConfigError, StageError
from .infotheory import discretize, encode_labels
from .kernels import KernelSpec
from .pipeline import PipelineConfig, config_to_dict, validate_config
from .preprocess import FilterCoefficients, apply_filter, design_filter, zero_mean
from .selection import FEAST_CRITERIA, feast_select, pca_fit, svd_fit
from .util import hash_arrays

STAGES = ("filter", "artifact", "features", "select", "predict")


# ---------------------------------------------------------------- protocols


def loso_split(dataset: Dataset, held_out_subject: int) -> tuple[list[Trial], list[Trial]]:
    """All trials of one subject become the test set; the rest train."""
    if held_out_subject not in dataset.subject_ids:
        raise ValueError(f"unknown subject id {held_out_subject}")
    if len(dataset.subject_ids) < 2:
        raise ValueError("leave-one-subject-out needs at least 2 subjects")
    train = [t for t in dataset.trials if t.subject_id != held_out_subject]
    test = [t for t in dataset.trials if t.subject_id == held_out_subject]
    return train, test


def leave_one_sample_out_split(dataset: Dataset):
    """Yield (train, test) pairs, one per trial."""
    trials = dataset.trials
    for i in range(len(trials)):
        yield [t for j, t in enumerate(trials) if j != i], [trials[i]]


# ---------------------------------------------------------------- stages


def preprocess_trial(
    config: PipelineConfig, coeffs: FilterCoefficients | None, trial: Trial, channel_index: int
) -> tuple[np.ndarray, float, float]:
    """Zero-mean + band-pass + optional artifact removal for one trial.

    Returns the single-channel sequence and the wall-clock milliseconds spent
    in the filter and artifact stages.
    """
    n_used = int(round(config.duration_s * trial.sample_rate))
    samples = trial.samples[:, :n_used]

    t0 = time.perf_counter()
    if config.artifact_method != "none":
        filtered = np.empty_like(samples)
        for ch in range(samples.shape[0]):
            row = zero_mean(samples[ch])
            filtered[ch] = apply_filter(coeffs, row) if coeffs is not None else row
    else:
        row = zero_mean(samples[channel_index])
        filtered = apply_filter(coeffs, row) if coeffs is not None else row
    t1 = time.perf_counter()

    if config.artifact_method == "none":
        return filtered, (t1 - t0) * 1e3, 0.0

    lo, hi = config.artifact_keep
    keep = np.arange(lo - 1, hi)  # 1-based inclusive -> 0-based
    if config.artifact_method == "amuse":
        decomposition = bss.amuse_decompose(filtered)
    else:
        decomposition = bss.fastica_decompose(filtered, seed=0)
    x = bss.reconstruct(decomposition, keep, channel_index)
    t2 = time.perf_counter()
    return x, (t1 - t0) * 1e3, (t2 - t1) * 1e3


def extract_features(
    config: PipelineConfig, x: np.ndarray, sample_rate: float, stimulus_frequencies: tuple[float, ...]
) -> np.ndarray:
    method = config.feature_method
    if method == "welch":
        return spectral.welch(
            x,
            segment_len=config.feature_segment_len,
            overlap_fraction=config.feature_overlap,
            nfft=config.feature_nfft,
            window=config.feature_window,
            freq_range=config.feature_freq_range,
            sample_rate=sample_rate,
        ).feature_vector()
    if method == "periodogram":
        return spectral.periodogram(
            x, nfft=config.feature_nfft, freq_range=config.feature_freq_range, sample_rate=sample_rate
        ).feature_vector()
    if method == "goertzel":
        targets = sorted({h * f for f in stimulus_frequencies for h in range(1, config.feature_harmonics + 1)})
        return spectral.goertzel(x, np.asarray(targets), sample_rate=sample_rate).feature_vector()
    if method == "yule_ar":
        return spectral.yule_ar_psd(
            x,
            order=config.feature_ar_order,
            nfft=config.feature_nfft,
            freq_range=config.feature_freq_range,
            sample_rate=sample_rate,
        ).feature_vector()
    if method == "stft":
        hop = max(1, int(round(config.feature_segment_len * (1.0 - config.feature_overlap))))
        gram = spectral.stft(
            x,
            window=config.feature_window,
            window_len=config.feature_segment_len,
            hop=hop,
            nfft=config.feature_nfft,
            sample_rate=sample_rate,
        )
        lo, hi = config.feature_freq_range
        mask = (gram.freq_axis >= lo) & (gram.freq_axis <= hi)
        return gram.values[:, mask].ravel()
    if method == "dwt":
        return spectral.dwt(x, wavelet="haar", levels=config.feature_levels).feature_vector()
    raise ConfigError(f"unknown feature method {method!r}", key="features.method")


@dataclass
class SelectorState:
    """Fitted feature-selection stage."""

    method: str
    indices: np.ndarray | None = None
    projection: object = None

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.method == "none":
            return x
        if self.indices is not None:
            return np.atleast_2d(x)[:, self.indices]
        return self.projection.apply(np.atleast_2d(x))

    def fingerprint(self) -> str:
        if self.method == "none":
            return hash_arrays(np.array([0.0]))
        if self.indices is not None:
            return hash_arrays(self.indices)
        centering = self.projection.centering
        return hash_arrays(
            self.projection.basis, centering if centering is not None else np.array([]), self.projection.spectrum
        )


def fit_selector(config: PipelineConfig, x_train: np.ndarray, y_train: np.ndarray) -> SelectorState:
    method = config.select_method
    if method == "none":
        return SelectorState(method="none")
    if method in FEAST_CRITERIA:
        disc = discretize(x_train, n_bins=config.select_bins)
        result = feast_select(
            disc,
            encode_labels(y_train),
            criterion=method,
            d=config.select_d,
            beta=config.select_beta,
            gamma=config.select_gamma,
        )
        return SelectorState(method=method, indices=np.asarray(result.indices, dtype=np.int64))
    if method == "pca":
        return SelectorState(method=method, projection=pca_fit(x_train, d=config.select_d))
    if method == "svd":
        return SelectorState(method=method, projection=svd_fit(x_train, d=config.select_d))
    raise ConfigError(f"unknown selection method {method!r}", key="select.method")


def train_classifier(config: PipelineConfig, x: np.ndarray, y: np.ndarray):
    method = config.clf_method
    if method == "svm":
        spec = KernelSpec(kind=config.clf_kernel, gamma=config.clf_gamma, p=config.clf_p)
        return svm.ova_train(x, y, C=config.clf_c, spec=spec)
    if method == "lda":
        return classifiers.lda_train(x, y)
    if method == "knn":
        return classifiers.knn_train(x, y, k=config.clf_k)
    if method == "nb":
        return classifiers.naive_bayes_train(x, y)
    if method == "tree":
        return classifiers.tree_train(x, y, max_depth=config.clf_max_depth)
    if method == "adaboost":
        return classifiers.adaboost_train(
            x,
            y,
            n_rounds=config.clf_n_learners,
            max_depth=config.clf_max_depth if config.clf_max_depth is not None else 1,
            seed=config.clf_seed,
        )
    if method == "bagging":
        return classifiers.bagging_train(
            x, y, n_learners=config.clf_n_learners, max_depth=config.clf_max_depth, seed=config.clf_seed
        )
    raise ConfigError(f"unknown classifier {method!r}", key="clf.method")


@dataclass
class FittedPipeline:
    """Everything needed to classify an unseen trial."""

    config: PipelineConfig
    coeffs: FilterCoefficients | None
    channel_index: int
    selector: SelectorState
    classifier: object
    stimulus_frequencies: tuple[float, ...]
    sample_rate: float

    def fingerprint(self) -> str:
        return hash_arrays(
            np.frombuffer(self.selector.fingerprint().encode(), dtype=np.uint8),
            np.frombuffer(self.classifier.fingerprint().encode(), dtype=np.uint8),
        )

    def predict_trial(self, trial: Trial) -> tuple[float, dict[str, float]]:
        """Classify one trial, timing each test-path stage in milliseconds."""
        x, ms_filter, ms_artifact = preprocess_trial(self.config, self.coeffs, trial, self.channel_index)
        t0 = time.perf_counter()
        features = extract_features(self.config, x, self.sample_rate, self.stimulus_frequencies)
        t1 = time.perf_counter()
        selected = self.selector.transform(features[None, :])
        t2 = time.perf_counter()
        label = self.classifier.predict(selected)[0]
        t3 = time.perf_counter()
        times = {
            "filter": ms_filter,
            "artifact": ms_artifact,
            "features": (t1 - t0) * 1e3,
            "select": (t2 - t1) * 1e3,
            "predict": (t3 - t2) * 1e3,
        }
        return float(label), times


def fit_pipeline(
    config: PipelineConfig,
    train_trials: list[Trial],
    stimulus_frequencies: tuple[float, ...],
    sample_rate: float,
    channel_count: int,
) -> FittedPipeline:
    """Fit selector and classifier on training trials only."""
    spec = config.filter_spec()
    coeffs = design_filter(spec, sample_rate) if spec is not None else None
    channel_index = resolve_channel(config.channel, channel_count)

    rows = []
    labels = []
    for trial in train_trials:
        x, _, _ = preprocess_trial(config, coeffs, trial, channel_index)
        rows.append(extract_features(config, x, sample_rate, stimulus_frequencies))
        labels.append(trial.label)
    x_train = np.asarray(rows)
    y_train = np.asarray(labels)

    selector = fit_selector(config, x_train, y_train)
    classifier = train_classifier(config, selector.transform(x_train), y_train)
    return FittedPipeline(
        config=config,
        coeffs=coeffs,
        channel_index=channel_index,
        selector=selector,
        classifier=classifier,
        stimulus_frequencies=stimulus_frequencies,
        sample_rate=sample_rate,
    )


# ---------------------------------------------------------------- reports


@dataclass
class EvaluationReport:
    protocol: str
    config: dict[str, str]
    subject_accuracy: dict[str, float] = field(default_factory=dict)  # percent, by subject label
    mean_accuracy: float = 0.0
    latency_ms_mean: float = 0.0
    latency_ms_median: float = 0.0
    stage_latency_ms: dict[str, float] = field(default_factory=dict)
    fold_fingerprints: dict[str, str] = field(default_factory=dict)
    failed_folds: dict[str, str] = field(default_factory=dict)
    n_trials: int = 0

    def __post_init__(self):
        for label, acc in self.subject_accuracy.items():
            if not 0.0 <= acc <= 100.0:
                raise ValueError(f"accuracy for {label} out of range: {acc}")
        if self.latency_ms_mean < 0 or self.latency_ms_median < 0:
            raise ValueError("latency cannot be negative")


def subject_label(subject_id: int) -> str:
    return f"S{subject_id:03d}"


def _fold_definitions(config: PipelineConfig, dataset: Dataset, protocol: str):
    """(fold_key, train, test) triples after exclusions."""
    excluded = set(config.exclude)
    kept = [t for t in dataset.trials if (t.subject_id, t.session_id) not in excluded]
    pruned = Dataset(
        trials=tuple(kept),
        stimulus_frequencies=dataset.stimulus_frequencies,
        channel_count=dataset.channel_count,
        sample_rate=dataset.sample_rate,
    )
    if protocol == "loso":
        if len(pruned.subject_ids) < 2:
            raise ValueError("leave-one-subject-out needs at least 2 subjects")
        for subject in pruned.subject_ids:
            train, test = loso_split(pruned, subject)
            yield subject_label(subject), train, test
    elif protocol == "loo_sample":
        for i, (train, test) in enumerate(leave_one_sample_out_split(pruned)):
            yield f"trial{i:05d}", train, test
    else:
        raise ValueError(f"unknown protocol {protocol!r}")


def _run_fold(args):
    config, fold_key, train, test, stimulus_frequencies, sample_rate, channel_count = args
    try:
        fitted = fit_pipeline(config, train, stimulus_frequencies, sample_rate, channel_count)
    except Exception as exc:  # noqa: BLE001 - fold failures must name the stage
        raise StageError("fit", fold_key, exc) from exc
    results = []
    for trial in test:
        try:
            label, times = fitted.predict_trial(trial)
        except Exception as exc:  # noqa: BLE001
            raise StageError("predict", fold_key, exc) from exc
        results.append((trial.subject_id, trial.label, label, times))
    return fold_key, fitted.fingerprint(), results


def run_experiment(
    config: PipelineConfig, dataset: Dataset, protocol: str = "loso", jobs: int = 1
) -> EvaluationReport:
    """Run the full pipeline under the chosen protocol and assemble a report."""
    validate_config(config, dataset)
    folds = list(_fold_definitions(config, dataset, protocol))
    jobs = max(1, jobs)

    args = [
        (config, key, train, test, dataset.stimulus_frequencies, dataset.sample_rate, dataset.channel_count)
        for key, train, test in folds
    ]
    outcomes = []
    failed: dict[str, str] = {}
    if jobs == 1:
        for a in args:
            try:
                outcomes.append(_run_fold(a))
            except StageError as exc:
                failed[exc.fold] = str(exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs, mp_context=get_context("fork")) as pool:
            futures = {pool.submit(_run_fold, a): a[1] for a in args}
            for future, key in futures.items():
                try:
                    outcomes.append(future.result())
                except StageError as exc:
                    failed[exc.fold] = str(exc)
                except Exception as exc:  # noqa: BLE001
                    failed[key] = str(exc)

    per_subject_hits: dict[int, list[bool]] = {}
    latencies: list[float] = []
    stage_totals = {stage: [] for stage in STAGES}
    fingerprints: dict[str, str] = {}
    n_trials = 0
    for fold_key, fingerprint, results in sorted(outcomes, key=lambda o: o[0]):
        fingerprints[fold_key] = fingerprint
        for subject_id, truth, predicted, times in results:
            per_subject_hits.setdefault(subject_id, []).append(predicted == truth)
            latencies.append(sum(times.values()))
            for stage in STAGES:
                stage_totals[stage].append(times[stage])
            n_trials += 1

    subject_accuracy = {
        subject_label(s): 100.0 * float(np.mean(hits)) for s, hits in sorted(per_subject_hits.items())
    }
    mean_accuracy = float(np.mean(list(subject_accuracy.values()))) if subject_accuracy else 0.0
    return EvaluationReport(
        protocol=protocol,
        config=config_to_dict(config),
        subject_accuracy=subject_accuracy,
        mean_accuracy=mean_accuracy,
        latency_ms_mean=float(np.mean(latencies)) if latencies else 0.0,
        latency_ms_median=float(np.median(latencies)) if latencies else 0.0,
        stage_latency_ms={s: float(np.mean(v)) if v else 0.0 for s, v in stage_totals.items()},
        fold_fingerprints=fingerprints,
        failed_folds=failed,
        n_trials=n_trials,
    )


# ---------------------------------------------------------------- grid search


@dataclass(frozen=True)
class GridRow:
    nfft: int
    segment_len: int
    overlap: float
    mean_accuracy: float
    latency_ms_median: float


@dataclass
class GridResult:
    rows: list[GridRow]
    skipped: list[tuple[tuple[int, int, float], str]]


DEFAULT_NFFT_GRID = (128, 256, 512, 1024, 2048)
DEFAULT_SEGMENT_GRID = (125, 200, 250, 300, 350, 400, 450, 500)
DEFAULT_OVERLAP_GRID = (0.25, 0.5, 0.75, 0.9)


def grid_search_welch(
    dataset: Dataset,
    base_config: PipelineConfig,
    nfft_grid=DEFAULT_NFFT_GRID,
    segment_grid=DEFAULT_SEGMENT_GRID,
    overlap_grid=DEFAULT_OVERLAP_GRID,
    protocol: str = "loso",
    jobs: int = 1,
) -> GridResult:
    """Evaluate every feasible (nfft, segment, overlap) combination.

    Infeasible combinations (segment longer than the trial, nfft below the
    segment length) are recorded with a reason and skipped. Rows come back
    sorted by decreasing accuracy.
    """
    rows: list[GridRow] = []
    skipped: list[tuple[tuple[int, int, float], str]] = []
    n_used = int(round(base_config.duration_s * dataset.sample_rate))
    if dataset.trials:
        n_used = min(n_used, dataset.trials[0].n_samples)
    for nfft in nfft_grid:
        for segment_len in segment_grid:
            for overlap in overlap_grid:
                combo = (int(nfft), int(segment_len), float(overlap))
                if segment_len > n_used:
                    skipped.append((combo, f"segment length {segment_len} exceeds {n_used} usable samples"))
                    continue
                if nfft < segment_len:
                    skipped.append((combo, f"nfft {nfft} below segment length {segment_len}"))
                    continue
                config = replace(
                    base_config,
                    feature_method="welch",
                    feature_nfft=int(nfft),
                    feature_segment_len=int(segment_len),
                    feature_overlap=float(overlap),
                )
                try:
                    report = run_experiment(config, dataset, protocol=protocol, jobs=jobs)
                except (ConfigError, ValueError) as exc:
                    skipped.append((combo, str(exc)))
                    continue
                rows.append(
                    GridRow(
                        nfft=int(nfft),
                        segment_len=int(segment_len),
                        overlap=float(overlap),
                        mean_accuracy=report.mean_accuracy,
                        latency_ms_median=report.latency_ms_median,
                    )
                )
    rows.sort(key=lambda r: -r.mean_accuracy)
    return GridResult(rows=rows, skipped=skipped)


# ---------------------------------------------------------------- rendering


def render_report(report: EvaluationReport) -> tuple[str, dict]:
    """Aligned text table plus a JSON-serializable record."""
    lines = [f"{'Subject ID':<12}{'Accuracy':>10}"]
    for label, acc in report.subject_accuracy.items():
        lines.append(f"{label:<12}{acc:>10.2f}")
    lines.append(f"{'Mean Acc.':<12}{report.mean_accuracy:>10.2f}")
    lines.append(f"{'Time (msec)':<12}{report.latency_ms_median:>10.2f}")
    if report.failed_folds:
        lines.append("")
        for fold, reason in report.failed_folds.items():
            lines.append(f"FAILED {fold}: {reason}")
    return "\n".join(lines), report_to_record(report)


def report_to_record(report: EvaluationReport) -> dict:
    return {
        "protocol": report.protocol,
        "config": dict(report.config),
        "subject_accuracy": dict(report.subject_accuracy),
        "mean_accuracy": report.mean_accuracy,
        "latency_ms_mean": report.latency_ms_mean,
        "latency_ms_median": report.latency_ms_median,
        "stage_latency_ms": dict(report.stage_latency_ms),
        "fold_fingerprints": dict(report.fold_fingerprints),
        "failed_folds": dict(report.failed_folds),
        "n_trials": report.n_trials,
    }


def report_from_record(record: dict) -> EvaluationReport:
    return EvaluationReport(**record)


def render_grid_table(result: GridResult) -> str:
    lines = [f"{'Nfft':>6}{'Segment':>9}{'Overlap':>9}{'Mean Acc.':>11}{'Time (msec)':>13}"]
    for row in result.rows:
        lines.append(
            f"{row.nfft:>6}{row.segment_len:>9}{row.overlap:>9.2f}{row.mean_accuracy:>11.2f}{row.latency_ms_median:>13.2f}"
        )
    for combo, reason in result.skipped:
        lines.append(f"SKIPPED nfft={combo[0]} segment={combo[1]} overlap={combo[2]:g}: {reason}")
    return "\n".join(lines)


def write_structured_log(report: EvaluationReport, path) -> None:
    """Line-delimited records: one per subject plus a summary line."""
    with open(path, "w") as fh:
        for label, acc in report.subject_accuracy.items():
            fh.write(json.dumps({"kind": "subject", "subject": label, "accuracy": acc}) + "\n")
        for fold, reason in report.failed_folds.items():
            fh.write(json.dumps({"kind": "failed_fold", "fold": fold, "reason": reason}) + "\n")
        fh.write(json.dumps({"kind": "summary", **report_to_record(report)}) + "\n")
