"""Dataset serialization.

Binary layout (all little-endian):

    magic "SSVB" | version u16 | sample_rate u32 | channel_count u16 |
    n_freqs u16 | n_freqs * f64 stimulus frequencies |
    per trial: subject_id u16 | session_id u16 | label_index u16 |
               n_samples u32 | channel-major f32 samples

The CSV alternative stores one trial per file: a header row
``subject,session,label_hz,rate``, one row of values, then one sample row
per time point with one column per channel.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .data import Dataset, Trial
from .errors import FormatError

MAGIC = b"SSVB"
VERSION = 1
_HEADER = struct.Struct("<4sHIHH")
_TRIAL_HEADER = struct.Struct("<HHHI")


def save_dataset(dataset: Dataset, path: str | Path, format: str = "binary") -> None:
    if format == "binary":
        _save_binary(dataset, Path(path))
    elif format == "csv":
        _save_csv(dataset, Path(path))
    else:
        raise ValueError(f"unknown format {format!r}")


def load_dataset(path: str | Path, format: str = "binary") -> Dataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown format {format!r}")


def _save_binary(dataset: Dataset, path: Path) -> None:
    freqs = dataset.stimulus_frequencies
    index = {f: i for i, f in enumerate(freqs)}
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(MAGIC, VERSION, int(round(dataset.sample_rate)), dataset.channel_count, len(freqs))
        )
        fh.write(np.asarray(freqs, dtype="<f8").tobytes())
        for t in dataset.trials:
            fh.write(_TRIAL_HEADER.pack(t.subject_id, t.session_id, index[t.label], t.n_samples))
            fh.write(np.ascontiguousarray(t.samples, dtype="<f4").tobytes())


def _load_binary(path: Path) -> Dataset:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than header")
    magic, version, rate, n_channels, n_freqs = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    if len(raw) < offset + 8 * n_freqs:
        raise FormatError(f"{path}: truncated frequency table")
    freqs = tuple(np.frombuffer(raw, dtype="<f8", count=n_freqs, offset=offset).tolist())
    offset += 8 * n_freqs

    trials: list[Trial] = []
    expected_samples: int | None = None
    while offset < len(raw):
        if len(raw) < offset + _TRIAL_HEADER.size:
            raise FormatError(f"{path}: truncated header for trial {len(trials)}")
        subject, session, label_idx, n_samples = _TRIAL_HEADER.unpack_from(raw, offset)
        offset += _TRIAL_HEADER.size
        if label_idx >= n_freqs:
            raise FormatError(f"{path}: trial {len(trials)} has unknown label index {label_idx}")
        if expected_samples is None:
            expected_samples = n_samples
        elif n_samples != expected_samples:
            raise FormatError(
                f"{path}: trial {len(trials)} has {n_samples} samples, expected {expected_samples}"
            )
        count = n_channels * n_samples
        if len(raw) < offset + 4 * count:
            raise FormatError(f"{path}: truncated samples for trial {len(trials)}")
        samples = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        offset += 4 * count
        trials.append(
            Trial(
                samples=samples.reshape(n_channels, n_samples).astype(np.float64),
                label=freqs[label_idx],
                subject_id=subject,
                session_id=session,
                sample_rate=float(rate),
            )
        )
    return Dataset(
        trials=tuple(trials),
        stimulus_frequencies=freqs,
        channel_count=n_channels,
        sample_rate=float(rate),
    )


def _trial_filename(i: int) -> str:
    return f"trial_{i:05d}.csv"


def _save_csv(dataset: Dataset, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for i, t in enumerate(dataset.trials):
        with open(directory / _trial_filename(i), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject", "session", "label_hz", "rate"])
            writer.writerow([t.subject_id, t.session_id, repr(float(t.label)), repr(float(t.sample_rate))])
            for row in t.samples.T:
                writer.writerow([repr(float(v)) for v in row])


def _load_csv(directory: Path) -> Dataset:
    if not directory.is_dir():
        raise FormatError(f"{directory}: csv datasets are directories of per-trial files")
    trials: list[Trial] = []
    expected_samples: int | None = None
    for name in sorted(p.name for p in directory.glob("*.csv")):
        with open(directory / name, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["subject", "session", "label_hz", "rate"]:
                raise FormatError(f"{name}: bad header row {header}")
            values = next(reader, None)
            if values is None or len(values) != 4:
                raise FormatError(f"{name}: missing metadata row")
            try:
                subject, session = int(values[0]), int(values[1])
                label, rate = float(values[2]), float(values[3])
            except ValueError as exc:
                raise FormatError(f"{name}: bad metadata row: {exc}") from None
            rows = [[float(v) for v in row] for row in reader if row]
        if not rows:
            raise FormatError(f"{name}: no sample rows")
        samples = np.asarray(rows, dtype=np.float64).T
        if expected_samples is None:
            expected_samples = samples.shape[1]
        elif samples.shape[1] != expected_samples:
            raise FormatError(f"{name}: {samples.shape[1]} samples, expected {expected_samples}")
        trials.append(Trial(samples=samples, label=label, subject_id=subject, session_id=session, sample_rate=rate))

    if not trials:
        return Dataset(trials=(), stimulus_frequencies=(), channel_count=0, sample_rate=0.0)
    rate = trials[0].sample_rate
    n_channels = trials[0].n_channels
    freqs = tuple(sorted({t.label for t in trials}))
    return Dataset(trials=tuple(trials), stimulus_frequencies=freqs, channel_count=n_channels, sample_rate=rate)
