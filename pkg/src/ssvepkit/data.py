"""Trial/dataset model and synthetic SSVEP generation.

A trial is one stimulus presentation: an (n_channels, n_samples) matrix of
microvolt samples tagged with the flicker frequency that produced it. The
synthesizer builds datasets with a known ground truth so every later stage
can be exercised without recorded EEG: a harmonic stack at the stimulus
frequency, pink background noise scaled to a target SNR, and optional
blink-like transients shared across channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_STIMULUS_HZ = (6.66, 7.50, 8.57, 10.00, 12.00)
DEFAULT_SAMPLE_RATE = 250.0
DEFAULT_DURATION_S = 5.0

# Electrode names resolvable to a channel index. On the 256-channel net the
# occipital electrodes sit at these 0-based positions; synthetic montages
# put the strongest SSVEP response on channel 0, so names map there instead.
_NAMED_CHANNELS_256 = {"oz": 125, "o1": 115, "o2": 149}


@dataclass(frozen=True)
class Trial:
    """One stimulus presentation; immutable after construction."""

    samples: np.ndarray  # (n_channels, n_samples) float64, microvolts
    label: float  # stimulus frequency, Hz
    subject_id: int
    session_id: int
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise ValueError("trial samples must be a 2-D (channels, samples) array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("trial samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of trials sharing rate, channel count and label set."""

    trials: tuple[Trial, ...]
    stimulus_frequencies: tuple[float, ...]
    channel_count: int
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        object.__setattr__(
            self, "stimulus_frequencies", tuple(float(f) for f in self.stimulus_frequencies)
        )
        freq_set = set(self.stimulus_frequencies)
        for i, t in enumerate(self.trials):
            if t.sample_rate != self.sample_rate:
                raise ValueError(f"trial {i}: sample rate {t.sample_rate} != dataset {self.sample_rate}")
            if t.n_channels != self.channel_count:
                raise ValueError(f"trial {i}: {t.n_channels} channels != dataset {self.channel_count}")
            if t.label not in freq_set:
                raise ValueError(f"trial {i}: label {t.label} Hz not in stimulus set {sorted(freq_set)}")

    def __len__(self) -> int:
        return len(self.trials)

    @property
    def subject_ids(self) -> tuple[int, ...]:
        return tuple(sorted({t.subject_id for t in self.trials}))

    def trials_of(self, subject_id: int) -> tuple[Trial, ...]:
        return tuple(t for t in self.trials if t.subject_id == subject_id)


@dataclass(frozen=True)
class DatasetParams:
    """Shape of the dataset a synthesizer should produce."""

    stimulus_frequencies: tuple[float, ...] = DEFAULT_STIMULUS_HZ
    sample_rate: float = DEFAULT_SAMPLE_RATE
    duration_s: float = DEFAULT_DURATION_S
    n_channels: int = 8


@dataclass(frozen=True)
class SynthSpec:
    """Controls for the synthetic generator.

    snr_db may be a single value applied to every subject or one value per
    subject. Generation is fully determined by (spec, params): the same seed
    always yields a bit-identical dataset.
    """

    n_subjects: int = 1
    n_trials_per_freq: int = 2
    snr_db: float | tuple[float, ...] = 20.0
    n_harmonics: int = 3
    blink_rate: float = 0.0  # transients per second
    seed: int = 0

    def __post_init__(self):
        if self.n_harmonics < 1:
            raise ValueError("n_harmonics must be >= 1")
        if self.n_subjects < 1 or self.n_trials_per_freq < 1:
            raise ValueError("n_subjects and n_trials_per_freq must be >= 1")
        snr = self.snr_db
        if isinstance(snr, (int, float)):
            if not np.isfinite(snr):
                raise ValueError("snr_db must be finite")
        else:
            snr = tuple(float(s) for s in snr)
            if len(snr) != self.n_subjects:
                raise ValueError("snr_db sequence must have one entry per subject")
            if not all(np.isfinite(s) for s in snr):
                raise ValueError("snr_db must be finite")
            object.__setattr__(self, "snr_db", snr)

    def subject_snr(self, subject_index: int) -> float:
        if isinstance(self.snr_db, tuple):
            return self.snr_db[subject_index]
        return float(self.snr_db)


def select_channel(trial: Trial, channel: int) -> np.ndarray:
    """Return a copy of one channel's sample sequence."""
    if not 0 <= channel < trial.n_channels:
        raise IndexError(f"channel {channel} out of range [0, {trial.n_channels})")
    return np.array(trial.samples[channel], dtype=np.float64)


def resolve_channel(channel: int | str, channel_count: int) -> int:
    """Map a channel index or electrode name to a 0-based index.

    Plain integers (or digit strings) are 0-based indices. Electrode names
    ("oz", "o1", "o2") and "ch<N>" (1-based electrode number) follow the
    256-channel montage; on smaller (synthetic) montages every name resolves
    to channel 0, where the generator places the strongest response.
    """
    if isinstance(channel, str):
        key = channel.strip().lower()
        if key.isdigit():
            idx = int(key)
        elif key.startswith("ch") and key[2:].isdigit():
            idx = int(key[2:]) - 1 if channel_count == 256 else 0
        elif key in _NAMED_CHANNELS_256:
            idx = _NAMED_CHANNELS_256[key] if channel_count == 256 else 0
        else:
            raise ValueError(f"unknown channel name {channel!r}")
    else:
        idx = int(channel)
    if not 0 <= idx < channel_count:
        raise IndexError(f"channel {idx} out of range [0, {channel_count})")
    return idx


def _pink_noise(rng: np.random.Generator, n_channels: int, n_samples: int) -> np.ndarray:
    """1/f-power noise, unit variance per channel."""
    white = rng.standard_normal((n_channels, n_samples))
    spec = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(n_samples, d=1.0)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])  # amplitude 1/sqrt(f) -> power 1/f
    pink = np.fft.irfft(spec * scale, n=n_samples, axis=1)
    std = pink.std(axis=1, keepdims=True)
    std[std == 0] = 1.0
    return pink / std


def _blink_waveform(t: np.ndarray, center: float, width_s: float = 0.15) -> np.ndarray:
    """Gaussian bump, ~2-3 Hz energy for the default width."""
    return np.exp(-0.5 * ((t - center) / width_s) ** 2)


def _rhythm(rng: np.random.Generator, t: np.ndarray, center_hz: float) -> np.ndarray:
    """One burst-modulated narrowband oscillation, unit power."""
    envelope = 1.0 + 0.8 * np.sin(2.0 * np.pi * rng.uniform(0.2, 0.6) * t + rng.uniform(0, 2 * np.pi))
    wave = envelope * np.sin(2.0 * np.pi * center_hz * t + rng.uniform(0, 2 * np.pi))
    return wave / np.sqrt(np.mean(wave**2))


def _background(
    rng: np.random.Generator, t: np.ndarray, n_channels: int, rhythm_centers_hz: np.ndarray
) -> np.ndarray:
    """EEG-like background: 1/f noise plus ongoing narrowband rhythms.

    The rhythms (alpha and friends) fall inside the analysis band, so they
    compete with the stimulus response bin-for-bin; they are what makes low
    SNR genuinely hard rather than a matter of broadband floor.
    """
    n_samples = t.size
    background = _pink_noise(rng, n_channels, n_samples)
    gain = np.exp(-np.arange(n_channels) / 6.0)
    share = np.sqrt(1.0 / max(len(rhythm_centers_hz), 1))
    for center in rhythm_centers_hz:
        wander = center + rng.uniform(-0.5, 0.5)
        background += share * gain[:, None] * _rhythm(rng, t, wander)[None, :]
    return background


def synthesize(spec: SynthSpec, params: DatasetParams = DatasetParams()) -> Dataset:
    """Generate a deterministic synthetic SSVEP dataset.

    Each trial is a sum of n_harmonics sinusoids at multiples of its stimulus
    frequency (amplitude decaying as 1/h, random phase), plus pink noise
    scaled so the ratio of response power to noise power on channel 0 equals
    the subject's snr_db, plus blink transients when blink_rate > 0. The
    response amplitude falls off across channels, mimicking distance from the
    occipital site.
    """
    rng = np.random.default_rng(spec.seed)
    n_samples = int(round(params.duration_s * params.sample_rate))
    t = np.arange(n_samples) / params.sample_rate
    channel_gain = np.exp(-np.arange(params.n_channels) / 4.0)
    alpha_gain = np.exp(-np.arange(params.n_channels) / 6.0)

    signal_uv = 5.0  # RMS microvolts of the fundamental on channel 0
    trials = []
    for subj in range(spec.n_subjects):
        snr_linear = 10.0 ** (spec.subject_snr(subj) / 10.0)
        # stable per-subject traits: a resting alpha plus other rhythms
        rhythm_centers = np.concatenate([rng.uniform(9.0, 12.0, 1), rng.uniform(6.0, 30.0, 4)])
        for freq in params.stimulus_frequencies:
            for rep in range(spec.n_trials_per_freq):
                response = np.zeros(n_samples)
                for h in range(1, spec.n_harmonics + 1):
                    phase = rng.uniform(0.0, 2.0 * np.pi)
                    response += (signal_uv / h) * np.sin(2.0 * np.pi * h * freq * t + phase)
                signal_power = np.mean(response**2)

                # snr_db is the ratio of response power to total background
                # power on channel 0
                background = _background(rng, t, params.n_channels, rhythm_centers)
                bg_power = np.mean(background[0] ** 2)
                background *= np.sqrt(signal_power / (snr_linear * bg_power))

                samples = channel_gain[:, None] * response[None, :] + background
                if spec.blink_rate > 0:
                    n_blinks = rng.poisson(spec.blink_rate * params.duration_s)
                    blink_gain = 0.5 + 0.5 * rng.random(params.n_channels)
                    for _ in range(n_blinks):
                        center = rng.uniform(0.2, params.duration_s - 0.2)
                        bump = 60.0 * _blink_waveform(t, center)
                        samples += blink_gain[:, None] * bump[None, :]

                trials.append(
                    Trial(
                        samples=samples,
                        label=float(freq),
                        subject_id=subj + 1,
                        session_id=rep + 1,
                        sample_rate=params.sample_rate,
                    )
                )
    return Dataset(
        trials=tuple(trials),
        stimulus_frequencies=params.stimulus_frequencies,
        channel_count=params.n_channels,
        sample_rate=params.sample_rate,
    )
