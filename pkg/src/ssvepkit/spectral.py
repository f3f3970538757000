"""Spectral and wavelet feature extractors for single-channel trials.

Every extractor is deterministic and maps a sample sequence to a fixed-length
feature vector whose length depends only on the extractor parameters (and the
input length), never on the sample values, so cross-validation folds always
produce compatible feature matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Spectrum:
    """Power estimates on a frequency grid."""

    values: np.ndarray
    freq_axis: np.ndarray  # Hz, strictly increasing
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        freqs = np.asarray(self.freq_axis, dtype=np.float64)
        if values.shape != freqs.shape:
            raise ValueError("values and freq_axis must have matching length")
        if np.any(values < 0):
            raise ValueError("spectrum values must be non-negative")
        if freqs.size > 1 and np.any(np.diff(freqs) <= 0):
            raise ValueError("freq_axis must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freq_axis", freqs)

    def feature_vector(self) -> np.ndarray:
        return self.values

    def peak_frequency(self) -> float:
        return float(self.freq_axis[int(np.argmax(self.values))])


@dataclass(frozen=True)
class Spectrogram:
    """Time-varying power: one row per analysis frame."""

    values: np.ndarray  # (n_frames, n_bins), >= 0
    time_axis: np.ndarray  # seconds, frame centers
    freq_axis: np.ndarray  # Hz

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("spectrogram values must be 2-D")
        if values.shape != (len(self.time_axis), len(self.freq_axis)):
            raise ValueError("axes do not match value matrix shape")
        if np.any(values < 0):
            raise ValueError("spectrogram values must be non-negative")
        object.__setattr__(self, "values", values)

    def feature_vector(self) -> np.ndarray:
        # time-major: frame 0 bins, then frame 1 bins, ...
        return self.values.ravel()


@dataclass(frozen=True)
class WaveletCoefficients:
    """Multi-level filter-bank decomposition output."""

    approximation: np.ndarray  # coarsest level
    details: tuple[np.ndarray, ...]  # details[i] is level i+1 (finest first ordering below)
    wavelet: str
    levels: int
    n_original: int
    n_padded: int

    def feature_vector(self) -> np.ndarray:
        # coarse-to-fine: approximation, detail L, ..., detail 1
        return np.concatenate([self.approximation] + [self.details[lvl] for lvl in range(self.levels - 1, -1, -1)])


def _restrict(values: np.ndarray, freqs: np.ndarray, freq_range: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = freq_range
    mask = (freqs >= lo) & (freqs <= hi)
    return values[mask], freqs[mask]


def periodogram(
    x: np.ndarray,
    nfft: int = 512,
    freq_range: tuple[float, float] = (0.0, 125.0),
    sample_rate: float = 250.0,
) -> Spectrum:
    """Squared DFT magnitude over N, on the nfft grid restricted to freq_range.

    nfft must be at least len(x); shorter transforms would silently truncate
    the signal and are rejected.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty input")
    if nfft < x.size:
        raise ValueError(f"nfft={nfft} would truncate a {x.size}-sample signal")
    power = np.abs(np.fft.fft(x, n=nfft)) ** 2 / x.size
    freqs = np.arange(nfft) * sample_rate / nfft
    values, freqs = _restrict(power, freqs, freq_range)
    return Spectrum(values, freqs, "periodogram", {"nfft": nfft, "freq_range": freq_range})


def _window_array(window: str | np.ndarray, length: int) -> np.ndarray:
    if isinstance(window, str):
        name = window.lower()
        if name in ("rect", "rectangular", "boxcar"):
            w = np.ones(length)
        elif name == "hamming":
            w = np.hamming(length)
        elif name in ("hann", "hanning"):
            w = np.hanning(length)
        else:
            raise ValueError(f"unknown window {window!r}")
    else:
        w = np.asarray(window, dtype=np.float64)
        if w.size != length:
            raise ValueError(f"window length {w.size} != segment length {length}")
    if not np.any(w != 0):
        raise ValueError("window is identically zero")
    return w


def welch(
    x: np.ndarray,
    segment_len: int,
    overlap_fraction: float = 0.5,
    nfft: int = 512,
    window: str | np.ndarray = "hamming",
    freq_range: tuple[float, float] = (0.0, 125.0),
    sample_rate: float = 250.0,
) -> Spectrum:
    """Averaged modified periodograms over overlapping segments.

    Each segment is windowed and normalized by the window power, so a single
    rectangular segment spanning the whole signal reduces exactly to the
    plain periodogram.
    """
    x = np.asarray(x, dtype=np.float64)
    if segment_len > x.size:
        raise ValueError(f"segment_len={segment_len} exceeds signal length {x.size}")
    if segment_len < 1:
        raise ValueError("segment_len must be >= 1")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must be in [0, 1)")
    if nfft < segment_len:
        raise ValueError(f"nfft={nfft} would truncate {segment_len}-sample segments")
    w = _window_array(window, segment_len)
    hop = max(1, int(round(segment_len * (1.0 - overlap_fraction))))

    window_power = np.sum(w**2)  # segment_len * U in the usual notation
    acc = None
    n_segments = 0
    for start in range(0, x.size - segment_len + 1, hop):
        seg = x[start : start + segment_len] * w
        p = np.abs(np.fft.fft(seg, n=nfft)) ** 2 / window_power
        acc = p if acc is None else acc + p
        n_segments += 1
    values = acc / n_segments
    freqs = np.arange(nfft) * sample_rate / nfft
    values, freqs = _restrict(values, freqs, freq_range)
    return Spectrum(
        values,
        freqs,
        "welch",
        {
            "nfft": nfft,
            "segment_len": segment_len,
            "overlap": overlap_fraction,
            "n_segments": n_segments,
            "freq_range": freq_range,
        },
    )


def goertzel(x: np.ndarray, target_freqs: np.ndarray, sample_rate: float = 250.0) -> Spectrum:
    """Squared DFT magnitudes at selected frequencies via the second-order recurrence.

    Matches the full DFT exactly at on-grid frequencies k*fs/N and evaluates
    the discrete-time Fourier transform at off-grid targets.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty input")
    targets = np.sort(np.asarray(target_freqs, dtype=np.float64))
    if targets.size == 0:
        raise ValueError("no target frequencies")
    if np.unique(targets).size != targets.size:
        raise ValueError("duplicate target frequencies")
    if np.any(targets < 0) or np.any(targets > sample_rate / 2):
        raise ValueError("targets must lie in [0, sample_rate/2]")

    omega = 2.0 * np.pi * targets / sample_rate
    coeff = 2.0 * np.cos(omega)
    s1 = np.zeros_like(coeff)
    s2 = np.zeros_like(coeff)
    for sample in x:
        s0 = sample + coeff * s1 - s2
        s2 = s1
        s1 = s0
    power = s1**2 + s2**2 - coeff * s1 * s2
    power = np.maximum(power, 0.0)  # clip tiny negative rounding
    return Spectrum(power, targets, "goertzel", {"targets": tuple(targets.tolist())})


def autocorrelation_biased(x: np.ndarray, max_lag: int) -> np.ndarray:
    """r[k] = (1/N) sum x[n] x[n+k] for k = 0..max_lag."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    return np.array([np.dot(x[: n - k], x[k:]) / n for k in range(max_lag + 1)])


def levinson_durbin(r: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve the Yule-Walker equations for AR coefficients.

    Returns (a, sigma2) with the convention x[n] + sum_k a[k] x[n-k] = e[n],
    i.e. denominator polynomial 1 + a[1] z^-1 + ... + a[p] z^-p.
    """
    r = np.asarray(r, dtype=np.float64)
    p = r.size - 1
    if p < 1:
        raise ValueError("need at least lag-1 autocorrelation")
    if r[0] <= 0:
        raise ValueError("zero-power signal: autocorrelation at lag 0 is not positive")
    a = np.zeros(p)
    err = r[0]
    for i in range(1, p + 1):
        acc = r[i] + np.dot(a[: i - 1], r[i - 1 : 0 : -1])
        if err <= 0:
            raise ValueError("autocorrelation sequence is not positive definite")
        k = -acc / err
        a_prev = a[: i - 1].copy()
        a[: i - 1] = a_prev + k * a_prev[::-1]
        a[i - 1] = k
        err *= 1.0 - k * k
    if err <= 0:
        raise ValueError("zero prediction error: input has no stochastic component")
    return a, float(err)


def yule_ar_psd(
    x: np.ndarray,
    order: int = 20,
    nfft: int = 512,
    freq_range: tuple[float, float] = (0.0, 125.0),
    sample_rate: float = 250.0,
) -> Spectrum:
    """Autoregressive power spectrum from the biased autocorrelation estimate."""
    x = np.asarray(x, dtype=np.float64)
    if order < 1:
        raise ValueError("order must be >= 1")
    if order >= x.size:
        raise ValueError(f"order {order} must be below signal length {x.size}")
    if np.ptp(x) == 0:
        raise ValueError("constant input has zero variance")
    r = autocorrelation_biased(x, order)
    a, sigma2 = levinson_durbin(r)
    denom = np.abs(np.fft.fft(np.concatenate([[1.0], a]), n=nfft)) ** 2
    values = sigma2 / denom
    freqs = np.arange(nfft) * sample_rate / nfft
    values, freqs = _restrict(values, freqs, freq_range)
    return Spectrum(values, freqs, "yule_ar", {"order": order, "nfft": nfft, "freq_range": freq_range})


def stft(
    x: np.ndarray,
    window: str | np.ndarray = "hamming",
    window_len: int | None = None,
    hop: int = 1,
    nfft: int = 512,
    sample_rate: float = 250.0,
) -> Spectrogram:
    """Short-time squared-magnitude spectra on a one-sided frequency grid."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(window, str):
        if window_len is None:
            raise ValueError("window_len required when window is a name")
        w = _window_array(window, window_len)
    else:
        w = np.asarray(window, dtype=np.float64)
    if w.size > x.size:
        raise ValueError(f"window length {w.size} exceeds signal length {x.size}")
    if hop < 1:
        raise ValueError("hop must be >= 1")
    if hop > w.size:
        warnings.warn(f"hop {hop} exceeds window length {w.size}: frames leave gaps", stacklevel=2)
    if nfft < w.size:
        raise ValueError(f"nfft={nfft} would truncate {w.size}-sample frames")

    starts = range(0, x.size - w.size + 1, hop)
    n_bins = nfft // 2 + 1
    values = np.empty((len(starts), n_bins))
    times = np.empty(len(starts))
    for m, start in enumerate(starts):
        frame = x[start : start + w.size] * w
        values[m] = np.abs(np.fft.rfft(frame, n=nfft)) ** 2
        times[m] = (start + w.size / 2.0) / sample_rate
    freqs = np.arange(n_bins) * sample_rate / nfft
    return Spectrogram(values, times, freqs)


_HAAR_NAMES = ("haar", "db1")


def dwt(x: np.ndarray, wavelet: str = "haar", levels: int = 5) -> WaveletCoefficients:
    """Mallat filter-bank decomposition with the orthonormal Haar pair.

    Inputs whose length is not divisible by 2**levels are zero-padded up to
    the next multiple; the original length is recorded so the inverse can
    undo the padding.
    """
    x = np.asarray(x, dtype=np.float64)
    if levels <= 0:
        raise ValueError("levels must be >= 1")
    if wavelet.lower() not in _HAAR_NAMES:
        raise ValueError(f"unsupported wavelet {wavelet!r}")
    if x.size == 0:
        raise ValueError("empty input")

    block = 2**levels
    n_padded = int(np.ceil(x.size / block)) * block
    padded = np.zeros(n_padded)
    padded[: x.size] = x

    details: list[np.ndarray] = []
    approx = padded
    for _ in range(levels):
        even, odd = approx[0::2], approx[1::2]
        details.append((even - odd) / np.sqrt(2.0))
        approx = (even + odd) / np.sqrt(2.0)
    return WaveletCoefficients(
        approximation=approx,
        details=tuple(details),
        wavelet="haar",
        levels=levels,
        n_original=x.size,
        n_padded=n_padded,
    )


def inverse_dwt(coeffs: WaveletCoefficients) -> np.ndarray:
    """Exact inverse of `dwt`, with padding removed."""
    approx = coeffs.approximation
    for level in range(coeffs.levels - 1, -1, -1):
        detail = coeffs.details[level]
        out = np.empty(2 * approx.size)
        out[0::2] = (approx + detail) / np.sqrt(2.0)
        out[1::2] = (approx - detail) / np.sqrt(2.0)
        approx = out
    return approx[: coeffs.n_original]
