"""Band-pass filter design and per-trial normalization.

IIR designs use the classic analog-prototype route (Butterworth, Chebyshev
I/II, elliptic) with a bilinear transform and frequency pre-warping, at the
minimum order that meets the band spec; they are realized and applied as a
cascade of second-order sections. The FIR design is weighted least squares
at a capped order. Every design is verified against the realized magnitude
response before it is returned.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import DesignError

FIR_FAMILY = "fir_least_squares"
IIR_FAMILIES = ("iir_butterworth", "iir_chebyshev1", "iir_chebyshev2", "iir_elliptic")
FILTER_FAMILIES = (FIR_FAMILY,) + IIR_FAMILIES

_FIR_STOPBAND_WEIGHT = 100.0
_VALIDATION_GRID = 4096


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass magnitude specification (frequencies in Hz, magnitudes in dB)."""

    stopband1_hz: float = 4.0
    passband1_hz: float = 5.0
    passband2_hz: float = 48.0
    stopband2_hz: float = 50.0
    stop_atten1_db: float = 60.0
    stop_atten2_db: float = 60.0
    passband_ripple_db: float = 1.0
    family: str = "iir_chebyshev1"
    max_fir_order: int = 400

    def validate(self, sample_rate: float) -> None:
        edges = (self.stopband1_hz, self.passband1_hz, self.passband2_hz, self.stopband2_hz)
        if not all(lo < hi for lo, hi in zip(edges, edges[1:])):
            raise ValueError(f"band edges must be strictly increasing, got {edges}")
        if self.stopband2_hz >= sample_rate / 2:
            raise ValueError(f"stopband2 {self.stopband2_hz} Hz must be below Nyquist {sample_rate / 2} Hz")
        if self.family not in FILTER_FAMILIES:
            raise ValueError(f"unknown filter family {self.family!r}")
        if self.passband_ripple_db <= 0 or self.stop_atten1_db <= 0 or self.stop_atten2_db <= 0:
            raise ValueError("ripple and attenuations must be positive")
        if self.max_fir_order < 2:
            raise ValueError("max_fir_order must be >= 2")


@dataclass(frozen=True)
class FilterCoefficients:
    """Realized filter: flat b/a plus the section cascade actually applied."""

    b: np.ndarray
    a: np.ndarray  # empty for FIR
    sos: np.ndarray | None  # (n_sections, 6), None for FIR
    family: str
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.float64))
        if self.is_fir:
            if self.a.size:
                raise ValueError("FIR coefficients cannot have feedback terms")
        else:
            if self.sos is None:
                raise ValueError("IIR coefficients require a second-order-section cascade")
            sos = np.asarray(self.sos, dtype=np.float64)
            object.__setattr__(self, "sos", sos)
            for i, section in enumerate(sos):
                poles = np.roots(section[3:])
                if np.any(np.abs(poles) >= 1.0):
                    raise ValueError(f"section {i} is unstable (pole magnitude >= 1)")

    @property
    def is_fir(self) -> bool:
        return self.sos is None

    def pole_magnitudes(self) -> np.ndarray:
        if self.is_fir:
            return np.array([])
        return np.concatenate([np.abs(np.roots(s[3:])) for s in self.sos])


def frequency_response(coeffs: FilterCoefficients, freqs_hz: np.ndarray) -> np.ndarray:
    """Complex response at the given frequencies, evaluated section by section."""
    z = np.exp(-2j * np.pi * np.asarray(freqs_hz, dtype=np.float64) / coeffs.sample_rate)
    if coeffs.is_fir:
        return np.polyval(coeffs.b[::-1], z)
    h = np.ones_like(z)
    for b0, b1, b2, a0, a1, a2 in coeffs.sos:
        h *= (b0 + b1 * z + b2 * z**2) / (a0 + a1 * z + a2 * z**2)
    return h


def magnitude_db(coeffs: FilterCoefficients, freqs_hz: np.ndarray) -> np.ndarray:
    h = np.abs(frequency_response(coeffs, freqs_hz))
    return 20.0 * np.log10(np.maximum(h, 1e-300))


@dataclass(frozen=True)
class DesignReport:
    """Measured compliance of a realized design."""

    order: int
    stop1_atten_db: float
    stop2_atten_db: float
    passband_dev_db: float
    stop1_checkpoint_hz: float
    stop2_checkpoint_hz: float


def design_filter(
    spec: FilterSpec, sample_rate: float, return_report: bool = False
) -> FilterCoefficients | tuple[FilterCoefficients, DesignReport]:
    """Design a band-pass filter meeting `spec` at `sample_rate`.

    IIR designs are validated at the stopband edges. The order-capped FIR
    trades attenuation right at the edges for attenuation deeper into the
    stopband, so it is validated one transition-width inside each edge; a
    design that misses even there raises DesignError with the achieved
    attenuation.
    """
    spec.validate(sample_rate)
    wp = [spec.passband1_hz, spec.passband2_hz]
    ws = [spec.stopband1_hz, spec.stopband2_hz]
    stop_atten = max(spec.stop_atten1_db, spec.stop_atten2_db)

    if spec.family == FIR_FAMILY:
        numtaps = spec.max_fir_order + 1 if spec.max_fir_order % 2 == 0 else spec.max_fir_order
        bands = [0.0, ws[0], wp[0], wp[1], ws[1], sample_rate / 2]
        b = sps.firls(
            numtaps,
            bands,
            [0, 0, 1, 1, 0, 0],
            weight=[_FIR_STOPBAND_WEIGHT, 1.0, _FIR_STOPBAND_WEIGHT],
            fs=sample_rate,
        )
        coeffs = FilterCoefficients(b=b, a=np.array([]), sos=None, family=spec.family, sample_rate=sample_rate)
        order = numtaps - 1
        transition1 = wp[0] - ws[0]
        transition2 = ws[1] - wp[1]
        check1 = max(ws[0] - transition1, 0.0)
        check2 = min(ws[1] + transition2, sample_rate / 2)
    else:
        ord_fn = {
            "iir_butterworth": sps.buttord,
            "iir_chebyshev1": sps.cheb1ord,
            "iir_chebyshev2": sps.cheb2ord,
            "iir_elliptic": sps.ellipord,
        }[spec.family]
        order, wn = ord_fn(wp, ws, spec.passband_ripple_db, stop_atten, fs=sample_rate)
        if spec.family == "iir_butterworth":
            sos = sps.butter(order, wn, btype="bandpass", output="sos", fs=sample_rate)
        elif spec.family == "iir_chebyshev1":
            sos = sps.cheby1(order, spec.passband_ripple_db, wn, btype="bandpass", output="sos", fs=sample_rate)
        elif spec.family == "iir_chebyshev2":
            sos = sps.cheby2(order, stop_atten, wn, btype="bandpass", output="sos", fs=sample_rate)
        else:
            sos = sps.ellip(order, spec.passband_ripple_db, stop_atten, wn, btype="bandpass", output="sos", fs=sample_rate)
        b, a = sps.sos2tf(sos)
        coeffs = FilterCoefficients(b=b, a=a, sos=sos, family=spec.family, sample_rate=sample_rate)
        check1, check2 = ws[0], ws[1]

    report = _measure(coeffs, spec, sample_rate, check1, check2, order)
    tol_stop1 = spec.stop_atten1_db - 3.0
    tol_stop2 = spec.stop_atten2_db - 3.0
    tol_pass = spec.passband_ripple_db + 0.5
    if report.stop1_atten_db < tol_stop1 or report.stop2_atten_db < tol_stop2:
        raise DesignError(
            f"{spec.family} design cannot meet stopband spec: achieved "
            f"{report.stop1_atten_db:.1f} dB at {check1:g} Hz and "
            f"{report.stop2_atten_db:.1f} dB at {check2:g} Hz (need {tol_stop1:.0f}/{tol_stop2:.0f})",
            achieved_attenuation_db=min(report.stop1_atten_db, report.stop2_atten_db),
        )
    if report.passband_dev_db > tol_pass:
        raise DesignError(
            f"{spec.family} design deviates {report.passband_dev_db:.2f} dB in the passband "
            f"(allowed {tol_pass:.2f})",
            achieved_attenuation_db=min(report.stop1_atten_db, report.stop2_atten_db),
        )
    if return_report:
        return coeffs, report
    return coeffs


def _measure(
    coeffs: FilterCoefficients,
    spec: FilterSpec,
    sample_rate: float,
    check1: float,
    check2: float,
    order: int,
) -> DesignReport:
    grid = np.linspace(0.0, sample_rate / 2, _VALIDATION_GRID)
    mag = magnitude_db(coeffs, grid)
    pass_lo, pass_hi = spec.passband1_hz + 1.0, spec.passband2_hz - 1.0
    passband = (grid >= pass_lo) & (grid <= pass_hi)
    return DesignReport(
        order=order,
        stop1_atten_db=-magnitude_db(coeffs, np.array([check1]))[0],
        stop2_atten_db=-magnitude_db(coeffs, np.array([check2]))[0],
        passband_dev_db=float(np.max(np.abs(mag[passband]))) if passband.any() else 0.0,
        stop1_checkpoint_hz=check1,
        stop2_checkpoint_hz=check2,
    )


def apply_filter(coeffs: FilterCoefficients, x: np.ndarray) -> np.ndarray:
    """Run the difference equation over `x` with zero initial conditions."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot filter an empty sequence")
    if coeffs.is_fir:
        return sps.lfilter(coeffs.b, [1.0], x)
    return sps.sosfilt(coeffs.sos, x)


def zero_mean(x: np.ndarray) -> np.ndarray:
    """Subtract the sample mean."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalize an empty sequence")
    return x - x.mean()


def export_coefficients_csv(coeffs: FilterCoefficients, path: str | Path) -> None:
    """Dump coefficients for inspection: b/a for FIR, section rows for IIR."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if coeffs.is_fir:
            writer.writerow(["tap", "b"])
            for i, bk in enumerate(coeffs.b):
                writer.writerow([i, repr(float(bk))])
        else:
            writer.writerow(["section", "b0", "b1", "b2", "a0", "a1", "a2"])
            for i, row in enumerate(coeffs.sos):
                writer.writerow([i] + [repr(float(v)) for v in row])
