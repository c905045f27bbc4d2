"""PSD estimation, instantaneous frequency, spectral masks and small metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy import signal as sps

from .core import IqSignal, PulseSpec, make_pulse
from .modulator import ChipIncrementStream, synthesize


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Two-sided PSD, normalized to unit total power.

    ``psd`` is linear density (1/Hz); ``psd_db_peak`` is relative to its
    maximum and ``psd_db_inband`` relative to a uniform density over
    ``inband_hz``.
    """

    freqs_hz: np.ndarray
    psd: np.ndarray
    resolution_hz: float
    inband_hz: float

    @property
    def bin_width_hz(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0])

    @property
    def total_power(self) -> float:
        return float(np.sum(self.psd) * self.bin_width_hz)

    @property
    def psd_db_peak(self) -> np.ndarray:
        return 10 * np.log10(self.psd / self.psd.max())

    @property
    def psd_db_inband(self) -> np.ndarray:
        return 10 * np.log10(self.psd * self.inband_hz)

    def band_power(self, lo_hz: float, hi_hz: float) -> float:
        sel = (self.freqs_hz >= lo_hz) & (self.freqs_hz < hi_hz)
        return float(np.sum(self.psd[sel]) * self.bin_width_hz)


def welch_psd(
    sig: IqSignal,
    segment_len: int,
    overlap: float = 0.5,
    window: str = "hann",
    inband_hz: Optional[float] = None,
) -> PsdEstimate:
    """Averaged modified periodogram, two-sided and centered at 0 Hz."""
    if segment_len > len(sig):
        raise ValueError(f"segment length {segment_len} exceeds signal length {len(sig)}")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must be in [0, 1)")
    fs = sig.sample_rate_hz
    freqs, pxx = sps.welch(
        sig.samples,
        fs=fs,
        window=window,
        nperseg=segment_len,
        noverlap=int(round(overlap * segment_len)),
        return_onesided=False,
        detrend=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    pxx = np.fft.fftshift(pxx)
    df = fs / segment_len
    total = np.sum(pxx) * df
    if not total > 0:
        raise ValueError("signal has zero power")
    pxx = pxx / total
    win = sps.get_window(window, segment_len)
    enbw = segment_len * np.sum(win**2) / np.sum(win) ** 2
    return PsdEstimate(
        freqs_hz=freqs,
        psd=pxx,
        resolution_hz=float(enbw * df),
        inband_hz=float(inband_hz if inband_hz is not None else fs),
    )


def instantaneous_frequency(sig: IqSignal) -> np.ndarray:
    s = sig.samples
    if np.any(np.abs(s) == 0):
        raise ValueError("instantaneous frequency undefined at zero-magnitude samples")
    return np.angle(s[1:] * np.conj(s[:-1])) * sig.sample_rate_hz / (2 * math.pi)


@dataclass(frozen=True, eq=False)
class SpectralMask:
    """Piecewise-linear PSD limit (dB re in-band density) versus offset from band center.

    With ``symmetric`` set, breakpoints are given for non-negative offsets
    and mirrored.
    """

    offsets_hz: np.ndarray
    limits_db: np.ndarray
    symmetric: bool = True

    def __post_init__(self):
        if len(self.offsets_hz) != len(self.limits_db) or len(self.offsets_hz) < 2:
            raise ValueError("mask needs at least two (offset, limit) breakpoints")
        if np.any(np.diff(self.offsets_hz) <= 0):
            raise ValueError("mask breakpoints must be strictly increasing")
        if self.symmetric and self.offsets_hz[0] != 0:
            raise ValueError("symmetric mask must start at offset 0")

    def span(self) -> Tuple[float, float]:
        if self.symmetric:
            return -float(self.offsets_hz[-1]), float(self.offsets_hz[-1])
        return float(self.offsets_hz[0]), float(self.offsets_hz[-1])

    def limit_at(self, offset_hz) -> np.ndarray:
        x = np.abs(offset_hz) if self.symmetric else np.asarray(offset_hz)
        return np.interp(x, self.offsets_hz, self.limits_db)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SpectralMask":
        return cls.parse(Path(path).read_text())

    @classmethod
    def parse(cls, text: str) -> "SpectralMask":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"mask line {lineno}: expected 'offset_hz limit_db', got {line!r}")
            rows.append((float(parts[0]), float(parts[1])))
        if not rows:
            raise ValueError("empty mask")
        arr = np.array(rows)
        return cls(offsets_hz=arr[:, 0], limits_db=arr[:, 1], symmetric=bool(arr[0, 0] >= 0))


@dataclass(frozen=True)
class MaskReport:
    passed: bool
    worst_margin_db: float
    worst_freq_hz: float
    offending_freqs_hz: np.ndarray


def mask_check(psd: PsdEstimate, mask: SpectralMask, center_hz: float = 0.0) -> MaskReport:
    """Margin = mask limit - PSD (dB re in-band density) at every bin."""
    offsets = psd.freqs_hz - center_hz
    lo, hi = mask.span()
    if offsets[0] < lo or offsets[-1] > hi:
        raise ValueError(
            f"mask span [{lo:g}, {hi:g}] Hz does not cover PSD span [{offsets[0]:g}, {offsets[-1]:g}] Hz"
        )
    margin = mask.limit_at(offsets) - psd.psd_db_inband
    worst = int(np.argmin(margin))
    return MaskReport(
        passed=bool(np.all(margin >= 0)),
        worst_margin_db=float(margin[worst]),
        worst_freq_hz=float(psd.freqs_hz[worst]),
        offending_freqs_hz=psd.freqs_hz[margin < 0],
    )


def shoulder_bandwidth(psd: PsdEstimate, drop_db: float = 20.0) -> float:
    """Width between the points where the PSD first falls drop_db below its peak.

    Walks outward from the peak on both sides; crossing points are linearly
    interpolated in dB.
    """
    db = psd.psd_db_peak
    f = psd.freqs_hz
    k0 = int(np.argmax(db))
    level = -drop_db

    def crossing(step):
        k = k0
        while 0 <= k + step < len(db):
            if db[k + step] < level:
                a, b = db[k], db[k + step]
                return f[k] + (f[k + step] - f[k]) * (a - level) / (a - b)
            k += step
        raise ValueError("PSD never drops below the shoulder level")

    return float(crossing(1) - crossing(-1))


def sideband_power_ratio_db(psd: PsdEstimate, center_hz: float, min_offset_hz: float) -> float:
    """Power above center_hz + min_offset over power below center_hz - min_offset, in dB."""
    f = psd.freqs_hz
    upper = np.sum(psd.psd[f >= center_hz + min_offset_hz])
    lower = np.sum(psd.psd[f <= center_hz - min_offset_hz])
    return float(10 * np.log10(upper / lower))


def max_deviation_hz(shift: float, pulse_spec: PulseSpec, chip_period_s: float, oversampling: int = 16,
                     n_chips: int = 64) -> float:
    """Largest |instantaneous frequency| of a stream repeating one phase shift every chip."""
    pulse = make_pulse(pulse_spec, chip_period_s, oversampling)
    stream = ChipIncrementStream(carrier=0.0, data=np.full(n_chips, float(shift)))
    return float(np.max(np.abs(instantaneous_frequency(synthesize(stream, pulse)))))


def deviation_ratio(binary, quaternary, chip_period_s: float = 1.0, oversampling: int = 16) -> float:
    """Ratio of the maximal frequency deviations of two GMSK baselines.

    Each is measured on a waveform that repeats that baseline's largest
    phase shift.
    """
    from .baselines import gmsk_constellation, gmsk_pulse_spec

    pa, pb = gmsk_pulse_spec(binary), gmsk_pulse_spec(quaternary)
    if pa != pb:
        raise ValueError("deviation_ratio needs identical pulses for both baselines")
    ext_a = float(np.max(np.abs(gmsk_constellation(binary))))
    ext_b = float(np.max(np.abs(gmsk_constellation(quaternary))))
    da = max_deviation_hz(ext_a, pa, chip_period_s, oversampling)
    db = max_deviation_hz(ext_b, pb, chip_period_s, oversampling)
    return db / da


def low_snr_rate(snr_linear: float) -> Tuple[float, float]:
    """Exact AWGN rate log2(1 + snr) and its low-SNR linearization snr / ln 2."""
    if snr_linear < 0:
        raise ValueError("snr must be non-negative")
    return math.log2(1.0 + snr_linear), snr_linear / math.log(2.0)


def crest_factor_db(sig: IqSignal) -> float:
    p = np.abs(sig.samples) ** 2
    return float(10 * np.log10(p.max() / p.mean()))

